#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "demandcast/eval.hpp"
#include "helpers.hpp"

using namespace demandcast;
using Catch::Approx;
using testing::make_catalog;
using testing::make_panel;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("weighted RMSE and MAE examples") {
  CHECK(weighted_rmse(vec({1, 1}), vec({0, 0}), vec({1, 2})) == Approx(std::sqrt(2.5)));
  CHECK(weighted_rmse(vec({1, 4}), vec({1, 4}), vec({3, 2})) == 0.0);
  CHECK(weighted_mae(vec({2, 0}), vec({1, 1}), vec({1, 1})) == 1.0);
  CHECK(weighted_mae(vec({2, 0}), vec({1, 1}), vec({1, 1}), MaeNormalization::actual) == 1.0);
  CHECK(weighted_mae(vec({3, 1}), vec({3, 1}), vec({1, 5})) == 0.0);
  CHECK(weighted_mae(vec({4, 0}), vec({2, 2}), vec({1, 1}), MaeNormalization::actual) == 1.0);
  CHECK(weighted_mae(vec({4, 0}), vec({1, 1}), vec({1, 1})) == 2.0);
  CHECK_THROWS_AS(weighted_rmse(vec({1}), vec({1, 2}), vec({1})), std::invalid_argument);
  CHECK_THROWS_AS(weighted_rmse(Eigen::VectorXd(0), Eigen::VectorXd(0), Eigen::VectorXd(0)), std::invalid_argument);
  CHECK_THROWS_AS(weighted_mae(vec({1}), vec({0}), vec({1})), std::invalid_argument);
}

TEST_CASE("metric algebra on random data") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 30.0), price(0.5, 40.0), scale(0.1, 100.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 40;
    Eigen::VectorXd y(n), f(n), p(n);
    for (int i = 0; i < n; ++i) {
      y(i) = std::floor(u(rng));
      f(i) = u(rng) + 0.01;
      p(i) = price(rng);
    }
    const double rmse = weighted_rmse(y, f, p);
    const double mae = weighted_mae(y, f, p);
    CHECK(rmse > 0.0);
    CHECK(mae > 0.0);
    const double c = scale(rng);
    const Eigen::VectorXd pc = c * p;
    CHECK(weighted_rmse(y, f, pc) == Approx(c * rmse).epsilon(1e-12));
    CHECK(weighted_mae(y, f, pc) == Approx(mae).epsilon(1e-12));
    const Eigen::VectorXd p2 = 4.0 * p;
    CHECK(weighted_rmse(y, f, p2) == 4.0 * rmse);
    CHECK(weighted_mae(y, f, p2) == mae);
    CHECK(weighted_rmse(y, y, p) == 0.0);
  }
}

TEST_CASE("temporal split ranges") {
  const auto s = temporal_split(199, SplitSpec{});
  CHECK(s.train == WeekRange{0, 170});
  CHECK(s.valid == WeekRange{170, 180});
  CHECK(s.test == WeekRange{180, 199});
  const auto t = temporal_split(30, SplitSpec{20, 5, 5, 6});
  CHECK(t.train == WeekRange{0, 20});
  CHECK(t.valid == WeekRange{20, 25});
  CHECK(t.test == WeekRange{25, 30});
  CHECK(t.train.size() + t.valid.size() + t.test.size() == 30);
  CHECK(t.valid.contains(20));
  CHECK_FALSE(t.valid.contains(25));
  CHECK_THROWS_AS(temporal_split(29, SplitSpec{20, 5, 5, 6}), std::invalid_argument);
  CHECK_THROWS_AS(temporal_split(30, SplitSpec{20, 0, 5, 6}), std::invalid_argument);
  CHECK_NOTHROW(temporal_split(40, SplitSpec{20, 5, 5, 6}));
}

TEST_CASE("ABC segments by price-weighted training volume") {
  std::vector<std::vector<std::int64_t>> units;
  for (int i = 0; i < 10; ++i) units.push_back(std::vector<std::int64_t>(8, 10 - i));
  auto p = make_panel(units);
  auto seg = segment_products(p, make_catalog(p), 6);
  CHECK(seg.at("p0") == Segment::A);
  for (const char* id : {"p1", "p2", "p3"}) CHECK(seg.at(id) == Segment::B);
  for (const char* id : {"p4", "p5", "p6", "p7", "p8", "p9"}) CHECK(seg.at(id) == Segment::C);

  const auto flat = make_panel(std::vector<std::vector<std::int64_t>>(10, std::vector<std::int64_t>(8, 3)));
  seg = segment_products(flat, make_catalog(flat), 6);
  CHECK(seg.at("p0") == Segment::A);
  CHECK(seg.at("p3") == Segment::B);
  CHECK(seg.at("p4") == Segment::C);

  std::vector<double> prices(10, 1.0);
  prices[7] = 100.0;
  seg = segment_products(flat, make_catalog(flat, {}, prices), 6);
  CHECK(seg.at("p7") == Segment::A);
  CHECK(seg.at("p0") == Segment::B);

  // sales after train_end do not count
  units[9] = {0, 0, 0, 0, 0, 0, 500, 500};
  p = make_panel(units);
  CHECK(segment_products(p, make_catalog(p), 6).at("p9") == Segment::C);

  const auto two = make_panel({{1}, {2}});
  CHECK_THROWS_AS(segment_products(two, make_catalog(two), 1), std::invalid_argument);
  CHECK_THROWS_AS(segment_products(flat, make_catalog(flat), 6, 0.5, 0.4), std::invalid_argument);
}

TEST_CASE("cold start filter") {
  const std::vector<int> life{1, 7, 12, 3, 20, 6};
  CHECK(cold_start_filter(life, 0).size() == life.size());
  CHECK(cold_start_filter(life, 6) == std::vector<Eigen::Index>{1, 2, 4, 5});

  const std::vector<int> launched{1, 2, 3, 4, 5};
  CHECK(cold_start_filter(launched, 6).empty());

  std::mt19937_64 rng(22);
  std::uniform_int_distribution<int> u(0, 40);
  std::vector<int> mixed(500);
  for (auto& l : mixed) l = u(rng);
  for (int m : {0, 1, 8, 13, 41}) {
    std::size_t expect = 0;
    for (int l : mixed) expect += l >= m ? 1 : 0;
    CHECK(cold_start_filter(mixed, m).size() == expect);
  }
}

TEST_CASE("life buckets") {
  CHECK(life_bucket(0) == "<8");
  CHECK(life_bucket(7) == "<8");
  CHECK(life_bucket(8) == "8");
  CHECK(life_bucket(12) == "12");
  CHECK(life_bucket(13) == ">=13");
}

namespace {

struct Case {
  std::vector<KeyedValue> preds, actuals;
  Catalog catalog;
  std::map<ProductId, Segment> segments;
  LifeLengths life;
};

Case small_case() {
  Case c;
  c.catalog = Catalog({{"a", {"x", 2.0, {}}}, {"b", {"x", 1.0, {}}}});
  c.actuals = {{"a", 10, 4.0}, {"a", 11, 2.0}, {"b", 10, 1.0}};
  c.preds = {{"b", 10, 2.0}, {"a", 11, 2.0}, {"a", 10, 3.0}};
  c.segments = {{"a", Segment::A}, {"b", Segment::C}};
  c.life = {{{"a", 10}, 20}, {{"a", 11}, 21}, {{"b", 10}, 9}};
  return c;
}

}  // namespace

TEST_CASE("evaluate aggregates cells") {
  auto c = small_case();
  const auto r = evaluate(c.preds, c.actuals, c.catalog, c.segments, c.life);
  CHECK(r.overall.n == 3);
  CHECK(r.overall.rmse == Approx(std::sqrt((4.0 + 0.0 + 1.0) / 3)));
  CHECK(r.overall.mae == Approx(3.0 / (6.0 + 4.0 + 2.0)));
  CHECK(r.segments.at(Segment::A).n == 2);
  CHECK(r.segments.at(Segment::A).rmse == Approx(std::sqrt(2.0)));
  CHECK(r.segments.at(Segment::B).n == 0);
  CHECK(std::isnan(r.segments.at(Segment::B).rmse));
  CHECK(r.segments.at(Segment::C).mae == Approx(0.5));
  bool saw_nine = false;
  for (const auto& [label, cell] : r.life_buckets) {
    if (label == "9") {
      saw_nine = true;
      CHECK(cell.n == 1);
    }
  }
  CHECK(saw_nine);

  const auto perfect = evaluate(c.actuals, c.actuals, c.catalog, c.segments, c.life);
  CHECK(perfect.overall.rmse == 0.0);
  CHECK(perfect.overall.mae == 0.0);

  auto bad = c.preds;
  bad[0].week = 12;
  CHECK_THROWS_AS(evaluate(bad, c.actuals, c.catalog, c.segments, c.life), std::invalid_argument);
  bad = c.preds;
  bad.pop_back();
  CHECK_THROWS_AS(evaluate(bad, c.actuals, c.catalog, c.segments, c.life), std::invalid_argument);
  bad = c.preds;
  bad[0] = bad[1];
  CHECK_THROWS_AS(evaluate(bad, c.actuals, c.catalog, c.segments, c.life), std::invalid_argument);
}

TEST_CASE("a single segment and bucket reproduce the overall cell") {
  const Catalog cat({{"a", {"x", 3.0, {}}}, {"b", {"x", 1.5, {}}}});
  const std::vector<KeyedValue> y{{"a", 1, 5.0}, {"b", 1, 2.0}, {"b", 2, 0.0}};
  const std::vector<KeyedValue> f{{"a", 1, 4.0}, {"b", 1, 3.0}, {"b", 2, 1.0}};
  const std::map<ProductId, Segment> seg{{"a", Segment::B}, {"b", Segment::B}};
  const LifeLengths life{{{"a", 1}, 30}, {{"b", 1}, 14}, {{"b", 2}, 15}};
  const auto r = evaluate(f, y, cat, seg, life);
  CHECK(r.segments.at(Segment::B).rmse == r.overall.rmse);
  CHECK(r.segments.at(Segment::B).mae == r.overall.mae);
  for (const auto& [label, cell] : r.life_buckets) {
    if (label == ">=13") {
      CHECK(cell.rmse == r.overall.rmse);
      CHECK(cell.mae == r.overall.mae);
    }
  }
}

TEST_CASE("reports are written and printed") {
  const auto c = small_case();
  const std::vector<NamedReport> reports{{"gbt", evaluate(c.preds, c.actuals, c.catalog, c.segments, c.life)}};
  const auto dir = testing::scratch_dir("eval_report");
  write_report(dir / "report.csv", reports);
  const auto text = testing::read_file(dir / "report.csv");
  CHECK(text.rfind("model,scope,group,n,rmse,mae\n", 0) == 0);
  CHECK(text.find("gbt,segment,All,3,") != std::string::npos);
  CHECK(text.find("gbt,life,9,1,") != std::string::npos);
  std::ostringstream out;
  print_report_table(out, reports);
  CHECK(out.str().find("gbt") != std::string::npos);
}
