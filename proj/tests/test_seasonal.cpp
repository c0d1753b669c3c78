#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "demandcast/seasonal.hpp"
#include "demandcast/synth.hpp"
#include "helpers.hpp"

using namespace demandcast;
using Catch::Approx;
using testing::make_catalog;
using testing::make_panel;

namespace {

Eigen::Array<bool, Eigen::Dynamic, 1> all_listed(int n) { return Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(n, true); }

SmoothedPanel smooth(const SalesPanel& p) { return smooth_panel(p, 8, 3.0); }

}  // namespace

TEST_CASE("standardize_year on constant sales") {
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(52, 7.0);
  const auto s = standardize_year(x, all_listed(52));
  for (int t = 0; t < 52; ++t) CHECK(s(t) == Approx(1.0 / 52).epsilon(1e-12));

  auto half = all_listed(52);
  half.tail(26).setConstant(false);
  const auto h = standardize_year(x, half, 52);
  CHECK(h(0) == Approx(1.0 / 52).epsilon(1e-12));
  CHECK(h(10) == Approx(0.019231).margin(1e-6));
  CHECK(std::isnan(h(40)));
}

TEST_CASE("standardize_year rejects years without sales") {
  CHECK_THROWS_AS(standardize_year(Eigen::VectorXd::Zero(52), all_listed(52)), std::invalid_argument);
  CHECK_THROWS_AS(standardize_year(Eigen::VectorXd::Ones(52), Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(52, false)),
                  std::invalid_argument);
  CHECK_THROWS_AS(standardize_year(Eigen::VectorXd::Ones(52), all_listed(51)), std::invalid_argument);
}

TEST_CASE("standardize_year works for float scalars") {
  const Eigen::VectorXf x = Eigen::VectorXf::Constant(4, 2.0f);
  const auto s = standardize_year(x, all_listed(4));
  CHECK(s.sum() == Approx(1.0f));
}

TEST_CASE("category curve from one flat product") {
  const auto p = make_panel({std::vector<std::int64_t>(52, 5)});
  const auto c = category_seasonality(smooth(p), make_catalog(p), 52);
  REQUIRE(c.curve.count("c0") == 1);
  for (int t = 0; t < 52; ++t) {
    CHECK(c.curve.at("c0")(t) == Approx(1.0 / 52));
    CHECK(c.variance.at("c0")(t) == 0.0);
  }
}

TEST_CASE("category curve is the pointwise mean of product curves") {
  std::vector<std::int64_t> b(52, 0);
  for (int t = 0; t < 26; ++t) b[t] = 10;
  const auto p = make_panel({std::vector<std::int64_t>(52, 5), b});
  const auto c = category_seasonality(smooth(p), make_catalog(p), 52);
  const auto& curve = c.curve.at("c0");
  const auto& var = c.variance.at("c0");
  for (int t = 0; t < 26; ++t) {
    CHECK(curve(t) == Approx(1.5 / 52));
    CHECK(var(t) == Approx(0.5 / (52.0 * 52.0)));
  }
  for (int t = 26; t < 52; ++t) CHECK(curve(t) == Approx(0.5 / 52));
}

TEST_CASE("unobserved positions are interpolated circularly") {
  // listed only in weeks 0..9 of a 20-week period: positions 10..19 are filled between 9 and 0
  std::vector<std::int64_t> y(20, 0);
  std::vector<bool> listed(20, false);
  for (int t = 0; t < 10; ++t) {
    y[t] = t < 5 ? 2 : 6;
    listed[t] = true;
  }
  const auto p = make_panel({y}, {listed});
  const auto c = category_seasonality(smooth(p), make_catalog(p), 20).curve.at("c0");
  for (int t = 10; t < 20; ++t) {
    CHECK(c(t) >= std::min(c(9), c(0)) - 1e-15);
    CHECK(c(t) <= std::max(c(9), c(0)) + 1e-15);
  }
  CHECK(c(10) > c(19));
}

TEST_CASE("product-years with few listed weeks are ignored") {
  std::vector<bool> listed(52, false);
  for (int t = 0; t < kMinListedWeeksPerYear - 1; ++t) listed[t] = true;
  std::vector<std::int64_t> y(52, 0);
  for (int t = 0; t < kMinListedWeeksPerYear - 1; ++t) y[t] = 3;
  const auto p = make_panel({y}, {listed});
  CHECK(category_seasonality(smooth(p), make_catalog(p), 52).curve.empty());
}

namespace {

RealMatrix two_groups(int per_group, int tau, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 0.002);
  RealMatrix m(2 * per_group, tau);
  for (int i = 0; i < 2 * per_group; ++i) {
    for (int t = 0; t < tau; ++t) {
      const double base = i < per_group ? 1.0 + 0.8 * std::sin(2 * M_PI * t / tau) : 1.0 + 0.8 * std::cos(2 * M_PI * t / tau);
      m(i, t) = base / tau + noise(rng);
    }
  }
  return m;
}

double partition_cost(const RealMatrix& pts, unsigned mask) {
  double cost = 0.0;
  for (int side = 0; side < 2; ++side) {
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(pts.cols());
    int count = 0;
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      if (((mask >> i) & 1U) == static_cast<unsigned>(side)) {
        mean += pts.row(i);
        ++count;
      }
    }
    if (count == 0) return std::numeric_limits<double>::infinity();
    mean /= count;
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      if (((mask >> i) & 1U) == static_cast<unsigned>(side)) cost += (pts.row(i) - mean).squaredNorm();
    }
  }
  return cost;
}

}  // namespace

TEST_CASE("k = 2 matches the best 2-partition") {
  std::mt19937_64 rng(3);
  const int tau = 12;
  const auto curves = two_groups(4, tau, rng);
  const RealMatrix var = RealMatrix::Zero(curves.rows(), tau);
  const auto r = cluster_seasonalities(curves, var, 2, 5);

  unsigned best_mask = 0;
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1U << curves.rows()); ++mask) {
    const double c = partition_cost(curves, mask);
    if (c < best) {
      best = c;
      best_mask = mask;
    }
  }
  for (Eigen::Index i = 0; i < curves.rows(); ++i) {
    for (Eigen::Index j = 0; j < curves.rows(); ++j) {
      const bool same_oracle = ((best_mask >> i) & 1U) == ((best_mask >> j) & 1U);
      CHECK((r.assignment[i] == r.assignment[j]) == same_oracle);
    }
  }
  for (int k = 0; k < 2; ++k) CHECK(r.patterns.row(k).mean() == Approx(1.0 / tau));
}

TEST_CASE("k = 1 gives the weighted mean curve") {
  std::mt19937_64 rng(4);
  const auto curves = two_groups(3, 10, rng);
  RealMatrix var = RealMatrix::Zero(6, 10);
  var.row(0).setConstant(1.0);  // weight 1/2
  const auto r = cluster_seasonalities(curves, var, 1, 1);
  Eigen::RowVectorXd expect = Eigen::RowVectorXd::Zero(10);
  double mass = 0.0;
  for (int i = 0; i < 6; ++i) {
    const double w = i == 0 ? 0.5 : 1.0;
    const Eigen::RowVectorXd row = curves.row(i) / (curves.row(i).mean() * 10.0);
    expect += w * row;
    mass += w;
  }
  expect /= mass;
  expect /= expect.mean() * 10.0;
  for (int t = 0; t < 10; ++t) CHECK(r.patterns(0, t) == Approx(expect(t)).epsilon(1e-12));
}

TEST_CASE("identical curves collapse onto one pattern") {
  RealMatrix curves = RealMatrix::Constant(5, 8, 1.0 / 8);
  for (int i = 0; i < 5; ++i) curves(i, 2) = 2.0 / 8;
  const auto r = cluster_seasonalities(curves, RealMatrix::Zero(5, 8), 3, 9);
  for (int i = 1; i < 5; ++i) CHECK(r.patterns.row(r.assignment[i]).isApprox(r.patterns.row(r.assignment[0])));
}

TEST_CASE("clustering is deterministic and validates k") {
  std::mt19937_64 rng(5);
  const auto curves = two_groups(5, 12, rng);
  const RealMatrix var = RealMatrix::Zero(10, 12);
  const auto a = cluster_seasonalities(curves, var, 3, 17);
  const auto b = cluster_seasonalities(curves, var, 3, 17);
  CHECK(a.assignment == b.assignment);
  CHECK(a.patterns == b.patterns);
  CHECK_THROWS_AS(cluster_seasonalities(curves, var, 11, 1), std::invalid_argument);
  CHECK_THROWS_AS(cluster_seasonalities(curves, var, 0, 1), std::invalid_argument);
}

TEST_CASE("product seasonality falls back to the global pattern") {
  const auto p = make_panel({std::vector<std::int64_t>(52, 5), std::vector<std::int64_t>(52, 3)});
  const auto cat = make_catalog(p, {"a", "b"});
  const auto m = fit_seasonality(smooth(p), cat, 52, 8, 1);
  CHECK(m.patterns.rows() == 2);
  CHECK(product_seasonality("p0", cat, m) == m.pattern_for("a"));
  const Catalog extended({{"new", CatalogEntry{"a", 1.0, {}}}, {"odd", CatalogEntry{"zzz", 1.0, {}}}});
  CHECK(product_seasonality("new", extended, m) == m.pattern_for("a"));
  CHECK(product_seasonality("odd", extended, m) == m.global_pattern);
  CHECK(m.value_at("a", 53) == m.pattern_for("a")(1));
}

TEST_CASE("trend features") {
  SECTION("constant series") {
    const auto s = smooth(make_panel({std::vector<std::int64_t>(60, 4)}));
    const auto f = trend_features(s, 0, 59);
    CHECK(f.annual_slope == 0.0);
    CHECK(f.local_slope == 0.0);
  }
  SECTION("linear ramp") {
    std::vector<std::int64_t> y(52);
    for (int s = 0; s < 52; ++s) y[s] = s;
    const auto sm = smooth(make_panel({y}));
    CHECK(trend_features(sm, 0, 51).annual_slope == Approx(1.0 / 25.5).epsilon(1e-12));
  }
  SECTION("short history") {
    std::vector<bool> listed(20, false);
    std::vector<std::int64_t> y(20, 0);
    for (int t = 15; t < 20; ++t) {
      listed[t] = true;
      y[t] = t;
    }
    const auto f = trend_features(smooth(make_panel({y}, {listed})), 0, 19);
    CHECK(f.annual_slope == 0.0);
    CHECK(f.local_slope == Approx(1.0 / 17.0));
  }
  CHECK_THROWS_AS(trend_features(smooth(make_panel({{1, 2}})), 0, 2), std::out_of_range);
}

TEST_CASE("category curves recover the generating shape when products live for years") {
  SynthSpec spec;
  spec.n_products = 300;
  spec.n_categories = 10;
  spec.weeks = 4 * 52;
  spec.level_log_mean = 4.0;
  spec.level_log_sd = 0.3;
  spec.lifetime_median = 1000.0;
  spec.lifetime_log_sd = 0.0;
  spec.trend_sd = 0.0;
  spec.promo_probability = 0.0;
  spec.stockout_probability = 0.0;
  const auto s = generate_panel(spec);
  const auto curves = category_seasonality(smooth(s.panel), s.catalog, spec.tau);
  double worst = 1.0;
  for (const auto& [cat, truth] : s.truth.category_curves) {
    const Eigen::VectorXd est = curves.curve.at(cat);
    const Eigen::VectorXd a = est.array() - est.mean();
    const Eigen::VectorXd b = truth.array() - truth.mean();
    worst = std::min(worst, a.dot(b) / (a.norm() * b.norm()));
  }
  CHECK(worst >= 0.9);
}
