#include <catch_amalgamated.hpp>

#include <limits>
#include <random>

#include "demandcast/baselines.hpp"
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

/// Holdout error recomputed by refitting on every prefix.
double holdout_sse(const Eigen::VectorXd& s, double alpha, int holdout) {
  double sse = 0.0;
  for (Eigen::Index t = s.size() - holdout; t < s.size(); ++t) {
    const double e = s(t) - es_fit_forecast(s.head(t), alpha);
    sse += e * e;
  }
  return sse;
}

}  // namespace

TEST_CASE("exponential smoothing examples") {
  CHECK(es_fit_forecast(vec({3, 7, 2}), 1.0) == 2.0);
  CHECK(es_fit_forecast(vec({5, 5, 5, 5}), 0.3, 4) == 5.0);
  CHECK(es_fit_forecast(vec({5, 5, 5, 5}), 0.9, 1) == 5.0);
  CHECK(es_fit_forecast(vec({0, 4}), 0.5) == 2.0);
  CHECK_THROWS_AS(es_fit_forecast(Eigen::VectorXd(0), 0.5), std::invalid_argument);
  CHECK_THROWS_AS(es_fit_forecast(vec({1}), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(es_fit_forecast(vec({1}), 1.5), std::invalid_argument);
  const Eigen::VectorXf f = (Eigen::VectorXf(2) << 0.0f, 4.0f).finished();
  CHECK(es_fit_forecast(f, 0.5f) == 2.0f);
}

TEST_CASE("alpha grid selection") {
  const auto grid = default_alpha_grid();
  REQUIRE(grid.size() == 9);
  CHECK(es_grid_select(vec({4, 4, 4, 4, 4, 4, 4}), grid) == 0.1);
  CHECK(es_grid_select(vec({1, 2, 3}), grid) == kDefaultAlpha);
  CHECK(es_grid_select(vec({1, 2, 3, 4}), grid) == kDefaultAlpha);

  const auto shift = vec({5, 5, 5, 5, 5, 5, 5, 5, 20, 20, 20, 20});
  const double chosen = es_grid_select(shift, grid);
  CHECK(chosen > 0.5);
  for (double a : grid) CHECK(holdout_sse(shift, chosen, 4) <= holdout_sse(shift, a, 4));
}

TEST_CASE("grid selection agrees with prefix refits on random series") {
  std::mt19937_64 rng(17);
  std::poisson_distribution<int> draw(9.0);
  const auto grid = default_alpha_grid();
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd s(5 + trial % 20);
    for (Eigen::Index t = 0; t < s.size(); ++t) s(t) = draw(rng);
    const double chosen = es_grid_select(s, grid);
    double best = std::numeric_limits<double>::infinity();
    for (double a : grid) best = std::min(best, holdout_sse(s, a, kDefaultHoldout));
    CHECK(holdout_sse(s, chosen, kDefaultHoldout) == Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("exponential smoothing properties") {
  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> u(0.0, 50.0), a(0.05, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd s(1 + trial % 30);
    for (Eigen::Index t = 0; t < s.size(); ++t) s(t) = u(rng);
    const double alpha = a(rng);
    const double f = es_fit_forecast(s, alpha);
    CHECK(f >= s.minCoeff() - 1e-12);
    CHECK(f <= s.maxCoeff() + 1e-12);
    const Eigen::VectorXd shifted = s.array() + 7.0;
    CHECK(es_fit_forecast(shifted, alpha) == Approx(f + 7.0).epsilon(1e-12));
    CHECK(es_fit_forecast(s, alpha, 1) == es_fit_forecast(s, alpha, 9));
  }
}

TEST_CASE("baseline falls back to the category mean on short histories") {
  std::vector<bool> late(6, false);
  late[5] = true;
  const auto p = make_panel({{2, 2, 2, 2, 2, 2}, {6, 6, 6, 6, 6, 6}, {0, 0, 0, 0, 0, 9}, {1, 1, 1, 1, 1, 1}},
                            {std::vector<bool>(6, true), std::vector<bool>(6, true), late, std::vector<bool>(6, true)});
  const auto c = make_catalog(p, {"a", "a", "a", "b"});
  const std::vector<RowKey> keys{{"p0", 5, 11}, {"p2", 5, 11}, {"p2", 3, 9}, {"p3", 0, 6}};
  const auto f = es_baseline(p, c, keys);
  CHECK(f.forecast(0) == Approx(2.0));
  CHECK_FALSE(f.used_fallback[0]);
  CHECK(f.used_fallback[1]);
  CHECK(f.forecast(1) == Approx((2.0 * 6 + 6.0 * 6 + 9.0) / 13));
  CHECK(f.used_fallback[2]);
  CHECK(f.forecast(2) == Approx(4.0));
  CHECK(f.used_fallback[3]);
  CHECK(f.forecast(3) == Approx(1.0));
}
