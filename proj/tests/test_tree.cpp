#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "demandcast/tree.hpp"
#include "tree_oracle.hpp"

using namespace demandcast;
using Catch::Approx;

namespace {

TreeParams exact() {
  TreeParams p;
  p.lambda = 0.0;
  p.min_split_loss = 0.0;
  p.min_child_weight = 0.0;
  return p;
}

double central_difference(LossKind loss, double y, double f, int order) {
  const double e = 1e-4;
  if (order == 1) return (loss_value(loss, y, f + e) - loss_value(loss, y, f - e)) / (2 * e);
  return (loss_value(loss, y, f + e) - 2 * loss_value(loss, y, f) + loss_value(loss, y, f - e)) / (e * e);
}

}  // namespace

TEST_CASE("grad_hess examples") {
  auto a = grad_hess(LossKind::poisson, 1.0, 0.0);
  CHECK(a.g == 0.0);
  CHECK(a.h == 1.0);
  a = grad_hess(LossKind::poisson, 1.0, std::log(2.0));
  CHECK(a.g == Approx(1.0));
  CHECK(a.h == Approx(2.0));
  a = grad_hess(LossKind::squared, 5.0, 3.0);
  CHECK(a.g == -2.0);
  CHECK(a.h == 1.0);
  CHECK_THROWS_AS(grad_hess(LossKind::poisson, -1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(grad_hess(LossKind::squared, 1.0, std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(grad_hess(LossKind::poisson, 1.0, std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST_CASE("derivatives agree with finite differences") {
  for (LossKind loss : {LossKind::poisson, LossKind::squared}) {
    for (double y : {0.0, 0.5, 1.0, 3.0, 20.0}) {
      for (double f = -2.0; f <= 3.0; f += 0.5) {
        const auto d = grad_hess(loss, y, f);
        CHECK(d.g == Approx(central_difference(loss, y, f, 1)).epsilon(1e-6).margin(1e-7));
        CHECK(d.h == Approx(central_difference(loss, y, f, 2)).epsilon(1e-4));
      }
    }
  }
}

TEST_CASE("leaf_weight") {
  CHECK(leaf_weight(0.0, 3.0, 1.0) == 0.0);
  CHECK(leaf_weight(-20.0, 2.0, 0.0) == 10.0);
  CHECK(std::abs(leaf_weight(-20.0, 2.0, 1e12)) < 1e-10);
  CHECK_THROWS_AS(leaf_weight(1.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(leaf_weight(1.0, 1.0, -2.0), std::invalid_argument);
  TreeParams capped;
  capped.lambda = 0.0;
  capped.max_delta_step = 0.7;
  CHECK(leaf_weight(-20.0, 2.0, capped) == 0.7);
  CHECK(leaf_weight(20.0, 2.0, capped) == -0.7);
  CHECK(leaf_weight(-0.5, 2.0, capped) == 0.25);
}

TEST_CASE("best_split on the step example") {
  const std::vector<double> x{0, 0, 1, 1}, g{0, 0, -10, -10}, h{1, 1, 1, 1};
  auto s = best_split(x, g, h, exact());
  REQUIRE(s);
  CHECK(s->threshold == 0.5);
  CHECK(s->gain == Approx(50.0));
  CHECK(-s->grad_left / s->hess_left == 0.0);
  CHECK(-s->grad_right / s->hess_right == 10.0);

  auto p = exact();
  p.min_split_loss = 60.0;
  CHECK_FALSE(best_split(x, g, h, p));
  p.min_split_loss = 0.0;
  p.min_child_weight = 2.5;
  CHECK_FALSE(best_split(x, g, h, p));

  const std::vector<double> flat{0, 0, 0, 0};
  CHECK_FALSE(best_split(x, flat, h, exact()));
  CHECK_FALSE(best_split(std::vector<double>{2, 2, 2, 2}, g, h, exact()));
}

TEST_CASE("missing values are routed to the better side") {
  const std::vector<double> x{0, 1, std::nan(""), std::nan("")}, g{1, -1, -1, -1}, h{1, 1, 1, 1};
  const auto s = best_split(x, g, h, exact());
  REQUIRE(s);
  CHECK_FALSE(s->default_left);
  CHECK(s->grad_right == -3.0);

  Eigen::MatrixXd m(4, 1);
  m << 0, 1, std::nan(""), std::nan("");
  const auto t = fit_tree(m, g, h, exact());
  Eigen::VectorXd probe(1);
  probe << std::nan("");
  CHECK(t.predict(probe) == Approx(1.0));
  probe << -5.0;
  CHECK(t.predict(probe) == Approx(-1.0));
}

TEST_CASE("tree shape accessors") {
  Eigen::MatrixXd m(4, 1);
  m << 0, 0, 1, 1;
  const std::vector<double> g{0, 0, -10, -10}, h{1, 1, 1, 1};
  const auto t = fit_tree(m, g, h, exact());
  CHECK(t.depth() == 1);
  CHECK(t.leaf_count() == 2);
  CHECK(t.nodes[0].feature == 0);
  CHECK(t.nodes[t.nodes[0].right].weight == 10.0);

  auto stump = exact();
  stump.max_depth = 0;
  const auto s = fit_tree(m, g, h, stump);
  CHECK(s.depth() == 0);
  CHECK(s.leaf_count() == 1);
  CHECK(s.nodes[0].weight == 5.0);
}

TEST_CASE("trees match the exhaustive oracle") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto prob = oracle::random_problem(rng);
    TreeParams p;
    p.max_depth = 1 + trial % 5;
    p.lambda = (trial % 3) * 0.5;
    p.min_split_loss = (trial % 4) * 0.1;
    p.min_child_weight = (trial % 2) * 1.0;
    p.max_delta_step = trial % 7 == 0 ? 0.7 : 0.0;
    if (p.lambda == 0.0 && p.min_child_weight == 0.0) p.min_child_weight = 0.1;
    const auto ours = fit_tree(prob.x, prob.g, prob.h, p);
    const auto ref = oracle::fit(prob.x, prob.g, prob.h, p);
    INFO("trial " << trial);
    CHECK(oracle::compare(ours, ref) == "");
    for (const auto& n : ours.nodes) {
      if (!n.is_leaf()) CHECK(n.gain > 0.0);
      CHECK(std::isfinite(n.weight));
    }
    CHECK(ours.depth() <= p.max_depth);
  }
}

TEST_CASE("repeated samples count once per occurrence") {
  Eigen::MatrixXd m(3, 1);
  m << 0, 1, 2;
  const std::vector<double> g{-1, -2, -3}, h{1, 1, 1};
  auto p = exact();
  p.max_depth = 0;
  const std::vector<int> samples{2, 2, 0};
  const SortedColumns sorted(m, samples);
  const auto f = fit_tree(m, samples, sorted, g, h, p);
  CHECK(f.tree.nodes[0].weight == Approx(7.0 / 3.0));
  CHECK(f.leaf_of_sample == std::vector<int>{0, 0, 0});
}
