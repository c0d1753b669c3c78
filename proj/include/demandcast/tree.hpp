#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "demandcast/params.hpp"

namespace demandcast {

template <typename Scalar>
struct GradPair {
  Scalar g;
  Scalar h;
};

/// First and second derivative of the loss in the raw score F.
///   poisson (log link): loss e^F - y F,   g = e^F - y, h = e^F
///   squared:            loss (F - y)^2/2, g = F - y,   h = 1
template <typename Scalar>
GradPair<Scalar> grad_hess(LossKind loss, Scalar y, Scalar raw) {
  if (!std::isfinite(y) || !std::isfinite(raw)) throw std::invalid_argument("grad_hess: non-finite input");
  if (loss == LossKind::poisson) {
    if (y < Scalar(0)) throw std::invalid_argument("grad_hess: poisson target must be >= 0");
    const Scalar mu = std::exp(raw);
    return {mu - y, mu};
  }
  return {raw - y, Scalar(1)};
}

/// Pointwise loss in the raw score, without terms that do not depend on F.
template <typename Scalar>
Scalar loss_value(LossKind loss, Scalar y, Scalar raw) {
  if (loss == LossKind::poisson) return std::exp(raw) - y * raw;
  const Scalar d = raw - y;
  return Scalar(0.5) * d * d;
}

/// -G / (H + lambda). Throws std::invalid_argument when H + lambda <= 0.
double leaf_weight(double sum_grad, double sum_hess, double lambda);

/// Leaf weight with the optional |w| <= max_delta_step cap applied.
double leaf_weight(double sum_grad, double sum_hess, const TreeParams& params);

/// Structure score gain of a split, before subtracting min_split_loss.
double split_gain(double gl, double hl, double gr, double hr, double lambda);

/// A candidate replaces the incumbent only when its gain is larger by more than this relative margin,
/// so near-equal candidates keep the earliest one in (feature, threshold, missing-left) order.
inline constexpr double kGainTieTolerance = 1e-10;
bool improves_on(double candidate, double incumbent);

struct SplitCandidate {
  double threshold = 0.0;  // rows with value < threshold go left
  double gain = 0.0;       // net of min_split_loss, always > 0
  bool default_left = true;
  double grad_left = 0.0, hess_left = 0.0;
  double grad_right = 0.0, hess_right = 0.0;
};

/// Best split of one feature column. Thresholds are midpoints between consecutive distinct
/// non-missing values; missing values (NaN) are tried on the left, then on the right. Both children
/// must carry at least min_child_weight hessian. Returns nothing when no split has positive gain.
std::optional<SplitCandidate> best_split(std::span<const double> values, std::span<const double> grad,
                                         std::span<const double> hess, const TreeParams& params);

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  bool default_left = true;
  int left = -1;
  int right = -1;
  double weight = 0.0;
  double gain = 0.0;

  [[nodiscard]] bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Binary regression tree stored as a flat node array; node 0 is the root.
struct Tree {
  std::vector<TreeNode> nodes;

  template <typename Row>
  [[nodiscard]] int leaf_index(const Eigen::DenseBase<Row>& x) const {
    int id = 0;
    while (!nodes[id].is_leaf()) {
      const auto& n = nodes[id];
      const double v = x(n.feature);
      const bool left = std::isnan(v) ? n.default_left : v < n.threshold;
      id = left ? n.left : n.right;
    }
    return id;
  }

  template <typename Row>
  [[nodiscard]] double predict(const Eigen::DenseBase<Row>& x) const {
    return nodes[leaf_index(x)].weight;
  }

  [[nodiscard]] int depth() const;
  [[nodiscard]] int leaf_count() const;

  friend bool operator==(const Tree&, const Tree&) = default;
};

/// Column orderings of a design matrix, computed once and reused for every tree grown on it.
/// Each column lists row indices by ascending value with missing rows last.
struct SortedColumns {
  std::vector<std::vector<int>> order;
  std::vector<int> non_missing;

  explicit SortedColumns(const Eigen::MatrixXd& x);
  SortedColumns(const Eigen::MatrixXd& x, std::span<const int> rows);
};

/// Chooses the candidate features at each node (ascending indices). Null means all features.
using FeatureSampler = std::function<std::vector<int>(int n_features)>;

struct FittedTree {
  Tree tree;
  std::vector<int> leaf_of_sample;  // node id per sample position
};

/// Grows one tree depth-first by exact greedy search. `samples` lists row indices of `x` (repeats
/// allowed, as in a bootstrap draw); `grad`/`hess` are indexed by row of `x`. The sorted orders must
/// have been built for the same sample list.
FittedTree fit_tree(const Eigen::MatrixXd& x, std::span<const int> samples, const SortedColumns& sorted,
                    std::span<const double> grad, std::span<const double> hess, const TreeParams& params,
                    const FeatureSampler& sampler = {});

/// Convenience overload over all rows of `x`.
Tree fit_tree(const Eigen::MatrixXd& x, std::span<const double> grad, std::span<const double> hess,
              const TreeParams& params);

}  // namespace demandcast
