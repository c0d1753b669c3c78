#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "demandcast/gbt.hpp"

namespace demandcast {

ForestModel train_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<std::string> feature_names,
                         const ForestParams& params, std::uint64_t seed) {
  if (x.rows() == 0) throw std::invalid_argument("train_forest: empty training matrix");
  if (y.size() != x.rows()) throw std::invalid_argument("train_forest: target length mismatch");
  if (params.n_trees < 1) throw std::invalid_argument("train_forest: n_trees must be >= 1");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y(i))) throw std::invalid_argument("train_forest: non-finite target");
  }

  // Squared loss around a zero score: g = -y, h = 1, so leaves hold the mean target and the
  // gain is the variance reduction.
  const auto n = static_cast<int>(x.rows());
  std::vector<double> grad(n), hess(n, 1.0);
  for (int i = 0; i < n; ++i) grad[i] = -y(i);
  const TreeParams tree_params{params.max_depth, 0.0, 0.0, params.min_leaf, 0.0};

  std::mt19937_64 rng(seed);
  const int p = static_cast<int>(x.cols());
  const int per_split = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(p)))));
  FeatureSampler sampler;
  if (params.feature_subsample && p > 1) {
    sampler = [&rng, per_split](int n_features) {
      std::vector<int> all(n_features);
      std::iota(all.begin(), all.end(), 0);
      const int take = std::min(per_split, n_features);
      for (int k = 0; k < take; ++k) {
        std::uniform_int_distribution<int> pick(k, n_features - 1);
        std::swap(all[k], all[pick(rng)]);
      }
      all.resize(take);
      std::sort(all.begin(), all.end());
      return all;
    };
  }

  ForestModel model;
  model.feature_names = std::move(feature_names);
  std::vector<int> samples(n);
  std::iota(samples.begin(), samples.end(), 0);
  std::optional<SortedColumns> full_sort;
  if (!params.bootstrap) full_sort.emplace(x, samples);
  std::uniform_int_distribution<int> draw(0, n - 1);
  for (int t = 0; t < params.n_trees; ++t) {
    if (params.bootstrap) {
      for (int s = 0; s < n; ++s) samples[s] = draw(rng);
      const SortedColumns sorted(x, samples);
      model.trees.push_back(fit_tree(x, samples, sorted, grad, hess, tree_params, sampler).tree);
    } else {
      model.trees.push_back(fit_tree(x, samples, *full_sort, grad, hess, tree_params, sampler).tree);
    }
  }
  return model;
}

ForestModel train_forest(const FeatureMatrix& train, const ForestParams& params, std::uint64_t seed) {
  if (!train.has_targets()) throw std::invalid_argument("train_forest: training rows carry no targets");
  return train_forest(train.values, train.targets, train.columns, params, seed);
}

}  // namespace demandcast
