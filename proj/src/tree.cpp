#include "demandcast/tree.hpp"

#include <algorithm>
#include <numeric>

namespace demandcast {

double leaf_weight(double sum_grad, double sum_hess, double lambda) {
  const double denom = sum_hess + lambda;
  if (!(denom > 0.0)) throw std::invalid_argument("leaf_weight: H + lambda must be > 0");
  return -sum_grad / denom;
}

double leaf_weight(double sum_grad, double sum_hess, const TreeParams& params) {
  double w = leaf_weight(sum_grad, sum_hess, params.lambda);
  if (params.max_delta_step > 0.0) w = std::clamp(w, -params.max_delta_step, params.max_delta_step);
  return w;
}

double split_gain(double gl, double hl, double gr, double hr, double lambda) {
  const double g = gl + gr;
  const double h = hl + hr;
  return 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda));
}

bool improves_on(double candidate, double incumbent) {
  return candidate > incumbent + kGainTieTolerance * std::max(1.0, std::abs(incumbent));
}

namespace {

double midpoint(double a, double b) {
  const double mid = 0.5 * (a + b);
  return mid > a ? mid : b;
}

/// Scans `count` entries in sorted order, the first `non_missing` of them ascending by value and the
/// rest missing. Node totals are passed in so every feature sees the same G and H.
template <typename ValueAt, typename GradAt, typename HessAt>
std::optional<SplitCandidate> scan_sorted(int count, int non_missing, ValueAt value, GradAt grad, HessAt hess,
                                          double total_g, double total_h, const TreeParams& p) {
  double miss_g = 0.0, miss_h = 0.0;
  for (int k = non_missing; k < count; ++k) {
    miss_g += grad(k);
    miss_h += hess(k);
  }
  const bool has_missing = non_missing < count;
  std::optional<SplitCandidate> best;
  auto consider = [&](double threshold, bool default_left, double gl, double hl) {
    const double gr = total_g - gl;
    const double hr = total_h - hl;
    if (hl < p.min_child_weight || hr < p.min_child_weight) return;
    const double gain = split_gain(gl, hl, gr, hr, p.lambda) - p.min_split_loss;
    if (best && !improves_on(gain, best->gain)) return;
    best = SplitCandidate{threshold, gain, default_left, gl, hl, gr, hr};
  };
  double gl = 0.0, hl = 0.0;
  for (int k = 0; k + 1 < non_missing; ++k) {
    gl += grad(k);
    hl += hess(k);
    const double a = value(k);
    const double b = value(k + 1);
    if (!(a < b)) continue;
    const double thr = midpoint(a, b);
    consider(thr, true, gl + miss_g, hl + miss_h);
    if (has_missing) consider(thr, false, gl, hl);
  }
  if (best && !(best->gain > 0.0)) best.reset();
  return best;
}

}  // namespace

std::optional<SplitCandidate> best_split(std::span<const double> values, std::span<const double> grad,
                                         std::span<const double> hess, const TreeParams& params) {
  if (values.size() != grad.size() || values.size() != hess.size()) {
    throw std::invalid_argument("best_split: length mismatch");
  }
  const int n = static_cast<int>(values.size());
  if (n < 2) return std::nullopt;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const bool ma = std::isnan(values[a]), mb = std::isnan(values[b]);
    if (ma || mb) return !ma && mb;
    return values[a] < values[b];
  });
  const int non_missing =
      static_cast<int>(std::count_if(values.begin(), values.end(), [](double v) { return !std::isnan(v); }));
  double g = 0.0, h = 0.0;
  for (int k = 0; k < n; ++k) {
    g += grad[order[k]];
    h += hess[order[k]];
  }
  return scan_sorted(
      n, non_missing, [&](int k) { return values[order[k]]; }, [&](int k) { return grad[order[k]]; },
      [&](int k) { return hess[order[k]]; }, g, h, params);
}

int Tree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf()) continue;
    d[nodes[i].left] = d[nodes[i].right] = d[i] + 1;
    best = std::max(best, d[i] + 1);
  }
  return best;
}

int Tree::leaf_count() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

namespace {

void sort_positions(const Eigen::MatrixXd& x, std::span<const int> rows, int f, std::vector<int>& order, int& non_missing) {
  order.resize(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double va = x(rows[a], f), vb = x(rows[b], f);
    const bool ma = std::isnan(va), mb = std::isnan(vb);
    if (ma || mb) return !ma && mb;
    return va < vb;
  });
  non_missing = 0;
  for (int r : rows) non_missing += std::isnan(x(r, f)) ? 0 : 1;
}

}  // namespace

SortedColumns::SortedColumns(const Eigen::MatrixXd& x) {
  std::vector<int> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  *this = SortedColumns(x, rows);
}

SortedColumns::SortedColumns(const Eigen::MatrixXd& x, std::span<const int> rows) {
  const auto p = static_cast<int>(x.cols());
  order.resize(p);
  non_missing.resize(p);
  for (int f = 0; f < p; ++f) sort_positions(x, rows, f, order[f], non_missing[f]);
}

namespace {

class TreeGrower {
 public:
  TreeGrower(const Eigen::MatrixXd& x, std::span<const int> samples, const SortedColumns& sorted,
             std::span<const double> grad, std::span<const double> hess, const TreeParams& params,
             const FeatureSampler& sampler)
      : x_(x), samples_(samples), params_(params), sampler_(sampler), work_(sorted.order) {
    const auto n = samples.size();
    g_.resize(n);
    h_.resize(n);
    for (std::size_t s = 0; s < n; ++s) {
      g_[s] = grad[samples[s]];
      h_[s] = hess[samples[s]];
    }
    members_.resize(n);
    std::iota(members_.begin(), members_.end(), 0);
    go_left_.assign(n, 0);
    scratch_.reserve(n);
    result_.leaf_of_sample.assign(n, 0);
    n_features_ = static_cast<int>(x.cols());
  }

  FittedTree grow() {
    grow_node(0, static_cast<int>(members_.size()), 0);
    return std::move(result_);
  }

 private:
  double value(int position, int feature) const { return x_(samples_[position], feature); }

  int grow_node(int begin, int end, int depth) {
    const int id = static_cast<int>(result_.tree.nodes.size());
    result_.tree.nodes.emplace_back();
    double g = 0.0, h = 0.0;
    for (int k = begin; k < end; ++k) {
      g += g_[members_[k]];
      h += h_[members_[k]];
    }

    std::optional<SplitCandidate> best;
    int best_feature = -1;
    if (depth < params_.max_depth && end - begin >= 2 && n_features_ > 0) {
      std::vector<int> features;
      if (sampler_) {
        features = sampler_(n_features_);
      } else {
        features.resize(n_features_);
        std::iota(features.begin(), features.end(), 0);
      }
      for (int f : features) {
        const auto& ord = work_[f];
        int non_missing = 0;
        for (int k = begin; k < end && !std::isnan(value(ord[k], f)); ++k) ++non_missing;
        auto cand = scan_sorted(
            end - begin, non_missing, [&](int k) { return value(ord[begin + k], f); },
            [&](int k) { return g_[ord[begin + k]]; }, [&](int k) { return h_[ord[begin + k]]; }, g, h, params_);
        if (cand && (!best || improves_on(cand->gain, best->gain))) {
          best = cand;
          best_feature = f;
        }
      }
    }

    if (!best) {
      result_.tree.nodes[id].weight = leaf_weight(g, h, params_);
      for (int k = begin; k < end; ++k) result_.leaf_of_sample[members_[k]] = id;
      return id;
    }

    for (int k = begin; k < end; ++k) {
      const int pos = members_[k];
      const double v = value(pos, best_feature);
      go_left_[pos] = std::isnan(v) ? best->default_left : v < best->threshold;
    }
    const int mid = partition(members_, begin, end);
    for (auto& ord : work_) partition(ord, begin, end);

    auto& node = result_.tree.nodes[id];
    node.feature = best_feature;
    node.threshold = best->threshold;
    node.default_left = best->default_left;
    node.gain = best->gain;
    node.weight = leaf_weight(g, h, params_);
    const int left = grow_node(begin, mid, depth + 1);
    const int right = grow_node(mid, end, depth + 1);
    result_.tree.nodes[id].left = left;
    result_.tree.nodes[id].right = right;
    return id;
  }

  /// Stable partition of [begin, end) by go_left_; returns the first right position.
  int partition(std::vector<int>& v, int begin, int end) {
    scratch_.clear();
    int out = begin;
    for (int k = begin; k < end; ++k) {
      if (go_left_[v[k]]) {
        v[out++] = v[k];
      } else {
        scratch_.push_back(v[k]);
      }
    }
    std::copy(scratch_.begin(), scratch_.end(), v.begin() + out);
    return out;
  }

  const Eigen::MatrixXd& x_;
  std::span<const int> samples_;
  const TreeParams& params_;
  const FeatureSampler& sampler_;
  std::vector<std::vector<int>> work_;
  std::vector<double> g_, h_;
  std::vector<int> members_;
  std::vector<char> go_left_;
  std::vector<int> scratch_;
  FittedTree result_;
  int n_features_ = 0;
};

}  // namespace

FittedTree fit_tree(const Eigen::MatrixXd& x, std::span<const int> samples, const SortedColumns& sorted,
                    std::span<const double> grad, std::span<const double> hess, const TreeParams& params,
                    const FeatureSampler& sampler) {
  if (samples.empty()) throw std::invalid_argument("fit_tree: no samples");
  if (static_cast<Eigen::Index>(sorted.order.size()) != x.cols()) {
    throw std::invalid_argument("fit_tree: sorted columns do not match the matrix");
  }
  return TreeGrower(x, samples, sorted, grad, hess, params, sampler).grow();
}

Tree fit_tree(const Eigen::MatrixXd& x, std::span<const double> grad, std::span<const double> hess,
              const TreeParams& params) {
  std::vector<int> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  const SortedColumns sorted(x, rows);
  return fit_tree(x, rows, sorted, grad, hess, params).tree;
}

}  // namespace demandcast
