#include "demandcast/seasonal.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include "demandcast/csv.hpp"

namespace demandcast {

namespace {

/// Fills NaN entries by linear interpolation between the nearest observed neighbours, wrapping
/// around the ends.
void fill_circular(Eigen::VectorXd& v) {
  const auto n = static_cast<int>(v.size());
  std::vector<int> observed;
  for (int p = 0; p < n; ++p) {
    if (!std::isnan(v(p))) observed.push_back(p);
  }
  if (observed.empty() || static_cast<int>(observed.size()) == n) return;
  if (observed.size() == 1) {
    v.setConstant(v(observed.front()));
    return;
  }
  for (std::size_t j = 0; j < observed.size(); ++j) {
    const int a = observed[j];
    const int b = observed[(j + 1) % observed.size()];
    const int gap = (b - a + n) % n;
    for (int d = 1; d < gap; ++d) {
      const double frac = static_cast<double>(d) / gap;
      v((a + d) % n) = v(a) + (v(b) - v(a)) * frac;
    }
  }
}

Eigen::VectorXd normalized(const Eigen::Ref<const Eigen::VectorXd>& curve) {
  const double m = curve.mean();
  const double target = 1.0 / static_cast<double>(curve.size());
  if (!(m > 0.0)) return Eigen::VectorXd::Constant(curve.size(), target);
  return curve * (target / m);
}

struct Welford {
  int n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double v) {
    ++n;
    const double d = v - mean;
    mean += d / n;
    m2 += d * (v - mean);
  }
};

}  // namespace

CategoryCurves category_seasonality(const SmoothedPanel& smoothed, const Catalog& catalog, int tau, Week end_week) {
  if (tau < 2) throw std::invalid_argument("category_seasonality: tau must be >= 2");
  const Week end = end_week < 0 ? smoothed.weeks() : std::min(end_week, smoothed.weeks());
  std::map<CategoryId, std::vector<Welford>> stats;
  for (Eigen::Index i = 0; i < smoothed.size(); ++i) {
    const auto& cat = catalog.category_of(smoothed.products[i]);
    for (Week start = 0; start < end; start += tau) {
      const Week len = std::min(tau, end - start);
      const auto x = smoothed.x.row(i).segment(start, len);
      const auto listed = smoothed.on_sale.row(i).segment(start, len);
      if (listed.count() < kMinListedWeeksPerYear || !(x.sum() > 0.0)) continue;
      const Eigen::VectorXd std_year = standardize_year(x.transpose(), listed.transpose(), tau);
      auto& acc = stats[cat];
      if (acc.empty()) acc.resize(tau);
      for (Week p = 0; p < len; ++p) {
        if (listed(p)) acc[p].add(std_year(p));
      }
    }
  }
  CategoryCurves out;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& [cat, acc] : stats) {
    Eigen::VectorXd curve = Eigen::VectorXd::Constant(tau, nan);
    Eigen::VectorXd var = Eigen::VectorXd::Constant(tau, nan);
    for (int p = 0; p < tau; ++p) {
      if (acc[p].n == 0) continue;
      curve(p) = acc[p].mean;
      var(p) = acc[p].n > 1 ? acc[p].m2 / (acc[p].n - 1) : 0.0;
    }
    fill_circular(curve);
    fill_circular(var);
    out.curve.emplace(cat, std::move(curve));
    out.variance.emplace(cat, std::move(var));
  }
  return out;
}

namespace {

struct KMeansRun {
  RealMatrix centroids;
  std::vector<int> assignment;
  double inertia = 0.0;
};

KMeansRun kmeans_once(const RealMatrix& points, const Eigen::VectorXd& weights, int k, std::mt19937_64& rng) {
  const auto n = points.rows();
  const auto dim = points.cols();
  const double target = 1.0 / static_cast<double>(dim);
  KMeansRun run;
  run.centroids.resize(k, dim);

  // k-means++ seeding
  std::vector<bool> chosen(n, false);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  Eigen::Index first = pick(rng);
  run.centroids.row(0) = points.row(first);
  chosen[first] = true;
  Eigen::VectorXd d2(n);
  for (int c = 1; c < k; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < c; ++j) best = std::min(best, (points.row(i) - run.centroids.row(j)).squaredNorm());
      d2(i) = best;
    }
    const double total = d2.sum();
    Eigen::Index next = -1;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng);
      for (Eigen::Index i = 0; i < n; ++i) {
        r -= d2(i);
        if (r <= 0.0 && d2(i) > 0.0) {
          next = i;
          break;
        }
      }
      if (next < 0) {
        for (Eigen::Index i = n - 1; i >= 0; --i) {
          if (d2(i) > 0.0) {
            next = i;
            break;
          }
        }
      }
    } else {
      for (Eigen::Index i = 0; i < n && next < 0; ++i) {
        if (!chosen[i]) next = i;
      }
      if (next < 0) next = 0;
    }
    chosen[next] = true;
    run.centroids.row(c) = points.row(next);
  }

  run.assignment.assign(n, -1);
  Eigen::VectorXd dist(n);
  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (points.row(i) - run.centroids.row(0)).squaredNorm();
      for (int j = 1; j < k; ++j) {
        const double d = (points.row(i) - run.centroids.row(j)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      dist(i) = best_d;
      if (run.assignment[i] != best) {
        run.assignment[i] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    RealMatrix sums = RealMatrix::Zero(k, dim);
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(run.assignment[i]) += weights(i) * points.row(i);
      mass(run.assignment[i]) += weights(i);
    }
    for (int j = 0; j < k; ++j) {
      if (mass(j) > 0.0) {
        run.centroids.row(j) = sums.row(j) / mass(j);
      } else {
        // Re-seed from the point farthest from its centroid.
        Eigen::Index far = 0;
        for (Eigen::Index i = 1; i < n; ++i) {
          if (dist(i) > dist(far)) far = i;
        }
        run.centroids.row(j) = points.row(far);
        dist(far) = 0.0;
      }
      const double m = run.centroids.row(j).mean();
      if (m > 0.0) run.centroids.row(j) *= target / m;
    }
  }

  run.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    run.inertia += weights(i) * (points.row(i) - run.centroids.row(run.assignment[i])).squaredNorm();
  }
  return run;
}

}  // namespace

ClusterResult cluster_seasonalities(const RealMatrix& curves, const RealMatrix& variances, int k, std::uint64_t seed) {
  const auto n = curves.rows();
  if (k < 1) throw std::invalid_argument("cluster_seasonalities: k must be >= 1");
  if (k > n) {
    throw std::invalid_argument("cluster_seasonalities: k = " + std::to_string(k) + " exceeds the " +
                                std::to_string(n) + " available curves");
  }
  if (variances.rows() != n || variances.cols() != curves.cols()) {
    throw std::invalid_argument("cluster_seasonalities: variance shape mismatch");
  }
  RealMatrix points(n, curves.cols());
  Eigen::VectorXd weights(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    points.row(i) = normalized(curves.row(i).transpose()).transpose();
    weights(i) = 1.0 / (1.0 + variances.row(i).mean());
  }

  constexpr int kRestarts = 10;
  std::mt19937_64 rng(seed);
  KMeansRun best;
  for (int r = 0; r < kRestarts; ++r) {
    auto run = kmeans_once(points, weights, k, rng);
    if (r == 0 || run.inertia < best.inertia) best = std::move(run);
    if (k == 1) break;
  }
  return {std::move(best.centroids), std::move(best.assignment)};
}

Eigen::VectorXd SeasonalityModel::pattern_for(const CategoryId& category) const {
  auto it = assignment.find(category);
  if (it == assignment.end()) return global_pattern;
  return patterns.row(it->second).transpose();
}

double SeasonalityModel::value_at(const CategoryId& category, Week week) const {
  const int p = ((week % tau) + tau) % tau;
  auto it = assignment.find(category);
  if (it == assignment.end()) return global_pattern(p);
  return patterns(it->second, p);
}

SeasonalityModel fit_seasonality(const SmoothedPanel& smoothed, const Catalog& catalog, int tau, int k,
                                 std::uint64_t seed, Week end_week) {
  auto curves = category_seasonality(smoothed, catalog, tau, end_week);
  SeasonalityModel model;
  model.tau = tau;
  model.global_pattern = Eigen::VectorXd::Constant(tau, 1.0 / tau);
  if (curves.curve.empty()) {
    model.patterns = model.global_pattern.transpose();
    return model;
  }
  const auto n = static_cast<Eigen::Index>(curves.curve.size());
  RealMatrix c(n, tau), v(n, tau);
  std::vector<CategoryId> ids;
  Eigen::Index i = 0;
  for (const auto& [cat, curve] : curves.curve) {
    c.row(i) = curve.transpose();
    v.row(i) = curves.variance.at(cat).transpose();
    ids.push_back(cat);
    ++i;
  }
  const int clusters = std::min<int>(k, static_cast<int>(n));
  auto result = cluster_seasonalities(c, v, clusters, seed);
  model.patterns = std::move(result.patterns);
  for (std::size_t j = 0; j < ids.size(); ++j) model.assignment[ids[j]] = result.assignment[j];

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(tau);
  double mass = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const double w = 1.0 / (1.0 + v.row(r).mean());
    acc += w * normalized(c.row(r).transpose());
    mass += w;
  }
  model.global_pattern = normalized(acc / mass);
  model.category_curve = std::move(curves.curve);
  model.category_variance = std::move(curves.variance);
  return model;
}

Eigen::VectorXd product_seasonality(const ProductId& product, const Catalog& catalog, const SeasonalityModel& model) {
  if (!catalog.contains(product)) return model.global_pattern;
  return model.pattern_for(catalog.category_of(product));
}

namespace {

double normalized_slope(const SmoothedPanel& s, Eigen::Index row, Week from, Week to, int min_points) {
  double sw = 0.0, sx = 0.0;
  int n = 0;
  for (Week w = from; w <= to; ++w) {
    if (!s.on_sale(row, w)) continue;
    sw += w;
    sx += s.x(row, w);
    ++n;
  }
  if (n < min_points || n < 2) return 0.0;
  const double mw = sw / n;
  const double mx = sx / n;
  if (!(mx > 0.0)) return 0.0;
  double cov = 0.0, var = 0.0;
  for (Week w = from; w <= to; ++w) {
    if (!s.on_sale(row, w)) continue;
    cov += (w - mw) * (s.x(row, w) - mx);
    var += (w - mw) * (w - mw);
  }
  return var > 0.0 ? (cov / var) / mx : 0.0;
}

}  // namespace

TrendFeatures trend_features(const SmoothedPanel& smoothed, Eigen::Index row, Week t) {
  if (t < 0 || t >= smoothed.weeks()) throw std::out_of_range("trend_features: week outside the panel");
  TrendFeatures f;
  f.annual_slope = normalized_slope(smoothed, row, std::max(0, t - kAnnualTrendWeeks), t, 8);
  f.local_slope = normalized_slope(smoothed, row, std::max(0, t - kLocalTrendWeeks), t, 3);
  return f;
}

void write_seasonality(const std::filesystem::path& path, const SeasonalityModel& model) {
  std::ofstream out;
  csv::open_for_write(out, path);
  out << "category_id,pattern_index,week_of_year,value\n";
  for (const auto& [cat, idx] : model.assignment) {
    for (int p = 0; p < model.tau; ++p) {
      out << cat << ',' << idx << ',' << p << ',' << csv::format_double(model.patterns(idx, p)) << '\n';
    }
  }
}

}  // namespace demandcast
