#pragma once

#include <algorithm>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "demandcast/core.hpp"

namespace demandcast {

/// Simple exponential smoothing: l_0 = y_0, l_t = alpha y_t + (1 - alpha) l_{t-1}.
/// The forecast function is flat, so the horizon does not change the result.
template <typename Derived>
typename Derived::Scalar es_fit_forecast(const Eigen::MatrixBase<Derived>& series, typename Derived::Scalar alpha,
                                         [[maybe_unused]] int horizon = 1) {
  using Scalar = typename Derived::Scalar;
  if (series.size() == 0) throw std::invalid_argument("es_fit_forecast: empty series");
  if (!(alpha > Scalar(0) && alpha <= Scalar(1))) throw std::invalid_argument("es_fit_forecast: alpha must be in (0, 1]");
  Scalar level = series(0);
  for (Eigen::Index t = 1; t < series.size(); ++t) level = alpha * series(t) + (Scalar(1) - alpha) * level;
  return level;
}

inline constexpr double kDefaultAlpha = 0.3;
inline constexpr int kDefaultHoldout = 4;

/// {0.1, 0.2, ..., 0.9}
std::vector<double> default_alpha_grid();

/// Alpha with the lowest squared one-step error over the trailing `holdout` points; ties go to the
/// smallest alpha. Falls back to kDefaultAlpha when the series is not longer than the holdout.
template <typename Derived>
typename Derived::Scalar es_grid_select(const Eigen::MatrixBase<Derived>& series, std::span<const double> alphas,
                                        int holdout = kDefaultHoldout) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = series.size();
  if (alphas.empty() || holdout < 1 || n <= holdout) return Scalar(kDefaultAlpha);
  Scalar best_alpha = Scalar(kDefaultAlpha);
  Scalar best_sse = std::numeric_limits<Scalar>::infinity();
  std::vector<double> sorted(alphas.begin(), alphas.end());
  std::sort(sorted.begin(), sorted.end());
  for (double a : sorted) {
    const Scalar alpha = static_cast<Scalar>(a);
    // One pass: the level after t points is the forecast for point t.
    Scalar level = series(0);
    Scalar sse = 0;
    for (Eigen::Index t = 1; t < n; ++t) {
      if (t >= n - holdout) {
        const Scalar err = series(t) - level;
        sse += err * err;
      }
      level = alpha * series(t) + (Scalar(1) - alpha) * level;
    }
    if (sse < best_sse) {
      best_sse = sse;
      best_alpha = alpha;
    }
  }
  return best_alpha;
}

struct EsBaselineOptions {
  std::vector<double> alphas = default_alpha_grid();
  int holdout = kDefaultHoldout;
  /// Below this many listed weeks of history the category mean is emitted instead.
  int min_observations = 2;
};

struct EsForecasts {
  Eigen::VectorXd forecast;
  std::vector<bool> used_fallback;
};

/// Per-series ES forecast for each key from the listed weeks up to the key's origin.
/// Short histories get the mean listed-week sales of the product's category up to the origin
/// (the global mean when the category has none yet).
EsForecasts es_baseline(const SalesPanel& panel, const Catalog& catalog, std::span<const RowKey> keys,
                        const EsBaselineOptions& options = {});

}  // namespace demandcast
