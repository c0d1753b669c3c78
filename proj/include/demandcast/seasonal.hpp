#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "demandcast/core.hpp"
#include "demandcast/preprocess.hpp"

namespace demandcast {

/// Rescales one year of sales so the listed weeks sum to N/tau, N being the number of listed weeks.
/// Unlisted positions come back as NaN. Throws std::invalid_argument when no listed week sells.
template <typename Derived, typename MaskDerived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> standardize_year(const Eigen::MatrixBase<Derived>& x_year,
                                                                           const Eigen::DenseBase<MaskDerived>& on_sale,
                                                                           int tau = -1) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index len = x_year.size();
  if (on_sale.size() != len) throw std::invalid_argument("standardize_year: mask length mismatch");
  if (tau < 0) tau = static_cast<int>(len);
  Scalar total = 0;
  int listed = 0;
  for (Eigen::Index t = 0; t < len; ++t) {
    if (!on_sale(t)) continue;
    total += x_year(t);
    ++listed;
  }
  if (listed == 0 || !(total > Scalar(0))) {
    throw std::invalid_argument("standardize_year: no listed sales, normalization undefined");
  }
  const Scalar share = Scalar(listed) / Scalar(tau);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(len);
  for (Eigen::Index t = 0; t < len; ++t) {
    out(t) = on_sale(t) ? share * (x_year(t) / total) : std::numeric_limits<Scalar>::quiet_NaN();
  }
  return out;
}

/// Product-years with fewer listed weeks are left out of the category curves.
inline constexpr int kMinListedWeeksPerYear = 4;

struct CategoryCurves {
  std::map<CategoryId, Eigen::VectorXd> curve;
  std::map<CategoryId, Eigen::VectorXd> variance;
};

/// Mean and sample variance of standardized product-year values at each seasonal position,
/// per category, using weeks [0, end_week) (whole panel when end_week < 0). Unobserved
/// positions are filled by circular linear interpolation.
CategoryCurves category_seasonality(const SmoothedPanel& smoothed, const Catalog& catalog, int tau, Week end_week = -1);

struct ClusterResult {
  RealMatrix patterns;          // k x tau, each row has mean 1/tau
  std::vector<int> assignment;  // per input row
};

/// Weighted k-means over curves (rows). Rows are first rescaled to mean 1/tau; row c weighs
/// 1 / (1 + mean variance_c) in the centroid updates. Seeded k-means++ with restarts, lowest
/// weighted inertia wins. Throws std::invalid_argument when k exceeds the row count.
ClusterResult cluster_seasonalities(const RealMatrix& curves, const RealMatrix& variances, int k, std::uint64_t seed);

struct SeasonalityModel {
  int tau = 52;
  std::map<CategoryId, Eigen::VectorXd> category_curve;
  std::map<CategoryId, Eigen::VectorXd> category_variance;
  RealMatrix patterns;
  std::map<CategoryId, int> assignment;
  Eigen::VectorXd global_pattern;

  /// Pattern of a category's cluster, or the global pattern for unseen categories.
  [[nodiscard]] Eigen::VectorXd pattern_for(const CategoryId& category) const;
  [[nodiscard]] double value_at(const CategoryId& category, Week week) const;
};

/// category_seasonality followed by clustering. k is capped at the number of categories with a curve.
SeasonalityModel fit_seasonality(const SmoothedPanel& smoothed, const Catalog& catalog, int tau, int k,
                                 std::uint64_t seed, Week end_week = -1);

/// Seasonality of a product through its category; works for products with no sales history.
Eigen::VectorXd product_seasonality(const ProductId& product, const Catalog& catalog, const SeasonalityModel& model);

inline constexpr int kAnnualTrendWeeks = 52;
inline constexpr int kLocalTrendWeeks = 8;

struct TrendFeatures {
  double annual_slope = 0.0;  // fraction of mean level per week
  double local_slope = 0.0;
};

/// Level-normalized OLS slopes of x over the listed weeks in [t-52, t] (needs 8 points) and
/// [t-8, t] (needs 3 points).
TrendFeatures trend_features(const SmoothedPanel& smoothed, Eigen::Index row, Week t);

// category_id,pattern_index,week_of_year,value
void write_seasonality(const std::filesystem::path& path, const SeasonalityModel& model);

}  // namespace demandcast
