#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "demandcast/core.hpp"
#include "demandcast/ingest.hpp"
#include "demandcast/preprocess.hpp"
#include "demandcast/seasonal.hpp"

namespace demandcast {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

/// Sorted distinct values -> 0..n-1. Values not seen at fit time encode to n.
struct OrdinalMap {
  std::map<std::string, int> ids;

  [[nodiscard]] int size() const { return static_cast<int>(ids.size()); }
  [[nodiscard]] int encode(const std::string& value) const;

  friend bool operator==(const OrdinalMap&, const OrdinalMap&) = default;
};

OrdinalMap ordinal_encode(std::span<const std::string> values);

/// 64-bit FNV-1a over the bytes of `value`.
std::uint64_t fnv1a64(std::string_view value);
/// fnv1a64(value) mod buckets. Throws std::invalid_argument for buckets < 2.
int hash_encode(std::string_view value, int buckets);

/// Encodes the longitudinal (per-product) columns: the category and every catalog attribute.
/// Attributes whose values all parse as numbers pass through as numbers; the rest are categorical.
class FeatureEncoder {
 public:
  struct Column {
    std::string name;       // "category" or the attribute name
    bool numeric = false;
    OrdinalMap ordinal;     // used in ordinal mode for categorical columns

    friend bool operator==(const Column&, const Column&) = default;
  };

  FeatureEncoder() = default;
  FeatureEncoder(const Catalog& catalog, Encoding mode, int buckets);
  FeatureEncoder(Encoding mode, int buckets, std::vector<Column> columns);

  [[nodiscard]] Encoding mode() const { return mode_; }
  [[nodiscard]] int buckets() const { return buckets_; }
  [[nodiscard]] const std::vector<Column>& columns() const { return columns_; }
  [[nodiscard]] std::vector<std::string> column_names() const;
  /// One value per column; products absent from the catalog encode as missing.
  [[nodiscard]] std::vector<double> encode(const Catalog& catalog, const ProductId& product) const;

  friend bool operator==(const FeatureEncoder&, const FeatureEncoder&) = default;

 private:
  Encoding mode_ = Encoding::ordinal;
  int buckets_ = 64;
  std::vector<Column> columns_;
};

/// Column names for the covariates of a table: "temporal:<key>" then "mixed:<key>".
std::vector<std::string> covariate_columns(const CovariateTable& table);

/// Covariate values at `target` as seen from `observed_through`. Known-future covariates pass
/// through. Unpredictable temporal ones take the mean of observed values (weeks <= observed_through)
/// at the same position modulo tau; unpredictable mixed ones the mean of the product's observed
/// values. Anything without data is kMissing. Keyed as in covariate_columns.
std::map<std::string, double> impute_future_covariates(const CovariateTable& table, const ProductId& product,
                                                       Week target, Week observed_through, int tau);

/// Model input: one row per (product, origin) with the target `horizon` weeks later.
struct FeatureMatrix {
  std::vector<std::string> columns;
  std::vector<RowKey> keys;
  Eigen::MatrixXd values;          // rows x columns, kMissing marks absent cells
  Eigen::VectorXd targets;         // empty for prediction rows
  std::vector<int> life_at_target; // listed weeks in [0, target]
  Eigen::VectorXd prices;

  [[nodiscard]] Eigen::Index rows() const { return values.rows(); }
  [[nodiscard]] bool has_targets() const { return targets.size() == values.rows() && values.rows() > 0; }
  [[nodiscard]] FeatureMatrix subset(std::span<const Eigen::Index> rows) const;
};

enum class BuildMode { train, predict };

struct FeatureOptions {
  int horizon = 6;
  int tau = 52;
  int lags = 8;
};

inline constexpr int kDefaultLags = 8;

/// Assembles the global design matrix.
///
/// train: one row per product and origin t in [t_begin, t_end] with t + horizon inside the panel
/// and the product listed at both t and t + horizon; the target is the repaired sale at t + horizon.
/// predict: one row per product listed at t_end, without targets.
///
/// Features only read weeks <= t, plus known-future covariates at the target week. Passing a null
/// `seasonal` drops the seasonality columns.
FeatureMatrix build_matrix(const SalesPanel& repaired, const SmoothedPanel& smoothed, const Catalog& catalog,
                           const SeasonalityModel* seasonal, const CovariateTable& covariates,
                           const FeatureEncoder& encoder, const FeatureOptions& options, Week t_end, BuildMode mode,
                           Week t_begin = 0);

// product_id,origin,target,<columns...>[,target_units]
void write_features(const std::filesystem::path& path, const FeatureMatrix& matrix);

}  // namespace demandcast
