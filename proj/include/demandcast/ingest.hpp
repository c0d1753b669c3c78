#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "demandcast/core.hpp"
#include "demandcast/params.hpp"

namespace demandcast {

enum class Encoding { ordinal, hashing };
enum class ModelKind { gbt, forest, es };

std::string_view to_string(Encoding e);
std::string_view to_string(ModelKind m);
Encoding parse_encoding(std::string_view text);
ModelKind parse_model_kind(std::string_view text);

/// Everything a run needs besides the data files.
struct RunConfig {
  int horizon = 6;
  int smoothing_window = 8;
  double cap_multiplier = 3.0;
  int season_period = 52;
  int clusters = 8;
  int hash_buckets = 64;
  Encoding encoding = Encoding::ordinal;
  bool with_seasonality = true;
  ModelKind model = ModelKind::gbt;

  BoostParams boost{LossKind::poisson, 0.1, 1000, 50, TreeParams{6, 1.0, 0.05, 1.0, 0.7}};
  ForestParams forest;

  int train_weeks = 170;
  int valid_weeks = 10;
  int test_weeks = 19;

  int cold_start_filter = 0;
  double segment_a = 0.1;
  double segment_b = 0.4;

  std::uint64_t seed = 42;
  bool allow_out_of_range = false;
};

/// Throws std::invalid_argument when a value is outside its legal domain, or outside the
/// boosting search ranges while `allow_out_of_range` is false.
void validate(const RunConfig& config);

/// Parses `key = value` lines (`#` starts a comment). Unset keys keep their defaults.
RunConfig parse_config(std::string_view text, const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);
/// Inverse of parse_config, one key per line in a fixed order.
std::string format_config(const RunConfig& config);

struct TemporalCovariate {
  bool known_future = false;
  std::map<Week, double> values;

  friend bool operator==(const TemporalCovariate&, const TemporalCovariate&) = default;
};

struct MixedCovariate {
  bool known_future = false;
  std::map<ProductId, std::map<Week, double>> values;

  friend bool operator==(const MixedCovariate&, const MixedCovariate&) = default;
};

/// Covariates that vary with time: shared across products (temporal) or per product (mixed).
struct CovariateTable {
  std::map<std::string, TemporalCovariate> temporal;
  std::map<std::string, MixedCovariate> mixed;

  /// Throws DataError if a mixed entry names an unknown product or a week outside the panel.
  void check_against(const SalesPanel& panel) const;

  friend bool operator==(const CovariateTable&, const CovariateTable&) = default;
};

// sales.csv: product_id,week,units,on_sale,in_stock
SalesPanel load_sales(const std::filesystem::path& path);
// catalog.csv: product_id,category_id,price[,attribute...]
Catalog load_catalog(const std::filesystem::path& path);
// covariates.csv: scope,key,week,product_id,value,predictable
CovariateTable load_covariates(const std::filesystem::path& path);

void write_sales(const std::filesystem::path& path, const SalesPanel& panel);
void write_catalog(const std::filesystem::path& path, const Catalog& catalog);
void write_covariates(const std::filesystem::path& path, const CovariateTable& table);

}  // namespace demandcast
