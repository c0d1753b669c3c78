#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "demandcast/eval.hpp"
#include "demandcast/features.hpp"
#include "demandcast/ingest.hpp"
#include "demandcast/serialize.hpp"

namespace demandcast {

/// Runs `body`, prefixing any DataError or std::invalid_argument message with the stage name.
/// Other exceptions become std::runtime_error with the same prefix.
template <typename F>
auto run_stage(const std::string& stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const DataError& e) {
    throw DataError(stage + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(stage + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(stage + ": " + e.what());
  }
}

struct DataSet {
  SalesPanel sales;
  Catalog catalog;
  CovariateTable covariates;
};

/// Loads and cross-validates the three inputs; `covariates` may be empty.
DataSet load_dataset(const std::filesystem::path& sales, const std::filesystem::path& catalog,
                     const std::filesystem::path& covariates = {});

/// Panels derived from the raw sales. Targets use the two-sided fake-zero rule; features, ES
/// histories and seasonality use the trailing rule so nothing at week t depends on later weeks.
struct PreparedData {
  SalesPanel targets;
  SalesPanel history;
  SmoothedPanel smoothed;
};
PreparedData prepare(const SalesPanel& raw, const RunConfig& config);

SplitRanges split_for(const SalesPanel& panel, const RunConfig& config);

/// Rows whose target week falls in `targets` (eligibility as in build_matrix, train mode).
FeatureMatrix rows_for_targets(const PreparedData& prepared, const DataSet& data, const ModelBundle& bundle,
                               const WeekRange& targets);

/// Fits seasonality and encoders on the training weeks and trains the configured model with
/// early stopping on the validation weeks.
ModelBundle fit_bundle(const DataSet& data, const PreparedData& prepared, const RunConfig& config,
                       const SplitRanges& split);

/// Forecasts for the given rows. Rows must come from rows_for_targets or build_matrix with the
/// bundle's encoder and seasonality.
Eigen::VectorXd forecast_rows(const ModelBundle& bundle, const PreparedData& prepared, const DataSet& data,
                              const FeatureMatrix& rows);

/// Forecasts `horizon` weeks past the last panel week for every product listed in that week.
std::vector<KeyedValue> forecast_ahead(const ModelBundle& bundle, const DataSet& data);

struct PipelineResult {
  ModelBundle bundle;
  FeatureMatrix test_rows;  // after the cold-start filter
  std::vector<KeyedValue> predictions;
  std::vector<KeyedValue> baseline;
  std::vector<KeyedValue> actuals;
  std::vector<bool> baseline_fallback;
  std::vector<NamedReport> reports;  // the configured model, then "es" unless the model is ES
  std::map<ProductId, Segment> segments;
};

/// preprocess -> seasonal -> features -> train -> predict -> evaluate on the test weeks.
PipelineResult run_pipeline(const DataSet& data, const RunConfig& config);

/// Hyperparameters, data sizes and training outcome as JSON. Contains no timestamps.
std::string run_manifest(const ModelBundle& bundle, const std::vector<std::pair<std::string, std::string>>& extra = {});

// product_id,week,forecast
void write_predictions(const std::filesystem::path& path, std::span<const KeyedValue> predictions);
// product_id,week,actual
void write_actuals(const std::filesystem::path& path, std::span<const KeyedValue> actuals);
/// Reads either file above (the value column is the third one).
std::vector<KeyedValue> read_keyed_values(const std::filesystem::path& path);

}  // namespace demandcast
