#include "demandcast/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "demandcast/baselines.hpp"
#include "demandcast/csv.hpp"
#include "demandcast/preprocess.hpp"

namespace demandcast {

DataSet load_dataset(const std::filesystem::path& sales, const std::filesystem::path& catalog,
                     const std::filesystem::path& covariates) {
  DataSet d;
  d.sales = load_sales(sales);
  d.catalog = load_catalog(catalog);
  d.catalog.check_covers(d.sales);
  if (!covariates.empty()) {
    d.covariates = load_covariates(covariates);
    d.covariates.check_against(d.sales);
  }
  return d;
}

PreparedData prepare(const SalesPanel& raw, const RunConfig& config) {
  PreparedData p;
  p.targets = preprocess(raw, config.smoothing_window, config.cap_multiplier, FakeZeroRule::two_sided).repaired;
  auto causal = preprocess(raw, config.smoothing_window, config.cap_multiplier, FakeZeroRule::trailing);
  p.history = std::move(causal.repaired);
  p.smoothed = std::move(causal.smoothed);
  return p;
}

SplitRanges split_for(const SalesPanel& panel, const RunConfig& config) {
  return temporal_split(panel, SplitSpec{config.train_weeks, config.valid_weeks, config.test_weeks, config.horizon});
}

namespace {

FeatureOptions feature_options(const RunConfig& c) { return FeatureOptions{c.horizon, c.season_period, kDefaultLags}; }

const SeasonalityModel* seasonal_of(const ModelBundle& b) {
  return b.seasonality ? &*b.seasonality : nullptr;
}

}  // namespace

FeatureMatrix rows_for_targets(const PreparedData& prepared, const DataSet& data, const ModelBundle& bundle,
                               const WeekRange& targets) {
  const int h = bundle.config.horizon;
  const Week t_end = targets.end - 1 - h;
  if (t_end < 0) throw std::invalid_argument("target range ends before the first forecastable week");
  return build_matrix(prepared.targets, prepared.smoothed, data.catalog, seasonal_of(bundle), data.covariates,
                      bundle.encoder, feature_options(bundle.config), t_end, BuildMode::train,
                      std::max(0, targets.begin - h));
}

ModelBundle fit_bundle(const DataSet& data, const PreparedData& prepared, const RunConfig& config,
                       const SplitRanges& split) {
  validate(config);
  ModelBundle bundle;
  bundle.config = config;
  if (config.with_seasonality) {
    bundle.seasonality = run_stage("seasonal", [&] {
      return fit_seasonality(prepared.smoothed, data.catalog, config.season_period, config.clusters, config.seed,
                             split.train.end);
    });
  }
  bundle.encoder = FeatureEncoder(data.catalog, config.encoding, config.hash_buckets);
  if (config.model == ModelKind::es) return bundle;

  const auto train_rows = run_stage("features", [&] { return rows_for_targets(prepared, data, bundle, split.train); });
  if (train_rows.rows() == 0) throw DataError("features: no training rows in the training weeks");
  run_stage("train", [&] {
    if (config.model == ModelKind::gbt) {
      const auto valid_rows = rows_for_targets(prepared, data, bundle, split.valid);
      bundle.boosted = train(train_rows, config.boost, &valid_rows);
    } else {
      bundle.forest = train_forest(train_rows, config.forest, config.seed);
    }
    return 0;
  });
  return bundle;
}

Eigen::VectorXd forecast_rows(const ModelBundle& bundle, const PreparedData& prepared, const DataSet& data,
                              const FeatureMatrix& rows) {
  if (bundle.boosted) return predict(*bundle.boosted, rows);
  if (bundle.forest) return predict(*bundle.forest, rows);
  if (bundle.config.model != ModelKind::es) throw std::invalid_argument("model bundle holds no fitted regressor");
  return es_baseline(prepared.history, data.catalog, rows.keys).forecast;
}

std::vector<KeyedValue> forecast_ahead(const ModelBundle& bundle, const DataSet& data) {
  const auto prepared = run_stage("preprocess", [&] { return prepare(data.sales, bundle.config); });
  const Week last = data.sales.weeks() - 1;
  const auto rows = run_stage("features", [&] {
    return build_matrix(prepared.targets, prepared.smoothed, data.catalog, seasonal_of(bundle), data.covariates,
                        bundle.encoder, feature_options(bundle.config), last, BuildMode::predict);
  });
  const auto forecast = run_stage("predict", [&] { return forecast_rows(bundle, prepared, data, rows); });
  std::vector<KeyedValue> out;
  for (Eigen::Index r = 0; r < rows.rows(); ++r) out.push_back({rows.keys[r].product, rows.keys[r].target, forecast(r)});
  return out;
}

namespace {

std::vector<KeyedValue> keyed(const FeatureMatrix& rows, const Eigen::VectorXd& values) {
  std::vector<KeyedValue> out;
  out.reserve(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index r = 0; r < rows.rows(); ++r) out.push_back({rows.keys[r].product, rows.keys[r].target, values(r)});
  return out;
}

}  // namespace

PipelineResult run_pipeline(const DataSet& data, const RunConfig& config) {
  run_stage("config", [&] {
    validate(config);
    return 0;
  });
  const auto split = run_stage("split", [&] { return split_for(data.sales, config); });
  const auto prepared = run_stage("preprocess", [&] { return prepare(data.sales, config); });

  PipelineResult result;
  result.bundle = fit_bundle(data, prepared, config, split);

  auto test_rows = run_stage("features", [&] { return rows_for_targets(prepared, data, result.bundle, split.test); });
  const auto keep = cold_start_filter(test_rows.life_at_target, config.cold_start_filter);
  result.test_rows = test_rows.subset(keep);
  const auto& rows = result.test_rows;
  if (rows.rows() == 0) throw DataError("evaluate: no test rows left after the cold-start filter");

  const auto forecast = run_stage("predict", [&] { return forecast_rows(result.bundle, prepared, data, rows); });
  const auto es = run_stage("baseline", [&] { return es_baseline(prepared.history, data.catalog, rows.keys); });
  result.predictions = keyed(rows, forecast);
  result.baseline = keyed(rows, es.forecast);
  result.actuals = keyed(rows, rows.targets);
  result.baseline_fallback = es.used_fallback;

  run_stage("evaluate", [&] {
    result.segments =
        segment_products(data.sales, data.catalog, split.train.end, config.segment_a, config.segment_b);
    LifeLengths life;
    for (Eigen::Index r = 0; r < rows.rows(); ++r) life[{rows.keys[r].product, rows.keys[r].target}] = rows.life_at_target[r];
    result.reports.emplace_back(std::string(to_string(config.model)),
                                evaluate(result.predictions, result.actuals, data.catalog, result.segments, life));
    if (config.model != ModelKind::es) {
      result.reports.emplace_back("es", evaluate(result.baseline, result.actuals, data.catalog, result.segments, life));
    }
    return 0;
  });
  return result;
}

std::string run_manifest(const ModelBundle& bundle, const std::vector<std::pair<std::string, std::string>>& extra) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::istringstream lines(format_config(bundle.config));
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    config[std::string(csv::trim(std::string_view(line).substr(0, eq)))] =
        std::string(csv::trim(std::string_view(line).substr(eq + 1)));
  }
  j["config"] = config;
  j["model"] = std::string(to_string(bundle.config.model));
  if (bundle.boosted) {
    const auto& m = *bundle.boosted;
    j["trees_fitted"] = m.trees.size();
    j["best_round"] = m.best_round;
    j["base_score"] = m.base_score;
    j["train_loss_at_best"] = m.train_loss.at(static_cast<std::size_t>(m.best_round));
    if (!m.valid_loss.empty()) j["valid_loss_at_best"] = m.valid_loss.at(static_cast<std::size_t>(m.best_round));
    j["features"] = m.feature_names;
  }
  if (bundle.forest) {
    j["trees_fitted"] = bundle.forest->trees.size();
    j["features"] = bundle.forest->feature_names;
  }
  if (bundle.seasonality) j["seasonality_patterns"] = bundle.seasonality->patterns.rows();
  for (const auto& [k, v] : extra) j[k] = v;
  return j.dump(2) + "\n";
}

void write_predictions(const std::filesystem::path& path, std::span<const KeyedValue> predictions) {
  std::vector<KeyedValue> sorted(predictions.begin(), predictions.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const KeyedValue& a, const KeyedValue& b) { return std::tie(a.product, a.week) < std::tie(b.product, b.week); });
  std::ofstream out;
  csv::open_for_write(out, path);
  out << "product_id,week,forecast\n";
  for (const auto& p : sorted) out << p.product << ',' << p.week << ',' << csv::format_double(p.value) << '\n';
}

void write_actuals(const std::filesystem::path& path, std::span<const KeyedValue> actuals) {
  std::vector<KeyedValue> sorted(actuals.begin(), actuals.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const KeyedValue& a, const KeyedValue& b) { return std::tie(a.product, a.week) < std::tie(b.product, b.week); });
  std::ofstream out;
  csv::open_for_write(out, path);
  out << "product_id,week,actual\n";
  for (const auto& p : sorted) out << p.product << ',' << p.week << ',' << csv::format_double(p.value) << '\n';
}

std::vector<KeyedValue> read_keyed_values(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  if (table.header.size() < 3 || table.header[0] != "product_id" || table.header[1] != "week") {
    throw DataError(path.string() + ": expected columns product_id,week,<value>");
  }
  std::vector<KeyedValue> out;
  for (const auto& row : table.rows) {
    const auto where = path.string() + ":" + std::to_string(row.line);
    KeyedValue v;
    v.product = row.fields[0];
    v.week = static_cast<Week>(csv::parse_int(row.fields[1], where));
    v.value = csv::parse_double(row.fields[2], where);
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace demandcast
