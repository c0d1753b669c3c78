// demandcast command-line entry point.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error, 3 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "demandcast/eval.hpp"
#include "demandcast/ingest.hpp"
#include "demandcast/pipeline.hpp"
#include "demandcast/preprocess.hpp"
#include "demandcast/serialize.hpp"
#include "demandcast/synth.hpp"

namespace fs = std::filesystem;
using namespace demandcast;

namespace {

struct Options {
  std::string config;
  std::string sales;
  std::string catalog;
  std::string covariates;
  std::string out_dir = ".";
  std::string model_file;
  std::string predictions;
  std::string actuals;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> model;
  std::optional<std::string> encoding;
  std::optional<bool> seasonality;
  std::optional<int> cold_start_filter;
  int products = 500;
  int categories = 20;
  int weeks = 200;
};

RunConfig resolve_config(const Options& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.model) c.model = parse_model_kind(*o.model);
  if (o.encoding) c.encoding = parse_encoding(*o.encoding);
  if (o.seasonality) c.with_seasonality = *o.seasonality;
  if (o.cold_start_filter) c.cold_start_filter = *o.cold_start_filter;
  validate(c);
  return c;
}

fs::path out_path(const Options& o, const char* name) {
  fs::create_directories(o.out_dir);
  return fs::path(o.out_dir) / name;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

DataSet load_inputs(const Options& o) {
  if (o.sales.empty() || o.catalog.empty()) throw std::invalid_argument("--sales and --catalog are required");
  return run_stage("ingest", [&] { return load_dataset(o.sales, o.catalog, o.covariates); });
}

SynthSpec synth_spec(const Options& o, std::uint64_t seed) {
  SynthSpec s;
  s.n_products = o.products;
  s.n_categories = o.categories;
  s.weeks = o.weeks;
  s.seed = seed;
  return s;
}

void write_dataset(const Options& o, const SynthPanel& data) {
  write_sales(out_path(o, "sales.csv"), data.panel);
  write_catalog(out_path(o, "catalog.csv"), data.catalog);
  write_covariates(out_path(o, "covariates.csv"), data.covariates);
  write_ground_truth(out_path(o, "ground_truth.csv"), data.panel, data.truth);
  write_true_seasonality(out_path(o, "seasonality_truth.csv"), data.truth);
}

int cmd_synth(const Options& o) {
  const auto seed = o.seed.value_or(RunConfig{}.seed);
  const auto data = run_stage("synth", [&] { return generate_panel(synth_spec(o, seed)); });
  write_dataset(o, data);
  std::cout << "wrote " << data.panel.size() << " products x " << data.panel.weeks() << " weeks to " << o.out_dir
            << "\n";
  return 0;
}

int cmd_preprocess(const Options& o) {
  const auto config = resolve_config(o);
  if (o.sales.empty()) throw std::invalid_argument("--sales is required");
  const auto raw = run_stage("ingest", [&] { return load_sales(o.sales); });
  const auto result =
      run_stage("preprocess", [&] { return preprocess(raw, config.smoothing_window, config.cap_multiplier); });
  write_sales(out_path(o, "sales_repaired.csv"), result.repaired);
  write_smoothed(out_path(o, "smoothed.csv"), result.smoothed);
  std::cout << "repaired " << result.smoothed.repaired.count() << " fake zeros, capped "
            << result.smoothed.capped.count() << " weeks\n";
  return 0;
}

int cmd_train(const Options& o) {
  const auto config = resolve_config(o);
  const auto data = load_inputs(o);
  const auto split = run_stage("split", [&] { return split_for(data.sales, config); });
  const auto prepared = run_stage("preprocess", [&] { return prepare(data.sales, config); });
  const auto bundle = fit_bundle(data, prepared, config, split);
  save_bundle(out_path(o, "model.json"), bundle);
  write_text(out_path(o, "manifest.json"), run_manifest(bundle));
  if (bundle.boosted) {
    std::cout << "best_round " << bundle.boosted->best_round << " of " << bundle.boosted->trees.size() << "\n";
  }
  return 0;
}

int cmd_predict(const Options& o) {
  if (o.model_file.empty()) throw std::invalid_argument("--model-file is required");
  const auto bundle = run_stage("load model", [&] { return load_bundle(o.model_file); });
  const auto data = load_inputs(o);
  const auto forecasts = forecast_ahead(bundle, data);
  write_predictions(out_path(o, "predictions.csv"), forecasts);
  std::cout << "forecast " << forecasts.size() << " products\n";
  return 0;
}

int cmd_evaluate(const Options& o) {
  if (o.predictions.empty() || o.actuals.empty() || o.catalog.empty()) {
    throw std::invalid_argument("--predictions, --actuals and --catalog are required");
  }
  const auto config = resolve_config(o);
  const auto predictions = run_stage("ingest", [&] { return read_keyed_values(o.predictions); });
  const auto actuals = run_stage("ingest", [&] { return read_keyed_values(o.actuals); });
  const auto catalog = run_stage("ingest", [&] { return load_catalog(o.catalog); });
  std::map<ProductId, Segment> segments;
  LifeLengths life;
  if (!o.sales.empty()) {
    const auto sales = run_stage("ingest", [&] { return load_sales(o.sales); });
    segments = segment_products(sales, catalog, std::min(config.train_weeks, sales.weeks()), config.segment_a,
                                config.segment_b);
    for (const auto& p : predictions) {
      if (sales.contains(p.product) && p.week >= 0 && p.week < sales.weeks()) {
        life[{p.product, p.week}] = weeks_on_sale_through(sales, sales.index_of(p.product), p.week);
      }
    }
  }
  EvalReport report;
  try {
    report = evaluate(predictions, actuals, catalog, segments, life);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
  const std::vector<NamedReport> reports{{std::string(to_string(config.model)), report}};
  write_report(out_path(o, "report.csv"), reports);
  print_report_table(std::cout, reports);
  return 0;
}

int cmd_pipeline(const Options& o) {
  const auto config = resolve_config(o);
  DataSet data;
  if (o.sales.empty()) {
    auto synth = run_stage("synth", [&] { return generate_panel(synth_spec(o, config.seed)); });
    write_dataset(o, synth);
    data = DataSet{std::move(synth.panel), std::move(synth.catalog), std::move(synth.covariates)};
  } else {
    data = load_inputs(o);
  }
  const auto result = run_pipeline(data, config);
  save_bundle(out_path(o, "model.json"), result.bundle);
  write_predictions(out_path(o, "predictions.csv"), result.predictions);
  write_predictions(out_path(o, "baseline.csv"), result.baseline);
  write_actuals(out_path(o, "actuals.csv"), result.actuals);
  write_report(out_path(o, "report.csv"), result.reports);
  write_text(out_path(o, "manifest.json"),
             run_manifest(result.bundle, {{"test_rows", std::to_string(result.test_rows.rows())}}));
  print_report_table(std::cout, result.reports);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weekly demand forecasting with a global boosted-tree model"};
  app.require_subcommand(1);
  Options o;

  auto add_config = [&](CLI::App* c) {
    c->add_option("--config", o.config, "key = value run configuration")->check(CLI::ExistingFile);
    c->add_option("--seed", o.seed, "random seed");
  };
  auto add_data = [&](CLI::App* c, bool with_covariates) {
    c->add_option("--sales", o.sales, "sales.csv");
    c->add_option("--catalog", o.catalog, "catalog.csv");
    if (with_covariates) c->add_option("--covariates", o.covariates, "covariates.csv");
  };
  auto add_run = [&](CLI::App* c) {
    c->add_option("--model", o.model, "gbt, forest or es")->check(CLI::IsMember({"gbt", "forest", "es"}));
    c->add_option("--encoding", o.encoding, "ordinal or hashing")->check(CLI::IsMember({"ordinal", "hashing"}));
    c->add_flag("--with-seasonality,!--no-seasonality", o.seasonality, "seasonality features");
    c->add_option("--cold-start-filter", o.cold_start_filter, "drop test rows with fewer listed weeks at target")
        ->check(CLI::NonNegativeNumber);
  };
  auto add_out = [&](CLI::App* c) { c->add_option("--out-dir", o.out_dir, "output directory"); };
  auto add_synth = [&](CLI::App* c) {
    c->add_option("--products", o.products, "synthetic products")->check(CLI::PositiveNumber);
    c->add_option("--categories", o.categories, "synthetic categories")->check(CLI::PositiveNumber);
    c->add_option("--weeks", o.weeks, "synthetic weeks")->check(CLI::PositiveNumber);
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic panel");
  add_out(synth);
  add_synth(synth);
  synth->add_option("--seed", o.seed, "random seed");

  auto* prep = app.add_subcommand("preprocess", "repair fake zeros and smooth spikes");
  add_config(prep);
  add_data(prep, false);
  add_out(prep);

  auto* train_cmd = app.add_subcommand("train", "fit encoders, seasonality and the model");
  add_config(train_cmd);
  add_data(train_cmd, true);
  add_run(train_cmd);
  add_out(train_cmd);

  auto* predict_cmd = app.add_subcommand("predict", "forecast horizon weeks past the last panel week");
  add_data(predict_cmd, true);
  predict_cmd->add_option("--model-file", o.model_file, "model.json written by train or pipeline");
  add_out(predict_cmd);

  auto* eval_cmd = app.add_subcommand("evaluate", "score forecasts against actuals");
  add_config(eval_cmd);
  eval_cmd->add_option("--predictions", o.predictions, "product_id,week,forecast");
  eval_cmd->add_option("--actuals", o.actuals, "product_id,week,actual");
  eval_cmd->add_option("--catalog", o.catalog, "catalog.csv");
  eval_cmd->add_option("--sales", o.sales, "sales.csv, enables segment and life-length breakdowns");
  eval_cmd->add_option("--model", o.model, "label for the report")->check(CLI::IsMember({"gbt", "forest", "es"}));
  add_out(eval_cmd);

  auto* pipe = app.add_subcommand("pipeline", "run every stage end to end");
  add_config(pipe);
  add_data(pipe, true);
  add_run(pipe);
  add_out(pipe);
  add_synth(pipe);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth) return cmd_synth(o);
    if (*prep) return cmd_preprocess(o);
    if (*train_cmd) return cmd_train(o);
    if (*predict_cmd) return cmd_predict(o);
    if (*eval_cmd) return cmd_evaluate(o);
    if (*pipe) return cmd_pipeline(o);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
