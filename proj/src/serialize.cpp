#include "demandcast/serialize.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace demandcast {

using nlohmann::json;

namespace {

json number(double v) { return std::isnan(v) ? json(nullptr) : json(v); }
double number(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

template <typename Vec>
json vector_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

Eigen::VectorXd vector_from(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i]);
  return v;
}

json matrix_json(const RealMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_json(m.row(r)));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

RealMatrix matrix_from(const json& j) {
  RealMatrix m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != m.rows()) throw DataError("matrix row count mismatch");
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const auto row = vector_from(data[r]);
    if (row.size() != m.cols()) throw DataError("matrix column count mismatch");
    m.row(r) = row.transpose();
  }
  return m;
}

json tree_json(const Tree& t) {
  json feature = json::array(), threshold = json::array(), default_left = json::array(), left = json::array(),
       right = json::array(), weight = json::array(), gain = json::array();
  for (const auto& n : t.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    default_left.push_back(n.default_left);
    left.push_back(n.left);
    right.push_back(n.right);
    weight.push_back(n.weight);
    gain.push_back(n.gain);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"default_left", default_left}, {"left", left},
          {"right", right},     {"weight", weight},       {"gain", gain}};
}

Tree tree_from(const json& j) {
  Tree t;
  const auto& feature = j.at("feature");
  t.nodes.resize(feature.size());
  for (std::size_t i = 0; i < feature.size(); ++i) {
    auto& n = t.nodes[i];
    n.feature = feature[i].get<int>();
    n.threshold = j.at("threshold").at(i).get<double>();
    n.default_left = j.at("default_left").at(i).get<bool>();
    n.left = j.at("left").at(i).get<int>();
    n.right = j.at("right").at(i).get<int>();
    n.weight = j.at("weight").at(i).get<double>();
    n.gain = j.at("gain").at(i).get<double>();
    const auto size = static_cast<int>(feature.size());
    if (!n.is_leaf() && (n.left <= static_cast<int>(i) || n.right <= static_cast<int>(i) || n.left >= size ||
                         n.right >= size)) {
      throw DataError("tree node " + std::to_string(i) + " has invalid children");
    }
  }
  if (t.nodes.empty()) throw DataError("tree without nodes");
  return t;
}

json trees_json(const std::vector<Tree>& trees) {
  json out = json::array();
  for (const auto& t : trees) out.push_back(tree_json(t));
  return out;
}

std::vector<Tree> trees_from(const json& j) {
  std::vector<Tree> out;
  for (const auto& t : j) out.push_back(tree_from(t));
  return out;
}

json encoder_json(const FeatureEncoder& e) {
  json columns = json::array();
  for (const auto& c : e.columns()) {
    columns.push_back({{"name", c.name}, {"numeric", c.numeric}, {"ordinal", c.ordinal.ids}});
  }
  return {{"mode", std::string(to_string(e.mode()))}, {"buckets", e.buckets()}, {"columns", columns}};
}

FeatureEncoder encoder_from(const json& j) {
  std::vector<FeatureEncoder::Column> columns;
  for (const auto& c : j.at("columns")) {
    FeatureEncoder::Column col;
    col.name = c.at("name").get<std::string>();
    col.numeric = c.at("numeric").get<bool>();
    col.ordinal.ids = c.at("ordinal").get<std::map<std::string, int>>();
    columns.push_back(std::move(col));
  }
  return FeatureEncoder(parse_encoding(j.at("mode").get<std::string>()), j.at("buckets").get<int>(),
                        std::move(columns));
}

json curves_json(const std::map<CategoryId, Eigen::VectorXd>& curves) {
  json out = json::object();
  for (const auto& [cat, v] : curves) out[cat] = vector_json(v);
  return out;
}

std::map<CategoryId, Eigen::VectorXd> curves_from(const json& j) {
  std::map<CategoryId, Eigen::VectorXd> out;
  for (const auto& [cat, v] : j.items()) out[cat] = vector_from(v);
  return out;
}

json seasonality_json(const SeasonalityModel& m) {
  return {{"tau", m.tau},
          {"category_curve", curves_json(m.category_curve)},
          {"category_variance", curves_json(m.category_variance)},
          {"patterns", matrix_json(m.patterns)},
          {"assignment", m.assignment},
          {"global_pattern", vector_json(m.global_pattern)}};
}

SeasonalityModel seasonality_from(const json& j) {
  SeasonalityModel m;
  m.tau = j.at("tau").get<int>();
  m.category_curve = curves_from(j.at("category_curve"));
  m.category_variance = curves_from(j.at("category_variance"));
  m.patterns = matrix_from(j.at("patterns"));
  m.assignment = j.at("assignment").get<std::map<CategoryId, int>>();
  m.global_pattern = vector_from(j.at("global_pattern"));
  for (const auto& [cat, k] : m.assignment) {
    if (k < 0 || k >= m.patterns.rows()) throw DataError("seasonality assignment out of range for " + cat);
  }
  if (m.patterns.rows() > 0 && m.patterns.cols() != m.tau) throw DataError("seasonality pattern length != tau");
  return m;
}

json losses_json(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

std::vector<double> losses_from(const json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(number(x));
  return out;
}

}  // namespace

std::string to_json(const ModelBundle& bundle) {
  json j;
  j["format_version"] = kBundleFormatVersion;
  j["config"] = format_config(bundle.config);
  j["encoder"] = encoder_json(bundle.encoder);
  j["seasonality"] = bundle.seasonality ? seasonality_json(*bundle.seasonality) : json(nullptr);
  if (bundle.boosted) {
    const auto& m = *bundle.boosted;
    j["boosted"] = {{"base_score", m.base_score},       {"learning_rate", m.learning_rate},
                    {"loss", std::string(to_string(m.loss))}, {"best_round", m.best_round},
                    {"feature_names", m.feature_names}, {"train_loss", losses_json(m.train_loss)},
                    {"valid_loss", losses_json(m.valid_loss)}, {"trees", trees_json(m.trees)}};
  } else {
    j["boosted"] = nullptr;
  }
  if (bundle.forest) {
    j["forest"] = {{"feature_names", bundle.forest->feature_names}, {"trees", trees_json(bundle.forest->trees)}};
  } else {
    j["forest"] = nullptr;
  }
  return j.dump() + "\n";
}

ModelBundle bundle_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    const int version = j.at("format_version").get<int>();
    if (version != kBundleFormatVersion) {
      throw DataError("unsupported model format version " + std::to_string(version));
    }
    ModelBundle b;
    b.config = parse_config(j.at("config").get<std::string>(), "<model config>");
    b.encoder = encoder_from(j.at("encoder"));
    if (!j.at("seasonality").is_null()) b.seasonality = seasonality_from(j.at("seasonality"));
    if (const auto& m = j.at("boosted"); !m.is_null()) {
      BoostedModel model;
      model.base_score = m.at("base_score").get<double>();
      model.learning_rate = m.at("learning_rate").get<double>();
      model.loss = parse_loss(m.at("loss").get<std::string>());
      model.best_round = m.at("best_round").get<int>();
      model.feature_names = m.at("feature_names").get<std::vector<std::string>>();
      model.train_loss = losses_from(m.at("train_loss"));
      model.valid_loss = losses_from(m.at("valid_loss"));
      model.trees = trees_from(m.at("trees"));
      b.boosted = std::move(model);
    }
    if (const auto& f = j.at("forest"); !f.is_null()) {
      ForestModel model;
      model.feature_names = f.at("feature_names").get<std::vector<std::string>>();
      model.trees = trees_from(f.at("trees"));
      b.forest = std::move(model);
    }
    return b;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json(bundle);
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return bundle_from_json(text.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace demandcast
