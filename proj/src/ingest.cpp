#include "demandcast/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <tuple>

#include "demandcast/csv.hpp"

namespace demandcast {

std::string_view to_string(LossKind loss) { return loss == LossKind::poisson ? "poisson" : "squared"; }

LossKind parse_loss(std::string_view text) {
  if (text == "poisson") return LossKind::poisson;
  if (text == "squared") return LossKind::squared;
  throw std::invalid_argument("unknown loss '" + std::string(text) + "' (expected poisson or squared)");
}

std::string_view to_string(Encoding e) { return e == Encoding::ordinal ? "ordinal" : "hashing"; }

Encoding parse_encoding(std::string_view text) {
  if (text == "ordinal") return Encoding::ordinal;
  if (text == "hashing") return Encoding::hashing;
  throw std::invalid_argument("unknown encoding '" + std::string(text) + "' (expected ordinal or hashing)");
}

std::string_view to_string(ModelKind m) {
  switch (m) {
    case ModelKind::gbt: return "gbt";
    case ModelKind::forest: return "forest";
    case ModelKind::es: return "es";
  }
  return "gbt";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "gbt") return ModelKind::gbt;
  if (text == "forest") return ModelKind::forest;
  if (text == "es") return ModelKind::es;
  throw std::invalid_argument("unknown model '" + std::string(text) + "' (expected gbt, forest or es)");
}

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

template <typename T>
void check_search_range(const RunConfig& c, const char* key, T value, T lo, T hi) {
  if (c.allow_out_of_range || (value >= lo && value <= hi)) return;
  std::ostringstream msg;
  msg << key << " = " << value << " is outside the search range [" << lo << ", " << hi
      << "] (set allow_out_of_range = true to override)";
  throw std::invalid_argument(msg.str());
}

struct Field {
  const char* key;
  std::function<void(RunConfig&, std::string_view, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field int_field(const char* key, T RunConfig::*member) {
  return {key,
          [member](RunConfig& c, std::string_view v, const std::string& where) {
            c.*member = static_cast<T>(csv::parse_int(v, where));
          },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

Field real_field(const char* key, double RunConfig::*member) {
  return {key, [member](RunConfig& c, std::string_view v, const std::string& where) { c.*member = csv::parse_double(v, where); },
          [member](const RunConfig& c) { return csv::format_double(c.*member); }};
}

Field bool_field(const char* key, bool RunConfig::*member) {
  return {key, [member](RunConfig& c, std::string_view v, const std::string& where) { c.*member = csv::parse_bool(v, where); },
          [member](const RunConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(int_field("horizon", &RunConfig::horizon));
    f.push_back(int_field("smoothing_window", &RunConfig::smoothing_window));
    f.push_back(real_field("cap_multiplier", &RunConfig::cap_multiplier));
    f.push_back(int_field("season_period", &RunConfig::season_period));
    f.push_back(int_field("clusters", &RunConfig::clusters));
    f.push_back(int_field("hash_buckets", &RunConfig::hash_buckets));
    f.push_back({"encoding", [](RunConfig& c, std::string_view v, const std::string&) { c.encoding = parse_encoding(v); },
                 [](const RunConfig& c) { return std::string(to_string(c.encoding)); }});
    f.push_back(bool_field("with_seasonality", &RunConfig::with_seasonality));
    f.push_back({"model", [](RunConfig& c, std::string_view v, const std::string&) { c.model = parse_model_kind(v); },
                 [](const RunConfig& c) { return std::string(to_string(c.model)); }});
    f.push_back({"loss", [](RunConfig& c, std::string_view v, const std::string&) { c.boost.loss = parse_loss(v); },
                 [](const RunConfig& c) { return std::string(to_string(c.boost.loss)); }});
    auto boost_real = [](const char* key, auto accessor) {
      return Field{key,
                   [accessor](RunConfig& c, std::string_view v, const std::string& where) {
                     accessor(c) = csv::parse_double(v, where);
                   },
                   [accessor](const RunConfig& c) { return csv::format_double(accessor(c)); }};
    };
    auto boost_int = [](const char* key, auto accessor) {
      return Field{key,
                   [accessor](RunConfig& c, std::string_view v, const std::string& where) {
                     accessor(c) = static_cast<int>(csv::parse_int(v, where));
                   },
                   [accessor](const RunConfig& c) { return std::to_string(accessor(c)); }};
    };
    f.push_back(boost_real("learning_rate", [](auto& c) -> auto& { return c.boost.learning_rate; }));
    f.push_back(boost_real("min_split_loss", [](auto& c) -> auto& { return c.boost.tree.min_split_loss; }));
    f.push_back(boost_int("max_depth", [](auto& c) -> auto& { return c.boost.tree.max_depth; }));
    f.push_back(boost_int("rounds", [](auto& c) -> auto& { return c.boost.rounds; }));
    f.push_back(boost_real("lambda", [](auto& c) -> auto& { return c.boost.tree.lambda; }));
    f.push_back(boost_int("early_stop_patience", [](auto& c) -> auto& { return c.boost.early_stop_patience; }));
    f.push_back(boost_real("min_child_weight", [](auto& c) -> auto& { return c.boost.tree.min_child_weight; }));
    f.push_back(boost_real("max_delta_step", [](auto& c) -> auto& { return c.boost.tree.max_delta_step; }));
    f.push_back(boost_int("forest_trees", [](auto& c) -> auto& { return c.forest.n_trees; }));
    f.push_back(boost_int("forest_max_depth", [](auto& c) -> auto& { return c.forest.max_depth; }));
    f.push_back(boost_real("forest_min_leaf", [](auto& c) -> auto& { return c.forest.min_leaf; }));
    f.push_back(int_field("train_weeks", &RunConfig::train_weeks));
    f.push_back(int_field("valid_weeks", &RunConfig::valid_weeks));
    f.push_back(int_field("test_weeks", &RunConfig::test_weeks));
    f.push_back(int_field("cold_start_filter", &RunConfig::cold_start_filter));
    f.push_back(real_field("segment_a", &RunConfig::segment_a));
    f.push_back(real_field("segment_b", &RunConfig::segment_b));
    f.push_back({"seed",
                 [](RunConfig& c, std::string_view v, const std::string& where) {
                   const auto s = csv::parse_int(v, where);
                   if (s < 0) throw std::invalid_argument(where + ": seed must be non-negative");
                   c.seed = static_cast<std::uint64_t>(s);
                 },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});
    f.push_back(bool_field("allow_out_of_range", &RunConfig::allow_out_of_range));
    return f;
  }();
  return table;
}

}  // namespace

void validate(const RunConfig& c) {
  require(c.horizon >= 1, "horizon must be >= 1");
  require(c.smoothing_window >= 2, "smoothing_window must be >= 2");
  require(c.cap_multiplier > 0.0, "cap_multiplier must be > 0");
  require(c.season_period >= 2, "season_period must be >= 2");
  require(c.clusters >= 1, "clusters must be >= 1");
  require(c.hash_buckets >= 2, "hash_buckets must be >= 2");
  require(c.boost.learning_rate > 0.0 && c.boost.learning_rate <= 1.0, "learning_rate must be in (0, 1]");
  require(c.boost.tree.min_split_loss >= 0.0, "min_split_loss must be >= 0");
  require(c.boost.tree.max_depth >= 0, "max_depth must be >= 0");
  require(c.boost.rounds >= 1, "rounds must be >= 1");
  require(c.boost.tree.lambda >= 0.0, "lambda must be >= 0");
  require(c.boost.early_stop_patience >= 1, "early_stop_patience must be >= 1");
  require(c.boost.tree.min_child_weight >= 0.0, "min_child_weight must be >= 0");
  require(c.boost.tree.max_delta_step >= 0.0, "max_delta_step must be >= 0");
  require(c.forest.n_trees >= 1, "forest_trees must be >= 1");
  require(c.forest.max_depth >= 0, "forest_max_depth must be >= 0");
  require(c.forest.min_leaf >= 1.0, "forest_min_leaf must be >= 1");
  require(c.train_weeks >= 1 && c.valid_weeks >= 1 && c.test_weeks >= 1, "split lengths must be >= 1");
  require(c.cold_start_filter >= 0, "cold_start_filter must be >= 0");
  require(c.segment_a > 0.0 && c.segment_a < c.segment_b && c.segment_b < 1.0,
          "segment quantiles must satisfy 0 < segment_a < segment_b < 1");

  check_search_range(c, "learning_rate", c.boost.learning_rate, 0.01, 0.3);
  check_search_range(c, "min_split_loss", c.boost.tree.min_split_loss, 0.01, 0.2);
  check_search_range(c, "max_depth", c.boost.tree.max_depth, 5, 8);
  check_search_range(c, "rounds", c.boost.rounds, 1000, 5000);
}

RunConfig parse_config(std::string_view text, const std::string& origin) {
  RunConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const auto body = csv::trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument(where + ": expected 'key = value'");
    const std::string key(csv::trim(body.substr(0, eq)));
    const auto value = csv::trim(body.substr(eq + 1));
    const auto& table = fields();
    auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return key == f.key; });
    if (it == table.end()) throw std::invalid_argument(where + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw std::invalid_argument(where + ": duplicate key '" + key + "'");
    try {
      it->set(config, value, where);
    } catch (const DataError& e) {
      throw std::invalid_argument(e.what());
    }
  }
  validate(config);
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string format_config(const RunConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(config) + "\n";
  return out;
}

void CovariateTable::check_against(const SalesPanel& panel) const {
  for (const auto& [key, cov] : mixed) {
    for (const auto& [product, series] : cov.values) {
      if (!panel.contains(product)) {
        throw DataError("covariate '" + key + "' references unknown product '" + product + "'");
      }
      for (const auto& [week, value] : series) {
        if (week < 0 || week >= panel.weeks()) {
          throw DataError("covariate '" + key + "' references week " + std::to_string(week) + " outside the panel");
        }
      }
    }
  }
}

namespace {

int require_column(const csv::Table& t, const char* name, const std::filesystem::path& path) {
  const int c = t.column(name);
  if (c < 0) throw DataError(path.string() + ": missing column '" + std::string(name) + "'");
  return c;
}

std::string where(const std::filesystem::path& path, const csv::Row& row) {
  return path.string() + ":" + std::to_string(row.line);
}

}  // namespace

SalesPanel load_sales(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const int c_id = require_column(table, "product_id", path);
  const int c_week = require_column(table, "week", path);
  const int c_units = require_column(table, "units", path);
  const int c_sale = require_column(table, "on_sale", path);
  const int c_stock = require_column(table, "in_stock", path);

  struct Record {
    long long units;
    bool on_sale;
    bool in_stock;
  };
  std::map<std::pair<ProductId, Week>, Record> records;
  std::set<ProductId> ids;
  Week max_week = -1;
  for (const auto& row : table.rows) {
    const auto w = where(path, row);
    const auto& id = row.fields[c_id];
    if (id.empty()) throw DataError(w + ": empty product_id");
    const auto week = csv::parse_int(row.fields[c_week], w);
    if (week < 0 || week > 1'000'000) throw DataError(w + ": week out of range");
    const auto units = csv::parse_int(row.fields[c_units], w);
    if (units < 0) throw DataError(w + ": negative units " + std::to_string(units));
    const bool on_sale = csv::parse_bool(row.fields[c_sale], w);
    const bool in_stock = csv::parse_bool(row.fields[c_stock], w);
    if (units > 0 && !on_sale) throw DataError(w + ": positive units while on_sale = 0");
    if (!records.emplace(std::make_pair(id, static_cast<Week>(week)), Record{units, on_sale, in_stock}).second) {
      throw DataError(w + ": duplicate row for product '" + id + "' week " + std::to_string(week));
    }
    ids.insert(id);
    max_week = std::max<Week>(max_week, static_cast<Week>(week));
  }

  std::vector<ProductId> products(ids.begin(), ids.end());
  const auto n = static_cast<Eigen::Index>(products.size());
  const Week T = max_week + 1;
  CountMatrix units = CountMatrix::Zero(n, T);
  MaskMatrix on_sale = MaskMatrix::Constant(n, T, false);
  MaskMatrix in_stock = MaskMatrix::Constant(n, T, true);
  Eigen::Index i = -1;
  ProductId current;
  for (const auto& [key, rec] : records) {
    if (i < 0 || key.first != current) {
      current = key.first;
      ++i;
    }
    units(i, key.second) = rec.units;
    on_sale(i, key.second) = rec.on_sale;
    in_stock(i, key.second) = rec.in_stock;
  }
  return SalesPanel(std::move(products), std::move(units), std::move(on_sale), std::move(in_stock));
}

Catalog load_catalog(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const int c_id = require_column(table, "product_id", path);
  const int c_cat = require_column(table, "category_id", path);
  const int c_price = require_column(table, "price", path);

  std::map<ProductId, CatalogEntry> entries;
  for (const auto& row : table.rows) {
    const auto w = where(path, row);
    const auto& id = row.fields[c_id];
    if (id.empty()) throw DataError(w + ": empty product_id");
    CatalogEntry e;
    e.category = row.fields[c_cat];
    if (e.category.empty()) throw DataError(w + ": product '" + id + "' has no category");
    e.price = csv::parse_double(row.fields[c_price], w);
    if (!(e.price > 0.0)) throw DataError(w + ": price must be positive");
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (static_cast<int>(c) == c_id || static_cast<int>(c) == c_cat || static_cast<int>(c) == c_price) continue;
      if (!row.fields[c].empty()) e.attributes[table.header[c]] = row.fields[c];
    }
    if (!entries.emplace(id, std::move(e)).second) throw DataError(w + ": duplicate product '" + id + "'");
  }
  return Catalog(std::move(entries));
}

CovariateTable load_covariates(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const int c_scope = require_column(table, "scope", path);
  const int c_key = require_column(table, "key", path);
  const int c_week = require_column(table, "week", path);
  const int c_id = require_column(table, "product_id", path);
  const int c_value = require_column(table, "value", path);
  const int c_pred = require_column(table, "predictable", path);

  CovariateTable out;
  std::map<std::string, bool> predictability;
  for (const auto& row : table.rows) {
    const auto w = where(path, row);
    const auto& scope = row.fields[c_scope];
    const auto& key = row.fields[c_key];
    if (key.empty()) throw DataError(w + ": empty covariate key");
    const auto week = csv::parse_int(row.fields[c_week], w);
    if (week < 0) throw DataError(w + ": negative week");
    const double value = csv::parse_double(row.fields[c_value], w);
    const bool known = csv::parse_bool(row.fields[c_pred], w);
    auto [it, fresh] = predictability.emplace(scope + "/" + key, known);
    if (!fresh && it->second != known) throw DataError(w + ": inconsistent predictable flag for '" + key + "'");
    const auto wk = static_cast<Week>(week);
    if (scope == "temporal") {
      if (!row.fields[c_id].empty()) throw DataError(w + ": temporal covariate rows must leave product_id empty");
      auto& cov = out.temporal[key];
      cov.known_future = known;
      if (!cov.values.emplace(wk, value).second) throw DataError(w + ": duplicate temporal covariate row");
    } else if (scope == "mixed") {
      if (row.fields[c_id].empty()) throw DataError(w + ": mixed covariate rows need a product_id");
      auto& cov = out.mixed[key];
      cov.known_future = known;
      if (!cov.values[row.fields[c_id]].emplace(wk, value).second) {
        throw DataError(w + ": duplicate mixed covariate row");
      }
    } else {
      throw DataError(w + ": scope must be 'temporal' or 'mixed', got '" + scope + "'");
    }
  }
  return out;
}

void write_sales(const std::filesystem::path& path, const SalesPanel& panel) {
  std::ofstream out;
  csv::open_for_write(out, path);
  out << "product_id,week,units,on_sale,in_stock\n";
  for (Eigen::Index i = 0; i < panel.size(); ++i) {
    for (Week t = 0; t < panel.weeks(); ++t) {
      out << panel.products()[i] << ',' << t << ',' << panel.units()(i, t) << ',' << (panel.on_sale()(i, t) ? 1 : 0)
          << ',' << (panel.in_stock()(i, t) ? 1 : 0) << '\n';
    }
  }
}

void write_catalog(const std::filesystem::path& path, const Catalog& catalog) {
  std::ofstream out;
  csv::open_for_write(out, path);
  out << "product_id,category_id,price";
  for (const auto& name : catalog.attribute_names()) out << ',' << name;
  out << '\n';
  for (const auto& [id, e] : catalog.entries()) {
    out << id << ',' << e.category << ',' << csv::format_double(e.price);
    for (const auto& name : catalog.attribute_names()) {
      auto it = e.attributes.find(name);
      out << ',' << (it == e.attributes.end() ? std::string() : it->second);
    }
    out << '\n';
  }
}

void write_covariates(const std::filesystem::path& path, const CovariateTable& table) {
  std::ofstream out;
  csv::open_for_write(out, path);
  out << "scope,key,week,product_id,value,predictable\n";
  for (const auto& [key, cov] : table.temporal) {
    for (const auto& [week, value] : cov.values) {
      out << "temporal," << key << ',' << week << ",," << csv::format_double(value) << ',' << (cov.known_future ? 1 : 0)
          << '\n';
    }
  }
  for (const auto& [key, cov] : table.mixed) {
    for (const auto& [product, series] : cov.values) {
      for (const auto& [week, value] : series) {
        out << "mixed," << key << ',' << week << ',' << product << ',' << csv::format_double(value) << ','
            << (cov.known_future ? 1 : 0) << '\n';
      }
    }
  }
}

}  // namespace demandcast
