#include "demandcast/features.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>

#include "demandcast/csv.hpp"

namespace demandcast {

int OrdinalMap::encode(const std::string& value) const {
  auto it = ids.find(value);
  return it == ids.end() ? size() : it->second;
}

OrdinalMap ordinal_encode(std::span<const std::string> values) {
  std::set<std::string> distinct(values.begin(), values.end());
  OrdinalMap map;
  int next = 0;
  for (const auto& v : distinct) map.ids.emplace(v, next++);
  return map;
}

std::uint64_t fnv1a64(std::string_view value) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char byte : value) {
    h ^= byte;
    h *= 1099511628211ULL;
  }
  return h;
}

int hash_encode(std::string_view value, int buckets) {
  if (buckets < 2) throw std::invalid_argument("hash_encode: buckets must be >= 2");
  return static_cast<int>(fnv1a64(value) % static_cast<std::uint64_t>(buckets));
}

namespace {

bool parses_as_number(const std::string& s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return !s.empty() && ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

FeatureEncoder::FeatureEncoder(const Catalog& catalog, Encoding mode, int buckets) : mode_(mode), buckets_(buckets) {
  if (buckets < 2) throw std::invalid_argument("FeatureEncoder: buckets must be >= 2");
  std::vector<std::string> cats;
  for (const auto& [id, e] : catalog.entries()) cats.push_back(e.category);
  columns_.push_back(Column{"category", false, ordinal_encode(cats)});
  for (const auto& name : catalog.attribute_names()) {
    std::vector<std::string> values;
    bool numeric = true;
    for (const auto& [id, e] : catalog.entries()) {
      auto it = e.attributes.find(name);
      if (it == e.attributes.end()) continue;
      values.push_back(it->second);
      numeric = numeric && parses_as_number(it->second);
    }
    columns_.push_back(Column{name, numeric, numeric ? OrdinalMap{} : ordinal_encode(values)});
  }
}

FeatureEncoder::FeatureEncoder(Encoding mode, int buckets, std::vector<Column> columns)
    : mode_(mode), buckets_(buckets), columns_(std::move(columns)) {}

std::vector<std::string> FeatureEncoder::column_names() const {
  std::vector<std::string> names;
  for (const auto& c : columns_) names.push_back(c.name == "category" ? c.name : "attr:" + c.name);
  return names;
}

std::vector<double> FeatureEncoder::encode(const Catalog& catalog, const ProductId& product) const {
  std::vector<double> out(columns_.size(), kMissing);
  if (!catalog.contains(product)) return out;
  const auto& entry = catalog.at(product);
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const auto& col = columns_[c];
    std::string value;
    if (col.name == "category" && c == 0) {
      value = entry.category;
    } else {
      auto it = entry.attributes.find(col.name);
      if (it == entry.attributes.end()) continue;
      value = it->second;
    }
    if (col.numeric) {
      double v = kMissing;
      std::from_chars(value.data(), value.data() + value.size(), v);
      out[c] = v;
    } else if (mode_ == Encoding::ordinal) {
      out[c] = col.ordinal.encode(value);
    } else {
      out[c] = hash_encode(value, buckets_);
    }
  }
  return out;
}

std::vector<std::string> covariate_columns(const CovariateTable& table) {
  std::vector<std::string> names;
  for (const auto& [key, cov] : table.temporal) names.push_back("temporal:" + key);
  for (const auto& [key, cov] : table.mixed) names.push_back("mixed:" + key);
  return names;
}

std::map<std::string, double> impute_future_covariates(const CovariateTable& table, const ProductId& product,
                                                       Week target, Week observed_through, int tau) {
  std::map<std::string, double> out;
  const int position = ((target % tau) + tau) % tau;
  for (const auto& [key, cov] : table.temporal) {
    double value = kMissing;
    if (cov.known_future) {
      auto it = cov.values.find(target);
      if (it != cov.values.end()) value = it->second;
    } else {
      double sum = 0.0;
      int n = 0;
      for (const auto& [week, v] : cov.values) {
        if (week > observed_through) break;
        if (week % tau == position) {
          sum += v;
          ++n;
        }
      }
      if (n > 0) value = sum / n;
    }
    out.emplace("temporal:" + key, value);
  }
  for (const auto& [key, cov] : table.mixed) {
    double value = kMissing;
    auto series = cov.values.find(product);
    if (series != cov.values.end()) {
      if (cov.known_future) {
        auto it = series->second.find(target);
        if (it != series->second.end()) value = it->second;
      } else {
        double sum = 0.0;
        int n = 0;
        for (const auto& [week, v] : series->second) {
          if (week > observed_through) break;
          sum += v;
          ++n;
        }
        if (n > 0) value = sum / n;
      }
    }
    out.emplace("mixed:" + key, value);
  }
  return out;
}

FeatureMatrix FeatureMatrix::subset(std::span<const Eigen::Index> rows) const {
  FeatureMatrix out;
  out.columns = columns;
  const auto n = static_cast<Eigen::Index>(rows.size());
  out.values.resize(n, values.cols());
  out.prices.resize(n);
  if (has_targets()) out.targets.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto src = rows[r];
    out.values.row(r) = values.row(src);
    out.prices(r) = prices(src);
    if (has_targets()) out.targets(r) = targets(src);
    out.keys.push_back(keys[src]);
    out.life_at_target.push_back(life_at_target[src]);
  }
  return out;
}

FeatureMatrix build_matrix(const SalesPanel& repaired, const SmoothedPanel& smoothed, const Catalog& catalog,
                           const SeasonalityModel* seasonal, const CovariateTable& covariates,
                           const FeatureEncoder& encoder, const FeatureOptions& options, Week t_end, BuildMode mode,
                           Week t_begin) {
  const Week T = repaired.weeks();
  const int h = options.horizon;
  const int lags = options.lags;
  if (h < 1 || lags < 1) throw std::invalid_argument("build_matrix: horizon and lags must be >= 1");
  if (smoothed.size() != repaired.size() || smoothed.weeks() != T) {
    throw std::invalid_argument("build_matrix: smoothed panel does not match the sales panel");
  }
  if (t_end < 0 || t_end >= T || (mode == BuildMode::train && t_end + h >= T)) {
    throw std::out_of_range("build_matrix: t_end = " + std::to_string(t_end) + " out of range for " +
                            std::to_string(T) + " weeks and horizon " + std::to_string(h));
  }
  t_begin = std::max(0, t_begin);

  FeatureMatrix m;
  for (int l = 0; l < lags; ++l) m.columns.push_back("lag_" + std::to_string(l));
  m.columns.insert(m.columns.end(), {"lag_mean", "annual_trend", "local_trend"});
  if (seasonal != nullptr) m.columns.insert(m.columns.end(), {"season_target", "season_origin"});
  m.columns.insert(m.columns.end(), {"weeks_since_launch", "price"});
  const auto encoded_names = encoder.column_names();
  m.columns.insert(m.columns.end(), encoded_names.begin(), encoded_names.end());
  const auto cov_names = covariate_columns(covariates);
  for (const auto& name : cov_names) m.columns.push_back("cov:" + name);

  struct Pending {
    Eigen::Index row;
    Week origin;
  };
  std::vector<Pending> pending;
  for (Eigen::Index i = 0; i < repaired.size(); ++i) {
    if (mode == BuildMode::predict) {
      if (repaired.on_sale()(i, t_end)) pending.push_back({i, t_end});
      continue;
    }
    for (Week t = t_begin; t <= t_end; ++t) {
      if (repaired.on_sale()(i, t) && repaired.on_sale()(i, t + h)) pending.push_back({i, t});
    }
  }

  const auto n_rows = static_cast<Eigen::Index>(pending.size());
  const auto n_cols = static_cast<Eigen::Index>(m.columns.size());
  m.values = Eigen::MatrixXd::Constant(n_rows, n_cols, kMissing);
  m.prices.resize(n_rows);
  if (mode == BuildMode::train) m.targets.resize(n_rows);
  m.keys.reserve(pending.size());
  m.life_at_target.reserve(pending.size());

  std::vector<Week> launch(repaired.size());
  for (Eigen::Index i = 0; i < repaired.size(); ++i) launch[i] = first_on_sale_week(repaired, i);

  for (Eigen::Index r = 0; r < n_rows; ++r) {
    const auto [i, t] = pending[r];
    const auto& id = repaired.products()[i];
    const Week target = t + h;
    Eigen::Index c = 0;

    double lag_sum = 0.0;
    int lag_n = 0;
    for (int l = 0; l < lags; ++l, ++c) {
      const Week w = t - l;
      if (w < launch[i]) continue;
      m.values(r, c) = smoothed.x(i, w);
      if (smoothed.on_sale(i, w)) {
        lag_sum += smoothed.x(i, w);
        ++lag_n;
      }
    }
    m.values(r, c++) = lag_n > 0 ? lag_sum / lag_n : kMissing;
    const auto trend = trend_features(smoothed, i, t);
    m.values(r, c++) = trend.annual_slope;
    m.values(r, c++) = trend.local_slope;
    const auto& category = catalog.category_of(id);
    if (seasonal != nullptr) {
      m.values(r, c++) = seasonal->value_at(category, target);
      m.values(r, c++) = seasonal->value_at(category, t);
    }
    m.values(r, c++) = t - launch[i];
    m.values(r, c++) = catalog.price(id);
    for (double v : encoder.encode(catalog, id)) m.values(r, c++) = v;
    const auto cov = impute_future_covariates(covariates, id, target, t, options.tau);
    for (const auto& name : cov_names) m.values(r, c++) = cov.at(name);

    m.keys.push_back(RowKey{id, t, target});
    m.life_at_target.push_back(weeks_on_sale_through(repaired, i, target));
    m.prices(r) = catalog.price(id);
    if (mode == BuildMode::train) m.targets(r) = static_cast<double>(repaired.units()(i, target));
  }
  return m;
}

void write_features(const std::filesystem::path& path, const FeatureMatrix& matrix) {
  std::ofstream out;
  csv::open_for_write(out, path);
  out << "product_id,origin,target";
  for (const auto& c : matrix.columns) out << ',' << c;
  if (matrix.has_targets()) out << ",target_units";
  out << '\n';
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    const auto& k = matrix.keys[r];
    out << k.product << ',' << k.origin << ',' << k.target;
    for (Eigen::Index c = 0; c < matrix.values.cols(); ++c) {
      const double v = matrix.values(r, c);
      out << ',' << (is_missing(v) ? std::string() : csv::format_double(v));
    }
    if (matrix.has_targets()) out << ',' << csv::format_double(matrix.targets(r));
    out << '\n';
  }
}

}  // namespace demandcast
