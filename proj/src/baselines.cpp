#include "demandcast/baselines.hpp"

#include <map>

namespace demandcast {

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 9; ++k) grid.push_back(k / 10.0);
  return grid;
}

namespace {

/// Running sums of listed-week sales per category, indexed by week, so the mean up to any origin
/// is a lookup.
struct CategoryMeans {
  std::map<CategoryId, std::vector<std::pair<double, double>>> cumulative;  // (sum, count) through week t
  std::vector<std::pair<double, double>> global;

  CategoryMeans(const SalesPanel& panel, const Catalog& catalog) {
    const Week T = panel.weeks();
    global.assign(T, {0.0, 0.0});
    for (Eigen::Index i = 0; i < panel.size(); ++i) {
      auto& acc = cumulative[catalog.category_of(panel.products()[i])];
      if (acc.empty()) acc.assign(T, {0.0, 0.0});
      for (Week t = 0; t < T; ++t) {
        if (!panel.on_sale()(i, t)) continue;
        const auto y = static_cast<double>(panel.units()(i, t));
        acc[t].first += y;
        acc[t].second += 1.0;
        global[t].first += y;
        global[t].second += 1.0;
      }
    }
    auto prefix = [](std::vector<std::pair<double, double>>& v) {
      for (std::size_t t = 1; t < v.size(); ++t) {
        v[t].first += v[t - 1].first;
        v[t].second += v[t - 1].second;
      }
    };
    for (auto& [cat, v] : cumulative) prefix(v);
    prefix(global);
  }

  double mean(const CategoryId& category, Week origin) const {
    if (origin < 0 || global.empty()) return 0.0;
    origin = std::min<Week>(origin, static_cast<Week>(global.size()) - 1);
    auto it = cumulative.find(category);
    if (it != cumulative.end() && it->second[origin].second > 0) {
      return it->second[origin].first / it->second[origin].second;
    }
    return global[origin].second > 0 ? global[origin].first / global[origin].second : 0.0;
  }
};

}  // namespace

EsForecasts es_baseline(const SalesPanel& panel, const Catalog& catalog, std::span<const RowKey> keys,
                        const EsBaselineOptions& options) {
  const CategoryMeans means(panel, catalog);
  EsForecasts out;
  out.forecast.resize(static_cast<Eigen::Index>(keys.size()));
  out.used_fallback.assign(keys.size(), false);
  Eigen::VectorXd history(panel.weeks());
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const auto& key = keys[k];
    const auto row = panel.index_of(key.product);
    Eigen::Index n = 0;
    for (Week t = 0; t <= key.origin && t < panel.weeks(); ++t) {
      if (panel.on_sale()(row, t)) history(n++) = static_cast<double>(panel.units()(row, t));
    }
    if (n < options.min_observations) {
      out.forecast(static_cast<Eigen::Index>(k)) = means.mean(catalog.category_of(key.product), key.origin);
      out.used_fallback[k] = true;
      continue;
    }
    const auto series = history.head(n);
    const double alpha = es_grid_select(series, options.alphas, options.holdout);
    out.forecast(static_cast<Eigen::Index>(k)) = es_fit_forecast(series, alpha, key.target - key.origin);
  }
  return out;
}

}  // namespace demandcast
