#include "demandcast/core.hpp"

#include <algorithm>
#include <set>

namespace demandcast {

SalesPanel::SalesPanel(std::vector<ProductId> products, CountMatrix units, MaskMatrix on_sale, MaskMatrix in_stock)
    : products_(std::move(products)), units_(std::move(units)), on_sale_(std::move(on_sale)), in_stock_(std::move(in_stock)) {
  const auto n = static_cast<Eigen::Index>(products_.size());
  if (units_.rows() != n || on_sale_.rows() != n || in_stock_.rows() != n) {
    throw std::invalid_argument("SalesPanel: row count does not match product count");
  }
  if (on_sale_.cols() != units_.cols() || in_stock_.cols() != units_.cols()) {
    throw std::invalid_argument("SalesPanel: all series must share the same length");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!index_.emplace(products_[i], i).second) {
      throw DataError("SalesPanel: duplicate product id '" + products_[i] + "'");
    }
    for (Eigen::Index t = 0; t < units_.cols(); ++t) {
      if (units_(i, t) < 0) {
        throw DataError("SalesPanel: negative count for '" + products_[i] + "' at week " + std::to_string(t));
      }
      if (units_(i, t) > 0 && !on_sale_(i, t)) {
        throw DataError("SalesPanel: positive sales while not listed for '" + products_[i] + "' at week " +
                        std::to_string(t));
      }
    }
  }
}

Eigen::Index SalesPanel::index_of(const ProductId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw std::out_of_range("unknown product id '" + id + "'");
  return it->second;
}

SalesPanel SalesPanel::with_units(CountMatrix units) const {
  return SalesPanel(products_, std::move(units), on_sale_, in_stock_);
}

bool operator==(const SalesPanel& a, const SalesPanel& b) {
  return a.products_ == b.products_ && a.units_ == b.units_ && (a.on_sale_ == b.on_sale_).all() &&
         (a.in_stock_ == b.in_stock_).all();
}

Catalog::Catalog(std::map<ProductId, CatalogEntry> entries) : entries_(std::move(entries)) {
  std::set<CategoryId> cats;
  std::set<std::string> attrs;
  for (const auto& [id, e] : entries_) {
    if (e.category.empty()) throw DataError("Catalog: product '" + id + "' has no category");
    if (!(e.price > 0.0)) throw DataError("Catalog: product '" + id + "' has non-positive price");
    cats.insert(e.category);
    for (const auto& [name, value] : e.attributes) attrs.insert(name);
  }
  categories_.assign(cats.begin(), cats.end());
  attribute_names_.assign(attrs.begin(), attrs.end());
}

const CatalogEntry& Catalog::at(const ProductId& id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) throw std::out_of_range("product '" + id + "' not in catalog");
  return it->second;
}

std::vector<ProductId> Catalog::members(const CategoryId& category) const {
  std::vector<ProductId> out;
  for (const auto& [id, e] : entries_) {
    if (e.category == category) out.push_back(id);
  }
  return out;
}

void Catalog::check_covers(const SalesPanel& panel) const {
  for (const auto& id : panel.products()) {
    if (!contains(id)) throw DataError("catalog has no entry for product '" + id + "'");
  }
}

int life_length(const SalesPanel& panel, const ProductId& id) {
  const auto row = panel.index_of(id);
  const auto mask = panel.on_sale().row(row);
  Week first = -1, last = -1;
  for (Week t = 0; t < panel.weeks(); ++t) {
    if (mask(t)) {
      if (first < 0) first = t;
      last = t;
    }
  }
  return first < 0 ? 0 : last - first + 1;
}

int weeks_on_sale_through(const SalesPanel& panel, Eigen::Index row, Week t) {
  t = std::min(t, panel.weeks() - 1);
  if (t < 0) return 0;
  return static_cast<int>(panel.on_sale().row(row).head(t + 1).count());
}

Week first_on_sale_week(const SalesPanel& panel, Eigen::Index row) {
  for (Week t = 0; t < panel.weeks(); ++t) {
    if (panel.on_sale()(row, t)) return t;
  }
  return -1;
}

Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> slice_history(const SalesPanel& panel, const ProductId& id, Week t) {
  const auto row = panel.index_of(id);
  if (t < 0 || t >= panel.weeks()) {
    throw std::out_of_range("slice_history: week " + std::to_string(t) + " outside [0, " +
                            std::to_string(panel.weeks()) + ")");
  }
  return panel.units().row(row).head(t + 1).transpose();
}

}  // namespace demandcast
