#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace demandcast {

using ProductId = std::string;
using CategoryId = std::string;

/// Dense week offset from the panel origin, 0-based.
using Week = int;

template <typename Scalar>
using PanelMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using CountMatrix = PanelMatrix<std::int64_t>;
using RealMatrix = PanelMatrix<double>;
using MaskMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One forecast: product, the last observed week, and the week being forecast.
struct RowKey {
  ProductId product;
  Week origin = 0;
  Week target = 0;

  friend auto operator<=>(const RowKey&, const RowKey&) = default;
};

/// Raised when input data violates a documented schema or invariant.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Weekly unit sales for a fixed product set. Row i of every matrix is product i.
///
/// Products are held in the order given at construction; loaders sort by id.
class SalesPanel {
 public:
  SalesPanel() = default;
  SalesPanel(std::vector<ProductId> products, CountMatrix units, MaskMatrix on_sale, MaskMatrix in_stock);

  [[nodiscard]] const std::vector<ProductId>& products() const { return products_; }
  [[nodiscard]] Eigen::Index size() const { return static_cast<Eigen::Index>(products_.size()); }
  [[nodiscard]] Week weeks() const { return static_cast<Week>(units_.cols()); }

  [[nodiscard]] const CountMatrix& units() const { return units_; }
  [[nodiscard]] const MaskMatrix& on_sale() const { return on_sale_; }
  [[nodiscard]] const MaskMatrix& in_stock() const { return in_stock_; }

  /// Row of `id`; throws std::out_of_range for unknown products.
  [[nodiscard]] Eigen::Index index_of(const ProductId& id) const;
  [[nodiscard]] bool contains(const ProductId& id) const { return index_.count(id) != 0; }

  /// Copy with the unit counts replaced; masks are kept.
  [[nodiscard]] SalesPanel with_units(CountMatrix units) const;

  friend bool operator==(const SalesPanel& a, const SalesPanel& b);

 private:
  std::vector<ProductId> products_;
  std::unordered_map<ProductId, Eigen::Index> index_;
  CountMatrix units_;
  MaskMatrix on_sale_;
  MaskMatrix in_stock_;
};

struct CatalogEntry {
  CategoryId category;
  double price = 0.0;
  std::map<std::string, std::string> attributes;

  friend bool operator==(const CatalogEntry&, const CatalogEntry&) = default;
};

/// Product metadata: category partition, prices and longitudinal attributes.
class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(std::map<ProductId, CatalogEntry> entries);

  [[nodiscard]] const CatalogEntry& at(const ProductId& id) const;
  [[nodiscard]] bool contains(const ProductId& id) const { return entries_.count(id) != 0; }
  [[nodiscard]] const CategoryId& category_of(const ProductId& id) const { return at(id).category; }
  [[nodiscard]] double price(const ProductId& id) const { return at(id).price; }

  [[nodiscard]] const std::map<ProductId, CatalogEntry>& entries() const { return entries_; }
  /// Sorted distinct category ids.
  [[nodiscard]] const std::vector<CategoryId>& categories() const { return categories_; }
  [[nodiscard]] std::size_t category_count() const { return categories_.size(); }
  /// Sorted union of attribute names across all entries.
  [[nodiscard]] const std::vector<std::string>& attribute_names() const { return attribute_names_; }

  /// Products of one category, sorted by id.
  [[nodiscard]] std::vector<ProductId> members(const CategoryId& category) const;

  /// Throws DataError unless every panel product has an entry.
  void check_covers(const SalesPanel& panel) const;

  friend bool operator==(const Catalog& a, const Catalog& b) { return a.entries_ == b.entries_; }

 private:
  std::map<ProductId, CatalogEntry> entries_;
  std::vector<CategoryId> categories_;
  std::vector<std::string> attribute_names_;
};

/// Span in weeks from the first to the last listed week, inclusive; 0 if never listed.
[[nodiscard]] int life_length(const SalesPanel& panel, const ProductId& id);

/// Number of listed weeks in [0, t].
[[nodiscard]] int weeks_on_sale_through(const SalesPanel& panel, Eigen::Index row, Week t);

/// First listed week of a row, or -1.
[[nodiscard]] Week first_on_sale_week(const SalesPanel& panel, Eigen::Index row);

/// (y_0, ..., y_t) for one product.
[[nodiscard]] Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> slice_history(const SalesPanel& panel, const ProductId& id,
                                                                            Week t);

}  // namespace demandcast
