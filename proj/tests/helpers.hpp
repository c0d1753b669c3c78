#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include "demandcast/core.hpp"

namespace testing {

using namespace demandcast;

/// Panel from literal rows. Empty masks mean listed and in stock everywhere.
inline SalesPanel make_panel(const std::vector<std::vector<std::int64_t>>& units,
                             const std::vector<std::vector<bool>>& on_sale = {},
                             const std::vector<std::vector<bool>>& in_stock = {}, std::string prefix = "p") {
  const auto n = static_cast<Eigen::Index>(units.size());
  const auto T = n == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(units[0].size());
  CountMatrix y(n, T);
  MaskMatrix listed = MaskMatrix::Constant(n, T, true);
  MaskMatrix stock = MaskMatrix::Constant(n, T, true);
  std::vector<ProductId> ids;
  for (Eigen::Index i = 0; i < n; ++i) {
    ids.push_back(prefix + std::to_string(i));
    for (Eigen::Index t = 0; t < T; ++t) {
      y(i, t) = units[i][t];
      if (!on_sale.empty()) listed(i, t) = on_sale[i][t];
      if (!in_stock.empty()) stock(i, t) = in_stock[i][t];
    }
  }
  return SalesPanel(ids, y, listed, stock);
}

/// One catalog entry per product, all in `category` unless `categories` is given.
inline Catalog make_catalog(const SalesPanel& panel, const std::vector<std::string>& categories = {},
                            const std::vector<double>& prices = {}) {
  std::map<ProductId, CatalogEntry> entries;
  for (std::size_t i = 0; i < panel.products().size(); ++i) {
    CatalogEntry e;
    e.category = categories.empty() ? "c0" : categories[i];
    e.price = prices.empty() ? 1.0 : prices[i];
    entries[panel.products()[i]] = e;
  }
  return Catalog(entries);
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("demandcast_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return path;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testing
