#pragma once

#include <filesystem>

#include "demandcast/core.hpp"

namespace demandcast {

/// Repaired sales after spike capping, plus the trailing-window statistics that drove the cap.
struct SmoothedPanel {
  std::vector<ProductId> products;
  CountMatrix y;             // repaired sales
  RealMatrix x;              // smoothed sales
  RealMatrix rolling_mean;   // NaN where the window is empty
  RealMatrix rolling_std;    // population std, NaN where the window is empty
  MaskMatrix on_sale;
  MaskMatrix repaired;
  MaskMatrix capped;

  [[nodiscard]] Eigen::Index size() const { return x.rows(); }
  [[nodiscard]] Week weeks() const { return static_cast<Week>(x.cols()); }
  /// y - x
  [[nodiscard]] RealMatrix residual() const { return y.cast<double>() - x; }
};

enum class FakeZeroRule {
  two_sided,  // positive sales both before and after the week
  trailing,   // positive sales before the week; uses no later data
};

/// Zero-sales weeks that are listed and out of stock, after the first positive-sales week of the
/// product and (two_sided) before its last one.
MaskMatrix detect_fake_zeros(const SalesPanel& panel, FakeZeroRule rule = FakeZeroRule::two_sided);

inline constexpr double kRepairAlpha = 0.3;

/// Replaces flagged weeks, earliest first, with the rounded ES level of the listed weeks before
/// them (earlier replacements included). A flagged week with no listed history takes the first
/// later positive value of an unflagged week, or 0.
SalesPanel repair_fake_zeros(const SalesPanel& panel, const MaskMatrix& mask);

/// Trailing statistics over the listed weeks among t-M..t-1. With at least two such weeks,
/// x = min(y, mean + gamma * std); otherwise x = y. Throws std::invalid_argument for M < 2 or gamma <= 0.
/// `repaired` is carried into the result for diagnostics and may be empty.
SmoothedPanel smooth_panel(const SalesPanel& panel, int window, double gamma, const MaskMatrix& repaired = {});

/// detect_fake_zeros -> repair_fake_zeros -> smooth_panel.
struct Preprocessed {
  SalesPanel repaired;
  SmoothedPanel smoothed;
};
Preprocessed preprocess(const SalesPanel& raw, int window, double gamma,
                        FakeZeroRule rule = FakeZeroRule::two_sided);

// product_id,week,y,x,rolling_mean,rolling_std,repaired,capped
void write_smoothed(const std::filesystem::path& path, const SmoothedPanel& smoothed);

}  // namespace demandcast
