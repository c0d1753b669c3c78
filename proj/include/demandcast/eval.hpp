#pragma once

#include <cmath>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "demandcast/core.hpp"

namespace demandcast {

namespace detail {
template <typename A, typename B, typename C>
void check_metric_inputs(const Eigen::MatrixBase<A>& y, const Eigen::MatrixBase<B>& yhat,
                         const Eigen::MatrixBase<C>& prices) {
  if (y.size() != yhat.size() || y.size() != prices.size()) throw std::invalid_argument("metric: length mismatch");
  if (y.size() == 0) throw std::invalid_argument("metric: no observations");
}
}  // namespace detail

/// sqrt( (1/n) sum p_i^2 (y_i - yhat_i)^2 )
template <typename A, typename B, typename C>
typename A::Scalar weighted_rmse(const Eigen::MatrixBase<A>& y, const Eigen::MatrixBase<B>& yhat,
                                 const Eigen::MatrixBase<C>& prices) {
  detail::check_metric_inputs(y, yhat, prices);
  const auto err = (prices.array() * (y.array() - yhat.array())).matrix();
  return std::sqrt(err.squaredNorm() / static_cast<typename A::Scalar>(y.size()));
}

enum class MaeNormalization {
  forecast,  // sum p_i yhat_i, the reported default
  actual,    // sum p_i y_i
};

/// sum p_i |y_i - yhat_i| / sum p_i yhat_i (or sum p_i y_i). Throws std::invalid_argument on a zero denominator.
template <typename A, typename B, typename C>
typename A::Scalar weighted_mae(const Eigen::MatrixBase<A>& y, const Eigen::MatrixBase<B>& yhat,
                                const Eigen::MatrixBase<C>& prices,
                                MaeNormalization norm = MaeNormalization::forecast) {
  detail::check_metric_inputs(y, yhat, prices);
  const auto num = (prices.array() * (y.array() - yhat.array()).abs()).sum();
  const auto den = norm == MaeNormalization::forecast ? (prices.array() * yhat.array()).sum()
                                                      : (prices.array() * y.array()).sum();
  if (den == 0) throw std::invalid_argument("weighted_mae: zero weighted volume in the denominator");
  return num / den;
}

struct WeekRange {
  Week begin = 0;
  Week end = 0;  // exclusive

  [[nodiscard]] int size() const { return end - begin; }
  [[nodiscard]] bool contains(Week w) const { return w >= begin && w < end; }
  friend bool operator==(const WeekRange&, const WeekRange&) = default;
};

struct SplitSpec {
  Week train_end = 170;
  int valid_len = 10;
  int test_len = 19;
  int horizon = 6;
};

struct SplitRanges {
  WeekRange train;
  WeekRange valid;
  WeekRange test;
};

/// [0, train_end), [train_end, +valid_len), [.., +test_len). Ranges are target weeks.
/// Throws std::invalid_argument when a length is < 1 or the ranges overrun T.
SplitRanges temporal_split(Week total_weeks, const SplitSpec& spec);
inline SplitRanges temporal_split(const SalesPanel& panel, const SplitSpec& spec) {
  return temporal_split(panel.weeks(), spec);
}

enum class Segment { A, B, C };
std::string_view to_string(Segment s);

/// Ranks products by price-weighted sales over weeks [0, train_end), highest first, ties by id.
/// The top `quantile_a` share goes to A, up to `quantile_b` to B, the rest to C.
std::map<ProductId, Segment> segment_products(const SalesPanel& panel, const Catalog& catalog, Week train_end,
                                              double quantile_a = 0.1, double quantile_b = 0.4);

/// Positions of rows whose product had at least `min_life` listed weeks at the target week.
std::vector<Eigen::Index> cold_start_filter(std::span<const int> life_at_target, int min_life);

struct KeyedValue {
  ProductId product;
  Week week = 0;
  double value = 0.0;
};

using LifeLengths = std::map<std::pair<ProductId, Week>, int>;

struct MetricCell {
  std::size_t n = 0;
  double rmse = std::nan("");
  double mae = std::nan("");
};

struct EvalReport {
  MetricCell overall;
  std::map<Segment, MetricCell> segments;
  std::vector<std::pair<std::string, MetricCell>> life_buckets;  // "<8", "8".."12", ">=13"
};

/// Life-length bucket label.
std::string life_bucket(int listed_weeks);

/// Weighted metrics overall, per segment and per life-length bucket. Predictions and actuals must
/// carry the same (product, week) keys, else std::invalid_argument. Products without a segment or
/// keys without a life length are left out of those breakdowns only. Cells whose forecast volume is
/// zero report NaN MAE.
EvalReport evaluate(std::span<const KeyedValue> predictions, std::span<const KeyedValue> actuals,
                    const Catalog& catalog, const std::map<ProductId, Segment>& segments,
                    const LifeLengths& life_lengths);

using NamedReport = std::pair<std::string, EvalReport>;

// model,scope,group,n,rmse,mae
void write_report(const std::filesystem::path& path, std::span<const NamedReport> reports);
/// Model x segment table with RMSE in thousands of currency units.
void print_report_table(std::ostream& out, std::span<const NamedReport> reports);

}  // namespace demandcast
