#include "demandcast/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <tuple>

#include "demandcast/csv.hpp"

namespace demandcast {

SplitRanges temporal_split(Week total_weeks, const SplitSpec& spec) {
  if (spec.train_end < 1 || spec.valid_len < 1 || spec.test_len < 1) {
    throw std::invalid_argument("temporal_split: train, valid and test lengths must all be >= 1");
  }
  if (spec.horizon < 1) throw std::invalid_argument("temporal_split: horizon must be >= 1");
  const Week end = spec.train_end + spec.valid_len + spec.test_len;
  if (end > total_weeks) {
    throw std::invalid_argument("temporal_split: split needs " + std::to_string(end) + " weeks, panel has " +
                                std::to_string(total_weeks));
  }
  SplitRanges r;
  r.train = {0, spec.train_end};
  r.valid = {spec.train_end, spec.train_end + spec.valid_len};
  r.test = {r.valid.end, end};
  return r;
}

std::string_view to_string(Segment s) {
  switch (s) {
    case Segment::A: return "A";
    case Segment::B: return "B";
    case Segment::C: return "C";
  }
  return "?";
}

std::map<ProductId, Segment> segment_products(const SalesPanel& panel, const Catalog& catalog, Week train_end,
                                              double quantile_a, double quantile_b) {
  const auto n = static_cast<int>(panel.size());
  if (n < 3) throw std::invalid_argument("segment_products: need at least 3 products");
  if (!(quantile_a > 0.0 && quantile_a < quantile_b && quantile_b < 1.0)) {
    throw std::invalid_argument("segment_products: need 0 < quantile_a < quantile_b < 1");
  }
  const Week end = std::clamp(train_end, 0, panel.weeks());
  std::vector<std::pair<double, ProductId>> volume;
  volume.reserve(n);
  for (Eigen::Index i = 0; i < panel.size(); ++i) {
    const auto& id = panel.products()[i];
    const double units = static_cast<double>(panel.units().row(i).head(end).sum());
    volume.emplace_back(catalog.price(id) * units, id);
  }
  std::sort(volume.begin(), volume.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  const int n_a = std::max(1, static_cast<int>(std::lround(quantile_a * n)));
  const int n_ab = std::clamp(static_cast<int>(std::lround(quantile_b * n)), n_a + 1, n - 1);
  std::map<ProductId, Segment> out;
  for (int k = 0; k < n; ++k) {
    out[volume[k].second] = k < n_a ? Segment::A : k < n_ab ? Segment::B : Segment::C;
  }
  return out;
}

std::vector<Eigen::Index> cold_start_filter(std::span<const int> life_at_target, int min_life) {
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < life_at_target.size(); ++i) {
    if (life_at_target[i] >= min_life) keep.push_back(static_cast<Eigen::Index>(i));
  }
  return keep;
}

std::string life_bucket(int listed_weeks) {
  if (listed_weeks < 8) return "<8";
  if (listed_weeks >= 13) return ">=13";
  return std::to_string(listed_weeks);
}

namespace {

struct Obs {
  double y;
  double yhat;
  double price;
};

MetricCell cell_of(const std::vector<Obs>& obs) {
  MetricCell c;
  c.n = obs.size();
  if (obs.empty()) return c;
  Eigen::VectorXd y(c.n), yhat(c.n), p(c.n);
  for (std::size_t i = 0; i < c.n; ++i) {
    y(i) = obs[i].y;
    yhat(i) = obs[i].yhat;
    p(i) = obs[i].price;
  }
  c.rmse = weighted_rmse(y, yhat, p);
  if ((p.array() * yhat.array()).sum() != 0.0) c.mae = weighted_mae(y, yhat, p);
  return c;
}

std::vector<KeyedValue> sorted_by_key(std::span<const KeyedValue> values, const char* what) {
  std::vector<KeyedValue> out(values.begin(), values.end());
  std::sort(out.begin(), out.end(), [](const KeyedValue& a, const KeyedValue& b) {
    return std::tie(a.product, a.week) < std::tie(b.product, b.week);
  });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].product == out[i - 1].product && out[i].week == out[i - 1].week) {
      throw std::invalid_argument(std::string("evaluate: duplicate ") + what + " for product '" + out[i].product +
                                  "' week " + std::to_string(out[i].week));
    }
  }
  return out;
}

const char* const kBuckets[] = {"<8", "8", "9", "10", "11", "12", ">=13"};

}  // namespace

EvalReport evaluate(std::span<const KeyedValue> predictions, std::span<const KeyedValue> actuals,
                    const Catalog& catalog, const std::map<ProductId, Segment>& segments,
                    const LifeLengths& life_lengths) {
  const auto pred = sorted_by_key(predictions, "prediction");
  const auto act = sorted_by_key(actuals, "actual");
  if (pred.size() != act.size()) {
    throw std::invalid_argument("evaluate: " + std::to_string(pred.size()) + " predictions but " +
                                std::to_string(act.size()) + " actuals");
  }
  if (pred.empty()) throw std::invalid_argument("evaluate: nothing to evaluate");

  std::vector<Obs> all;
  std::map<Segment, std::vector<Obs>> by_segment;
  std::map<std::string, std::vector<Obs>> by_life;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].product != act[i].product || pred[i].week != act[i].week) {
      throw std::invalid_argument("evaluate: key mismatch between predictions and actuals at product '" +
                                  pred[i].product + "' week " + std::to_string(pred[i].week));
    }
    const Obs o{act[i].value, pred[i].value, catalog.price(pred[i].product)};
    all.push_back(o);
    if (auto s = segments.find(pred[i].product); s != segments.end()) by_segment[s->second].push_back(o);
    if (auto l = life_lengths.find({pred[i].product, pred[i].week}); l != life_lengths.end()) {
      by_life[life_bucket(l->second)].push_back(o);
    }
  }

  EvalReport report;
  report.overall = cell_of(all);
  if (!segments.empty()) {
    for (Segment s : {Segment::A, Segment::B, Segment::C}) report.segments[s] = cell_of(by_segment[s]);
  }
  if (!life_lengths.empty()) {
    for (const char* b : kBuckets) report.life_buckets.emplace_back(b, cell_of(by_life[b]));
  }
  return report;
}

void write_report(const std::filesystem::path& path, std::span<const NamedReport> reports) {
  std::ofstream out;
  csv::open_for_write(out, path);
  out << "model,scope,group,n,rmse,mae\n";
  auto row = [&](const std::string& model, const char* scope, std::string_view group, const MetricCell& c) {
    out << model << ',' << scope << ',' << group << ',' << c.n << ',' << csv::format_double(c.rmse) << ','
        << csv::format_double(c.mae) << '\n';
  };
  for (const auto& [model, r] : reports) {
    row(model, "segment", "All", r.overall);
    for (const auto& [s, c] : r.segments) row(model, "segment", to_string(s), c);
    for (const auto& [b, c] : r.life_buckets) row(model, "life", b, c);
  }
}

void print_report_table(std::ostream& out, std::span<const NamedReport> reports) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::left << std::setw(12) << "model";
  for (const char* g : {"All", "A", "B", "C"}) {
    out << std::right << std::setw(11) << (std::string(g) + " RMSE") << std::setw(9) << (std::string(g) + " MAE");
  }
  out << "\n" << std::fixed << std::setprecision(3);
  for (const auto& [model, r] : reports) {
    out << std::left << std::setw(12) << model << std::right;
    auto put = [&](const MetricCell& c) { out << std::setw(11) << c.rmse / 1000.0 << std::setw(9) << c.mae; };
    put(r.overall);
    for (Segment s : {Segment::A, Segment::B, Segment::C}) {
      auto it = r.segments.find(s);
      put(it == r.segments.end() ? MetricCell{} : it->second);
    }
    out << "\n";
  }
  out << "(RMSE in thousands of price units)\n";
  out.flags(flags);
  out.precision(precision);
}

}  // namespace demandcast
