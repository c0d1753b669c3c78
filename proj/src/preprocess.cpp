#include "demandcast/preprocess.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "demandcast/csv.hpp"

namespace demandcast {

MaskMatrix detect_fake_zeros(const SalesPanel& panel, FakeZeroRule rule) {
  const auto& y = panel.units();
  MaskMatrix mask = MaskMatrix::Constant(panel.size(), panel.weeks(), false);
  for (Eigen::Index i = 0; i < panel.size(); ++i) {
    Week first = -1, last = -1;
    for (Week t = 0; t < panel.weeks(); ++t) {
      if (y(i, t) > 0) {
        if (first < 0) first = t;
        last = t;
      }
    }
    if (rule == FakeZeroRule::trailing) last = panel.weeks();
    for (Week t = first + 1; first >= 0 && t < last; ++t) {
      mask(i, t) = y(i, t) == 0 && panel.on_sale()(i, t) && !panel.in_stock()(i, t);
    }
  }
  return mask;
}

SalesPanel repair_fake_zeros(const SalesPanel& panel, const MaskMatrix& mask) {
  if (mask.rows() != panel.size() || mask.cols() != panel.weeks()) {
    throw std::invalid_argument("repair_fake_zeros: mask shape does not match the panel");
  }
  CountMatrix units = panel.units();
  for (Eigen::Index i = 0; i < panel.size(); ++i) {
    double level = 0.0;
    int seen = 0;
    for (Week t = 0; t < panel.weeks(); ++t) {
      if (!panel.on_sale()(i, t)) continue;
      if (mask(i, t)) {
        std::int64_t value = 0;
        if (seen > 0) {
          value = std::max<std::int64_t>(0, std::llround(level));
        } else {
          for (Week s = t + 1; s < panel.weeks(); ++s) {
            if (!mask(i, s) && units(i, s) > 0) {
              value = units(i, s);
              break;
            }
          }
        }
        units(i, t) = value;
      }
      const auto v = static_cast<double>(units(i, t));
      level = seen == 0 ? v : kRepairAlpha * v + (1.0 - kRepairAlpha) * level;
      ++seen;
    }
  }
  return panel.with_units(std::move(units));
}

SmoothedPanel smooth_panel(const SalesPanel& panel, int window, double gamma, const MaskMatrix& repaired) {
  if (window < 2) throw std::invalid_argument("smooth_panel: window must be >= 2");
  if (!(gamma > 0.0)) throw std::invalid_argument("smooth_panel: gamma must be > 0");
  const auto n = panel.size();
  const Week T = panel.weeks();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  SmoothedPanel out;
  out.products = panel.products();
  out.y = panel.units();
  out.x = panel.units().cast<double>();
  out.rolling_mean = RealMatrix::Constant(n, T, nan);
  out.rolling_std = RealMatrix::Constant(n, T, nan);
  out.on_sale = panel.on_sale();
  out.repaired = repaired.size() == 0 ? MaskMatrix::Constant(n, T, false) : repaired;
  out.capped = MaskMatrix::Constant(n, T, false);

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Week t = 0; t < T; ++t) {
      const Week begin = std::max(0, t - window);
      double sum = 0.0;
      int count = 0;
      for (Week s = begin; s < t; ++s) {
        if (!panel.on_sale()(i, s)) continue;
        sum += static_cast<double>(panel.units()(i, s));
        ++count;
      }
      if (count == 0) continue;
      const double mean = sum / count;
      double ss = 0.0;
      for (Week s = begin; s < t; ++s) {
        if (!panel.on_sale()(i, s)) continue;
        const double d = static_cast<double>(panel.units()(i, s)) - mean;
        ss += d * d;
      }
      const double sd = std::sqrt(ss / count);
      out.rolling_mean(i, t) = mean;
      out.rolling_std(i, t) = sd;
      if (count < 2) continue;
      const double cap = mean + gamma * sd;
      if (out.x(i, t) > cap) {
        out.x(i, t) = cap;
        out.capped(i, t) = true;
      }
    }
  }
  return out;
}

Preprocessed preprocess(const SalesPanel& raw, int window, double gamma, FakeZeroRule rule) {
  const auto mask = detect_fake_zeros(raw, rule);
  auto repaired = repair_fake_zeros(raw, mask);
  auto smoothed = smooth_panel(repaired, window, gamma, mask);
  return {std::move(repaired), std::move(smoothed)};
}

void write_smoothed(const std::filesystem::path& path, const SmoothedPanel& s) {
  std::ofstream out;
  csv::open_for_write(out, path);
  out << "product_id,week,y,x,rolling_mean,rolling_std,repaired,capped\n";
  auto num = [](double v) { return std::isnan(v) ? std::string() : csv::format_double(v); };
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    for (Week t = 0; t < s.weeks(); ++t) {
      out << s.products[i] << ',' << t << ',' << s.y(i, t) << ',' << num(s.x(i, t)) << ',' << num(s.rolling_mean(i, t))
          << ',' << num(s.rolling_std(i, t)) << ',' << (s.repaired(i, t) ? 1 : 0) << ',' << (s.capped(i, t) ? 1 : 0)
          << '\n';
    }
  }
}

}  // namespace demandcast
