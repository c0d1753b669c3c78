#include "demandcast/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include "demandcast/csv.hpp"

namespace demandcast {

void validate(const SynthSpec& s) {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(std::string("synth: ") + msg);
  };
  require(s.n_products >= 1, "n_products must be >= 1");
  require(s.n_categories >= 1 && s.n_categories <= s.n_products, "n_categories must be in [1, n_products]");
  require(s.tau >= 2, "tau must be >= 2");
  require(s.weeks >= 9, "weeks must be >= 9");
  require(s.n_archetypes >= 1, "n_archetypes must be >= 1");
  require(s.curve_jitter >= 0.0, "curve_jitter must be >= 0");
  require(s.bump_amplitude_max >= 0.5, "bump_amplitude_max must be >= 0.5");
  require(s.level_log_sd >= 0.0 && s.category_effect_sd >= 0.0 && s.brand_effect_sd >= 0.0 &&
              s.price_log_sd >= 0.0 && s.lifetime_log_sd >= 0.0 && s.trend_sd >= 0.0,
          "standard deviations must be >= 0");
  require(s.n_brands >= 1, "n_brands must be >= 1");
  require(s.min_lifetime >= 1, "min_lifetime must be >= 1");
  require(s.lifetime_median >= 1.0, "lifetime_median must be >= 1");
  require(s.promo_probability >= 0.0 && s.promo_probability <= 1.0, "promo_probability must be in [0, 1]");
  require(s.stockout_probability >= 0.0 && s.stockout_probability <= 1.0, "stockout_probability must be in [0, 1]");
  require(s.promo_multiplier_min > 0.0 && s.promo_multiplier_min <= s.promo_multiplier_max,
          "promo multipliers need 0 < min <= max");
  require(s.stockout_max_run >= 1, "stockout_max_run must be >= 1");
}

namespace {

std::string padded(char prefix, int value, int count) {
  const int width = static_cast<int>(std::to_string(std::max(count - 1, 1)).size());
  std::string digits = std::to_string(value);
  return prefix + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(digits.size()))), '0') +
         digits;
}

Eigen::VectorXd normalized(Eigen::VectorXd v) { return v / v.mean(); }

/// Flat baseline plus 1-3 raised-cosine lobes: a cos^2(pi d / 2w) within half-width w of the centre.
Eigen::VectorXd archetype_curve(int tau, double amplitude_max, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_bumps(1, 3);
  std::uniform_real_distribution<double> center(0.0, static_cast<double>(tau));
  std::uniform_real_distribution<double> amplitude(0.5, amplitude_max);
  std::uniform_real_distribution<double> half_width(tau / 6.0, tau / 2.5);
  Eigen::VectorXd curve = Eigen::VectorXd::Ones(tau);
  const int bumps = n_bumps(rng);
  for (int b = 0; b < bumps; ++b) {
    const double c = center(rng), a = amplitude(rng), w = half_width(rng);
    for (int p = 0; p < tau; ++p) {
      double d = std::abs(p - c);
      d = std::min(d, tau - d);
      if (d < w) {
        const double lobe = std::cos(std::numbers::pi * d / (2.0 * w));
        curve(p) += a * lobe * lobe;
      }
    }
  }
  return normalized(curve);
}

}  // namespace

SynthPanel generate_panel(const SynthSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> std_normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int tau = spec.tau;
  const Week T = spec.weeks;

  std::vector<Eigen::VectorXd> archetypes;
  for (int a = 0; a < spec.n_archetypes; ++a) archetypes.push_back(archetype_curve(tau, spec.bump_amplitude_max, rng));

  GroundTruth truth;
  std::vector<CategoryId> categories;
  std::map<CategoryId, Eigen::VectorXd> season;  // indexed by week of year
  std::map<CategoryId, double> category_effect;
  for (int c = 0; c < spec.n_categories; ++c) {
    const CategoryId id = padded('C', c, spec.n_categories);
    categories.push_back(id);
    const int a = c % spec.n_archetypes;
    Eigen::VectorXd curve = Eigen::VectorXd::Ones(tau);
    if (!spec.flat_seasonality) {
      curve = archetypes[a];
      for (int p = 0; p < tau; ++p) curve(p) *= std::exp(spec.curve_jitter * std_normal(rng));
      curve = normalized(curve);
    }
    season[id] = curve;
    category_effect[id] = spec.category_effect_sd * std_normal(rng);
    truth.category_archetype[id] = a;
    Eigen::VectorXd by_position(tau);
    for (int p = 0; p < tau; ++p) by_position(p) = curve(((p + spec.phase) % tau + tau) % tau);
    truth.category_curves[id] = by_position;
  }
  std::vector<double> brand_effect(spec.n_brands);
  for (auto& b : brand_effect) b = spec.brand_effect_sd * std_normal(rng);

  const int n = spec.n_products;
  std::vector<ProductId> ids(n);
  CountMatrix units = CountMatrix::Zero(n, T);
  MaskMatrix on_sale = MaskMatrix::Constant(n, T, false);
  MaskMatrix in_stock = MaskMatrix::Constant(n, T, true);
  truth.lambda = RealMatrix::Zero(n, T);
  truth.promo = MaskMatrix::Constant(n, T, false);
  truth.stockout = MaskMatrix::Constant(n, T, false);
  std::map<ProductId, CatalogEntry> entries;
  CovariateTable covariates;
  auto& promo_cov = covariates.mixed["promo"];
  promo_cov.known_future = true;
  auto& price_cov = covariates.mixed["price_index"];
  price_cov.known_future = false;

  std::uniform_int_distribution<int> pick_category(0, spec.n_categories - 1);
  std::uniform_int_distribution<int> pick_brand(0, spec.n_brands - 1);
  std::uniform_int_distribution<Week> launch_week(0, T - 8);
  std::uniform_real_distribution<double> promo_lift(spec.promo_multiplier_min, spec.promo_multiplier_max);
  std::uniform_int_distribution<int> run_length(1, spec.stockout_max_run);
  const char* const sizes[] = {"S", "M", "L"};
  std::uniform_int_distribution<int> pick_size(0, 2);

  for (int i = 0; i < n; ++i) {
    ids[i] = padded('P', i, n);
    // Every category gets at least one product.
    const CategoryId& cat = categories[i < spec.n_categories ? i : pick_category(rng)];
    const int brand = pick_brand(rng);
    CatalogEntry entry;
    entry.category = cat;
    entry.price = std::round(std::exp(spec.price_log_mean + spec.price_log_sd * std_normal(rng)) * 100.0) / 100.0;
    entry.price = std::max(entry.price, 0.01);
    entry.attributes["brand"] = padded('B', brand, spec.n_brands);
    entry.attributes["size"] = sizes[pick_size(rng)];
    entries[ids[i]] = entry;

    const double level = std::exp(spec.level_log_mean + category_effect[cat] + brand_effect[brand] +
                                  spec.level_log_sd * std_normal(rng));
    const double slope = spec.trend_sd * std_normal(rng);
    const Week launch = launch_week(rng);
    const int lifetime = std::max(
        spec.min_lifetime,
        static_cast<int>(std::lround(std::exp(std::log(spec.lifetime_median) + spec.lifetime_log_sd * std_normal(rng)))));
    const Week end = std::min<Week>(T, launch + lifetime);

    int stockout_left = 0;
    for (Week t = launch; t < end; ++t) {
      on_sale(i, t) = true;
      const bool promo = unit(rng) < spec.promo_probability;
      const double lift = promo ? promo_lift(rng) : 1.0;
      const int pos = ((t + spec.phase) % tau + tau) % tau;
      const double lambda = level * season[cat](pos) * std::exp(slope * (t - launch)) * lift;
      truth.lambda(i, t) = lambda;
      truth.promo(i, t) = promo;
      promo_cov.values[ids[i]][t] = promo ? 1.0 : 0.0;
      price_cov.values[ids[i]][t] = (promo ? 0.8 : 1.0) * (1.0 + 0.02 * std_normal(rng));

      const bool interior = t > launch && t < end - 1;
      if (interior && stockout_left == 0 && unit(rng) < spec.stockout_probability) stockout_left = run_length(rng);
      std::poisson_distribution<std::int64_t> draw(lambda);
      const std::int64_t y = draw(rng);
      if (interior && stockout_left > 0) {
        --stockout_left;
        truth.stockout(i, t) = true;
        in_stock(i, t) = false;
      } else {
        stockout_left = 0;
        units(i, t) = y;
      }
    }
  }

  auto& temperature = covariates.temporal["temperature"];
  temperature.known_future = false;
  for (Week t = 0; t < T; ++t) {
    const double angle = 2.0 * std::numbers::pi * ((t + spec.phase) % tau) / tau;
    temperature.values[t] = std::round((12.0 - 9.0 * std::cos(angle) + 2.0 * std_normal(rng)) * 10.0) / 10.0;
  }

  SynthPanel out;
  out.panel = SalesPanel(std::move(ids), std::move(units), std::move(on_sale), std::move(in_stock));
  out.catalog = Catalog(std::move(entries));
  out.covariates = std::move(covariates);
  out.truth = std::move(truth);
  return out;
}

void write_ground_truth(const std::filesystem::path& path, const SalesPanel& panel, const GroundTruth& truth) {
  std::ofstream out;
  csv::open_for_write(out, path);
  out << "product_id,week,lambda,promo,stockout\n";
  for (Eigen::Index i = 0; i < panel.size(); ++i) {
    for (Week t = 0; t < panel.weeks(); ++t) {
      if (!panel.on_sale()(i, t)) continue;
      out << panel.products()[i] << ',' << t << ',' << csv::format_double(truth.lambda(i, t)) << ','
          << (truth.promo(i, t) ? 1 : 0) << ',' << (truth.stockout(i, t) ? 1 : 0) << '\n';
    }
  }
}

void write_true_seasonality(const std::filesystem::path& path, const GroundTruth& truth) {
  std::ofstream out;
  csv::open_for_write(out, path);
  out << "category_id,week_of_year,value\n";
  for (const auto& [cat, curve] : truth.category_curves) {
    for (Eigen::Index p = 0; p < curve.size(); ++p) out << cat << ',' << p << ',' << csv::format_double(curve(p)) << '\n';
  }
}

}  // namespace demandcast
