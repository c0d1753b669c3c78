#pragma once

#include <cstdint>
#include <filesystem>
#include <map>

#include <Eigen/Dense>

#include "demandcast/core.hpp"
#include "demandcast/ingest.hpp"

namespace demandcast {

/// Generator settings. Intensities are multiplicative:
/// lambda = level * season_category((t + phase) mod tau) * exp(slope (t - launch)) * promo.
struct SynthSpec {
  int n_products = 500;
  int n_categories = 20;
  Week weeks = 200;
  int tau = 52;
  int phase = 0;

  /// Category curves are jittered copies of this many base shapes, each 1-3 raised-cosine bumps.
  int n_archetypes = 5;
  double curve_jitter = 0.05;       // log-scale noise per position
  double bump_amplitude_max = 2.0;  // bumps add between 0.5 and this to a flat baseline of 1
  bool flat_seasonality = false;

  double level_log_mean = 2.0;  // log units per week
  double level_log_sd = 0.7;
  double category_effect_sd = 0.3;
  int n_brands = 30;
  double brand_effect_sd = 0.2;
  double price_log_mean = 3.0;
  double price_log_sd = 0.6;

  int min_lifetime = 4;
  double lifetime_median = 30.0;
  double lifetime_log_sd = 0.6;
  double trend_sd = 0.01;  // per-week log slope

  double promo_probability = 0.05;
  double promo_multiplier_min = 1.5;
  double promo_multiplier_max = 3.0;

  double stockout_probability = 0.02;  // chance a stockout run starts in a given live week
  int stockout_max_run = 3;

  std::uint64_t seed = 42;
};

/// Throws std::invalid_argument for out-of-domain settings.
void validate(const SynthSpec& spec);

struct GroundTruth {
  RealMatrix lambda;    // products x T, zero outside the live window
  MaskMatrix promo;
  MaskMatrix stockout;  // the fake zeros
  /// Per category, the seasonal multiplier at panel position p = week mod tau (mean 1).
  std::map<CategoryId, Eigen::VectorXd> category_curves;
  std::map<CategoryId, int> category_archetype;
};

struct SynthPanel {
  SalesPanel panel;
  Catalog catalog;
  CovariateTable covariates;
  GroundTruth truth;
};

/// Deterministic for a given spec. Products launch uniformly in [0, T-8] and stay listed for a
/// log-normal lifetime; stockouts never touch the first or last live week. Covariates: `promo`
/// (mixed, known in advance), `price_index` (mixed, unpredictable) and `temperature` (temporal,
/// unpredictable).
SynthPanel generate_panel(const SynthSpec& spec);

// product_id,week,lambda,promo,stockout for live weeks
void write_ground_truth(const std::filesystem::path& path, const SalesPanel& panel, const GroundTruth& truth);
// category_id,week_of_year,value
void write_true_seasonality(const std::filesystem::path& path, const GroundTruth& truth);

}  // namespace demandcast
