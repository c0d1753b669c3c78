#pragma once

#include "demandcast/pipeline.hpp"
#include "demandcast/synth.hpp"

namespace testing {

/// 60 products over 80 weeks with a short boosting budget.
inline demandcast::DataSet small_dataset(std::uint64_t seed = 5) {
  demandcast::SynthSpec spec;
  spec.n_products = 60;
  spec.n_categories = 4;
  spec.weeks = 80;
  spec.seed = seed;
  auto s = demandcast::generate_panel(spec);
  return {std::move(s.panel), std::move(s.catalog), std::move(s.covariates)};
}

inline demandcast::RunConfig small_config() {
  demandcast::RunConfig c;
  c.train_weeks = 56;
  c.valid_weeks = 10;
  c.test_weeks = 14;
  c.boost.rounds = 40;
  c.boost.early_stop_patience = 10;
  c.boost.learning_rate = 0.2;
  c.forest.n_trees = 8;
  c.clusters = 2;
  c.allow_out_of_range = true;
  return c;
}

}  // namespace testing
