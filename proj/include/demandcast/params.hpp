#pragma once

#include <string>
#include <string_view>

namespace demandcast {

enum class LossKind { poisson, squared };

std::string_view to_string(LossKind loss);
LossKind parse_loss(std::string_view text);

/// Growth controls for a single regression tree.
struct TreeParams {
  int max_depth = 6;
  double lambda = 1.0;            // L2 penalty on leaf weights
  double min_split_loss = 0.05;   // gain threshold subtracted from every split
  double min_child_weight = 1.0;  // minimum hessian sum per child
  double max_delta_step = 0.0;    // |leaf weight| cap, 0 disables
};

struct BoostParams {
  LossKind loss = LossKind::poisson;
  double learning_rate = 0.1;
  int rounds = 1000;
  int early_stop_patience = 50;
  TreeParams tree;
};

struct ForestParams {
  int n_trees = 100;
  int max_depth = 32;
  double min_leaf = 5.0;
  bool bootstrap = true;
  bool feature_subsample = true;
};

}  // namespace demandcast
