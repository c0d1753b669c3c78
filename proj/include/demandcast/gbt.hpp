#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "demandcast/features.hpp"
#include "demandcast/params.hpp"
#include "demandcast/tree.hpp"

namespace demandcast {

/// Second-order boosted ensemble. Scores live in raw (link) space.
struct BoostedModel {
  double base_score = 0.0;
  std::vector<Tree> trees;
  double learning_rate = 0.1;
  LossKind loss = LossKind::poisson;
  int best_round = 0;  // number of trees used at prediction time
  std::vector<std::string> feature_names;

  /// Mean training / validation loss with r trees at index r (index 0 is the base score alone).
  std::vector<double> train_loss;
  std::vector<double> valid_loss;

  [[nodiscard]] Eigen::VectorXd predict_raw(const Eigen::MatrixXd& x) const;
  /// exp(raw) under poisson, raw under squared.
  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

inline constexpr double kPoissonBaseEpsilon = 1e-8;

/// Fits up to params.rounds trees; with validation data, stops once the validation loss has not
/// improved for early_stop_patience rounds and keeps the best prefix. Throws std::invalid_argument
/// on empty input, mismatched schemas or negative poisson targets.
BoostedModel train(const FeatureMatrix& train, const BoostParams& params, const FeatureMatrix* valid = nullptr);

BoostedModel train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<std::string> feature_names,
                   const BoostParams& params, const Eigen::MatrixXd* valid_x = nullptr,
                   const Eigen::VectorXd* valid_y = nullptr);

/// Forecasts for matrix rows; throws std::invalid_argument when the columns differ from the model schema.
Eigen::VectorXd predict(const BoostedModel& model, const FeatureMatrix& rows);

/// Bagged squared-loss trees averaged at prediction time.
struct ForestModel {
  std::vector<Tree> trees;
  std::vector<std::string> feature_names;

  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

/// Each tree sees a bootstrap resample (when enabled) and sqrt(p) random features per split
/// (when enabled); leaves hold the mean target. Deterministic for a given seed.
ForestModel train_forest(const FeatureMatrix& train, const ForestParams& params, std::uint64_t seed);
ForestModel train_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<std::string> feature_names,
                         const ForestParams& params, std::uint64_t seed);

Eigen::VectorXd predict(const ForestModel& model, const FeatureMatrix& rows);

}  // namespace demandcast
