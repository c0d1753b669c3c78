#include "demandcast/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace demandcast {

Eigen::VectorXd BoostedModel::predict_raw(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd raw = Eigen::VectorXd::Constant(x.rows(), base_score);
  const int used = std::min<int>(best_round, static_cast<int>(trees.size()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double sum = 0.0;
    for (int k = 0; k < used; ++k) sum += trees[k].predict(x.row(r));
    raw(r) += learning_rate * sum;
  }
  return raw;
}

Eigen::VectorXd BoostedModel::predict(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd raw = predict_raw(x);
  if (loss == LossKind::poisson) return raw.array().exp().matrix();
  return raw;
}

namespace {

double mean_loss(LossKind loss, const Eigen::VectorXd& y, const Eigen::VectorXd& raw) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) total += loss_value(loss, y(i), raw(i));
  return total / static_cast<double>(y.size());
}

void check_targets(LossKind loss, const Eigen::VectorXd& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y(i))) throw std::invalid_argument("train: non-finite target");
    if (loss == LossKind::poisson && y(i) < 0.0) throw std::invalid_argument("train: poisson targets must be >= 0");
  }
}

}  // namespace

BoostedModel train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<std::string> feature_names,
                   const BoostParams& params, const Eigen::MatrixXd* valid_x, const Eigen::VectorXd* valid_y) {
  if (x.rows() == 0) throw std::invalid_argument("train: empty training matrix");
  if (y.size() != x.rows()) throw std::invalid_argument("train: target length mismatch");
  if (static_cast<Eigen::Index>(feature_names.size()) != x.cols()) {
    throw std::invalid_argument("train: feature name count mismatch");
  }
  if (params.rounds < 0) throw std::invalid_argument("train: rounds must be >= 0");
  if (!(params.learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be > 0");
  check_targets(params.loss, y);
  const bool has_valid = valid_x != nullptr && valid_y != nullptr && valid_x->rows() > 0;
  if (has_valid) {
    if (valid_x->cols() != x.cols()) throw std::invalid_argument("train: validation schema mismatch");
    if (valid_y->size() != valid_x->rows()) throw std::invalid_argument("train: validation target length mismatch");
    check_targets(params.loss, *valid_y);
  }

  BoostedModel model;
  model.loss = params.loss;
  model.learning_rate = params.learning_rate;
  model.feature_names = std::move(feature_names);
  const double mean = y.mean();
  model.base_score = params.loss == LossKind::poisson ? std::log(mean + kPoissonBaseEpsilon) : mean;

  const auto n = x.rows();
  Eigen::VectorXd raw = Eigen::VectorXd::Constant(n, model.base_score);
  Eigen::VectorXd valid_raw;
  if (has_valid) valid_raw = Eigen::VectorXd::Constant(valid_x->rows(), model.base_score);

  std::vector<int> samples(static_cast<std::size_t>(n));
  std::iota(samples.begin(), samples.end(), 0);
  const SortedColumns sorted(x, samples);
  std::vector<double> grad(n), hess(n);

  model.train_loss.push_back(mean_loss(params.loss, y, raw));
  if (has_valid) model.valid_loss.push_back(mean_loss(params.loss, *valid_y, valid_raw));
  int best = 0;

  for (int round = 1; round <= params.rounds; ++round) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto gh = grad_hess(params.loss, y(i), raw(i));
      grad[i] = gh.g;
      hess[i] = gh.h;
    }
    auto fitted = fit_tree(x, samples, sorted, grad, hess, params.tree);
    for (Eigen::Index i = 0; i < n; ++i) {
      raw(i) += params.learning_rate * fitted.tree.nodes[fitted.leaf_of_sample[i]].weight;
    }
    model.train_loss.push_back(mean_loss(params.loss, y, raw));
    if (has_valid) {
      for (Eigen::Index i = 0; i < valid_x->rows(); ++i) {
        valid_raw(i) += params.learning_rate * fitted.tree.predict(valid_x->row(i));
      }
      model.valid_loss.push_back(mean_loss(params.loss, *valid_y, valid_raw));
    }
    model.trees.push_back(std::move(fitted.tree));
    if (has_valid) {
      if (model.valid_loss[round] < model.valid_loss[best]) best = round;
      if (round - best >= params.early_stop_patience) break;
    }
  }
  model.best_round = has_valid ? best : static_cast<int>(model.trees.size());
  return model;
}

namespace {

void check_schema(const std::vector<std::string>& expected, const std::vector<std::string>& actual) {
  if (expected != actual) {
    std::string msg = "feature schema mismatch: model has " + std::to_string(expected.size()) + " columns, rows have " +
                      std::to_string(actual.size());
    for (std::size_t i = 0; i < std::min(expected.size(), actual.size()); ++i) {
      if (expected[i] != actual[i]) {
        msg += " (first difference at column " + std::to_string(i) + ": '" + expected[i] + "' vs '" + actual[i] + "')";
        break;
      }
    }
    throw std::invalid_argument(msg);
  }
}

}  // namespace

BoostedModel train(const FeatureMatrix& train_rows, const BoostParams& params, const FeatureMatrix* valid) {
  if (train_rows.rows() == 0) throw std::invalid_argument("train: empty training matrix");
  if (!train_rows.has_targets()) throw std::invalid_argument("train: training rows carry no targets");
  if (valid != nullptr && valid->rows() > 0) {
    check_schema(train_rows.columns, valid->columns);
    if (!valid->has_targets()) throw std::invalid_argument("train: validation rows carry no targets");
    return train(train_rows.values, train_rows.targets, train_rows.columns, params, &valid->values, &valid->targets);
  }
  return train(train_rows.values, train_rows.targets, train_rows.columns, params);
}

Eigen::VectorXd predict(const BoostedModel& model, const FeatureMatrix& rows) {
  check_schema(model.feature_names, rows.columns);
  return model.predict(rows.values);
}

Eigen::VectorXd ForestModel::predict(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
  if (trees.empty()) return out;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict(x.row(r));
    out(r) = sum / static_cast<double>(trees.size());
  }
  return out;
}

Eigen::VectorXd predict(const ForestModel& model, const FeatureMatrix& rows) {
  check_schema(model.feature_names, rows.columns);
  return model.predict(rows.values);
}

}  // namespace demandcast
