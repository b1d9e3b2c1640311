#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <vector>

#include "coalsel/dataset.hpp"
#include "coalsel/features.hpp"

namespace coalsel {

// Class-conditional Gaussian model. kDiagonal is Gaussian naive Bayes
// (independent features given the class); kFull fits a covariance matrix per
// class, i.e. the fully connected Gaussian Bayes network, which is what lets
// the payoff function see feature interactions such as planted parities.
enum class CovarianceModel { kDiagonal, kFull };

std::string to_string(CovarianceModel model);
CovarianceModel covariance_model_from_string(const std::string& name);

struct ClassifierOptions {
  CovarianceModel covariance = CovarianceModel::kDiagonal;
  // Per-feature variance floor: scale * (global feature variance + 1e-12).
  double variance_floor_scale = 1e-9;
};

// Class index order is fixed: 0 = false-alarm, 1 = true-alarm (lexicographic
// by label string, which is also the documented tie-break order).
struct GaussianNBModel {
  std::array<double, 2> log_priors{};
  Eigen::MatrixXd means;        // 2 x d
  Eigen::MatrixXd variances;    // 2 x d, floored
  Eigen::VectorXd variance_floor;  // d, the floor that was applied
  std::array<Eigen::MatrixXd, 2> covariances;  // kFull only, d x d each
  CovarianceModel covariance_model = CovarianceModel::kDiagonal;

  Eigen::Index feature_count() const { return means.cols(); }
};

// Empirical per-class moments over the selected columns, with variance
// flooring. Requires a non-empty subset and both classes present.
GaussianNBModel fit(const FeatureMatrix& matrix, const std::vector<int>& columns,
                    const ClassifierOptions& options = {});

// Rows must already be sliced to the model's feature count. Ties resolve to
// the lexicographically smaller label ("false").
std::vector<Label> predict(const GaussianNBModel& model, const Eigen::MatrixXd& rows);

// Per-class log posterior (up to the shared evidence term); exposed for
// tests that check the density arithmetic directly.
Eigen::Vector2d log_joint(const GaussianNBModel& model, const Eigen::VectorXd& row);

struct EvalResult {
  double accuracy = 0.0;
  std::array<double, 2> recall{};                  // [false-alarm, true-alarm]
  std::array<std::array<std::int64_t, 2>, 2> confusion{};  // [actual][predicted]

  std::int64_t total() const {
    return confusion[0][0] + confusion[0][1] + confusion[1][0] + confusion[1][1];
  }
};

// k-fold cross validation under a fixed SplitPlan: fit on k-1 folds, score
// the held-out fold, pool the confusion matrix. Rejects folds whose training
// part is single-class.
EvalResult cv_accuracy(const FeatureMatrix& matrix, const std::vector<int>& columns,
                       const SplitPlan& plan, const ClassifierOptions& options = {});

// Fraction of the majority class; the centering constant v0 of the
// feature-selection game.
double majority_class_rate(const std::vector<Label>& labels);

}  // namespace coalsel
