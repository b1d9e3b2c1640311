#include "coalsel/classifier.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace coalsel {

std::string to_string(CovarianceModel model) {
  return model == CovarianceModel::kDiagonal ? "diag" : "full";
}

CovarianceModel covariance_model_from_string(const std::string& name) {
  if (name == "diag") return CovarianceModel::kDiagonal;
  if (name == "full") return CovarianceModel::kFull;
  throw std::invalid_argument("unknown covariance model '" + name +
                              "' (expected 'diag' or 'full')");
}

namespace {

constexpr double kLogTwoPi = 1.8378770664093453;  // log(2*pi)

Eigen::MatrixXd slice(const FeatureMatrix& matrix, const std::vector<int>& columns,
                      const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(columns.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          matrix.values(rows[r], columns[c]);
    }
  }
  return out;
}

GaussianNBModel fit_rows(const FeatureMatrix& matrix, const std::vector<int>& columns,
                         const std::vector<Eigen::Index>& rows,
                         const ClassifierOptions& options) {
  if (columns.empty()) {
    throw std::invalid_argument("classifier fit: empty feature subset");
  }
  for (const int c : columns) {
    if (c < 0 || c >= matrix.feature_count()) {
      throw std::invalid_argument("classifier fit: column index " + std::to_string(c) +
                                  " out of range");
    }
  }

  const auto d = static_cast<Eigen::Index>(columns.size());
  const Eigen::MatrixXd data = slice(matrix, columns, rows);
  const auto n = data.rows();

  std::array<std::vector<Eigen::Index>, 2> members;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int cls = matrix.labels[static_cast<std::size_t>(rows[i])] == Label::kTrueAlarm ? 1 : 0;
    members[static_cast<std::size_t>(cls)].push_back(static_cast<Eigen::Index>(i));
  }
  if (members[0].empty() || members[1].empty()) {
    throw std::invalid_argument("classifier fit: training data contains a single class");
  }

  // Per-feature floor from the pooled variance over the training rows.
  Eigen::VectorXd floor(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double mu = data.col(j).mean();
    const double var = (data.col(j).array() - mu).square().mean();
    floor[j] = options.variance_floor_scale * (var + 1e-12);
  }

  GaussianNBModel model;
  model.covariance_model = options.covariance;
  model.variance_floor = floor;
  model.means.resize(2, d);
  model.variances.resize(2, d);

  for (int cls = 0; cls < 2; ++cls) {
    const auto& idx = members[static_cast<std::size_t>(cls)];
    const auto m = static_cast<Eigen::Index>(idx.size());
    model.log_priors[static_cast<std::size_t>(cls)] =
        std::log(static_cast<double>(m) / static_cast<double>(n));

    Eigen::MatrixXd class_rows(m, d);
    for (Eigen::Index r = 0; r < m; ++r) class_rows.row(r) = data.row(idx[static_cast<std::size_t>(r)]);
    const Eigen::RowVectorXd mu = class_rows.colwise().mean();
    model.means.row(cls) = mu;

    const Eigen::MatrixXd centered = class_rows.rowwise() - mu;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double var = centered.col(j).squaredNorm() / static_cast<double>(m);
      model.variances(cls, j) = std::max(var, floor[j]);
    }
    if (options.covariance == CovarianceModel::kFull) {
      Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(m);
      for (Eigen::Index j = 0; j < d; ++j) {
        cov(j, j) = std::max(cov(j, j), floor[j]);
      }
      // Deterministic ridge escalation until the factorization succeeds.
      double ridge = 0.0;
      for (int attempt = 0; attempt < 60; ++attempt) {
        Eigen::LLT<Eigen::MatrixXd> llt(cov + ridge * Eigen::MatrixXd::Identity(d, d));
        if (llt.info() == Eigen::Success) {
          if (ridge > 0.0) cov += ridge * Eigen::MatrixXd::Identity(d, d);
          break;
        }
        ridge = (ridge == 0.0) ? 1e-12 * (1.0 + cov.trace() / static_cast<double>(d))
                               : ridge * 10.0;
      }
      model.covariances[static_cast<std::size_t>(cls)] = std::move(cov);
    }
  }
  return model;
}

}  // namespace

GaussianNBModel fit(const FeatureMatrix& matrix, const std::vector<int>& columns,
                    const ClassifierOptions& options) {
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(matrix.sample_count()));
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<Eigen::Index>(i);
  return fit_rows(matrix, columns, rows, options);
}

Eigen::Vector2d log_joint(const GaussianNBModel& model, const Eigen::VectorXd& row) {
  const Eigen::Index d = model.feature_count();
  Eigen::Vector2d scores;
  for (int cls = 0; cls < 2; ++cls) {
    double score = model.log_priors[static_cast<std::size_t>(cls)];
    if (model.covariance_model == CovarianceModel::kDiagonal) {
      for (Eigen::Index j = 0; j < d; ++j) {
        const double var = model.variances(cls, j);
        const double delta = row[j] - model.means(cls, j);
        score += -0.5 * (kLogTwoPi + std::log(var)) - 0.5 * delta * delta / var;
      }
    } else {
      const Eigen::MatrixXd& cov = model.covariances[static_cast<std::size_t>(cls)];
      const Eigen::LLT<Eigen::MatrixXd> llt(cov);
      const Eigen::VectorXd delta = row - model.means.row(cls).transpose();
      const Eigen::VectorXd solved = llt.solve(delta);
      double log_det = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) log_det += std::log(llt.matrixL()(j, j));
      log_det *= 2.0;
      score += -0.5 * (static_cast<double>(d) * kLogTwoPi + log_det) -
               0.5 * delta.dot(solved);
    }
    scores[cls] = score;
  }
  return scores;
}

std::vector<Label> predict(const GaussianNBModel& model, const Eigen::MatrixXd& rows) {
  if (rows.cols() != model.feature_count()) {
    throw std::invalid_argument("predict: row width " + std::to_string(rows.cols()) +
                                " does not match model feature count " +
                                std::to_string(model.feature_count()));
  }
  std::vector<Label> out;
  out.reserve(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const Eigen::Vector2d scores = log_joint(model, rows.row(r).transpose());
    // Strict improvement required: exact ties keep the smaller label.
    out.push_back(scores[1] > scores[0] ? Label::kTrueAlarm : Label::kFalseAlarm);
  }
  return out;
}

EvalResult cv_accuracy(const FeatureMatrix& matrix, const std::vector<int>& columns,
                       const SplitPlan& plan, const ClassifierOptions& options) {
  if (static_cast<Eigen::Index>(plan.fold_of.size()) != matrix.sample_count()) {
    throw std::invalid_argument("cv_accuracy: split plan does not cover the matrix rows");
  }
  if (columns.empty()) {
    throw std::invalid_argument("cv_accuracy: empty feature subset");
  }

  EvalResult result;
  for (int fold = 0; fold < plan.k; ++fold) {
    std::vector<Eigen::Index> train_rows, test_rows;
    for (std::size_t i = 0; i < plan.fold_of.size(); ++i) {
      if (plan.fold_of[i] == fold) {
        test_rows.push_back(static_cast<Eigen::Index>(i));
      } else {
        train_rows.push_back(static_cast<Eigen::Index>(i));
      }
    }
    if (test_rows.empty()) continue;
    const GaussianNBModel model = fit_rows(matrix, columns, train_rows, options);
    const Eigen::MatrixXd test = slice(matrix, columns, test_rows);
    const std::vector<Label> predicted = predict(model, test);
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
      const int actual =
          matrix.labels[static_cast<std::size_t>(test_rows[i])] == Label::kTrueAlarm ? 1 : 0;
      const int guess = predicted[i] == Label::kTrueAlarm ? 1 : 0;
      ++result.confusion[static_cast<std::size_t>(actual)][static_cast<std::size_t>(guess)];
    }
  }

  const auto total = result.total();
  if (total > 0) {
    result.accuracy =
        static_cast<double>(result.confusion[0][0] + result.confusion[1][1]) /
        static_cast<double>(total);
  }
  for (int cls = 0; cls < 2; ++cls) {
    const auto actual_total = result.confusion[static_cast<std::size_t>(cls)][0] +
                              result.confusion[static_cast<std::size_t>(cls)][1];
    result.recall[static_cast<std::size_t>(cls)] =
        actual_total > 0 ? static_cast<double>(
                               result.confusion[static_cast<std::size_t>(cls)]
                                               [static_cast<std::size_t>(cls)]) /
                               static_cast<double>(actual_total)
                         : 0.0;
  }
  return result;
}

double majority_class_rate(const std::vector<Label>& labels) {
  if (labels.empty()) throw std::invalid_argument("majority_class_rate: no labels");
  std::size_t true_count = 0;
  for (const Label l : labels) {
    if (l == Label::kTrueAlarm) ++true_count;
  }
  const std::size_t majority = std::max(true_count, labels.size() - true_count);
  return static_cast<double>(majority) / static_cast<double>(labels.size());
}

}  // namespace coalsel
