#include "coalsel/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "coalsel/rng.hpp"

namespace coalsel {

namespace {

double entropy_bits(const std::vector<double>& counts, double total) {
  double h = 0.0;
  for (const double c : counts) {
    if (c <= 0.0) continue;
    const double p = c / total;
    h -= p * std::log2(p);
  }
  return h;
}

// bins x 2 contingency table of a discretized feature against the labels.
std::vector<std::array<double, 2>> contingency(const FeatureMatrix& matrix,
                                               const std::vector<int>& assignment,
                                               int bins) {
  std::vector<std::array<double, 2>> table(static_cast<std::size_t>(bins), {0.0, 0.0});
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const int cls = matrix.labels[i] == Label::kTrueAlarm ? 1 : 0;
    table[static_cast<std::size_t>(assignment[i])][static_cast<std::size_t>(cls)] += 1.0;
  }
  return table;
}

void require_both_classes(const FeatureMatrix& matrix) {
  bool has_true = false, has_false = false;
  for (const Label l : matrix.labels) {
    (l == Label::kTrueAlarm ? has_true : has_false) = true;
  }
  if (!has_true || !has_false) {
    throw std::invalid_argument("selector: both classes must be present");
  }
}

RankingReport scored_report(const FeatureMatrix& matrix, const Eigen::VectorXd& scores,
                            const std::string& method) {
  RankingReport report =
      rank_features(scores, matrix.feature_names(), static_cast<int>(scores.size()));
  report.method = method;
  return report;
}

}  // namespace

DiscretizationScheme equal_frequency_bins(const FeatureMatrix& matrix, int bins) {
  if (bins < 2) throw std::invalid_argument("discretization: bins must be >= 2");
  const auto n = static_cast<std::size_t>(matrix.sample_count());
  if (n == 0) throw std::invalid_argument("discretization: empty matrix");

  DiscretizationScheme scheme;
  scheme.bins = bins;
  scheme.edges.reserve(static_cast<std::size_t>(matrix.feature_count()));
  scheme.assignments.reserve(static_cast<std::size_t>(matrix.feature_count()));

  for (Eigen::Index col = 0; col < matrix.feature_count(); ++col) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double va = matrix.values(static_cast<Eigen::Index>(a), col);
      const double vb = matrix.values(static_cast<Eigen::Index>(b), col);
      if (va != vb) return va < vb;
      return a < b;
    });

    std::vector<int> assignment(n);
    for (std::size_t pos = 0; pos < n; ++pos) {
      assignment[order[pos]] = static_cast<int>(pos * static_cast<std::size_t>(bins) / n);
    }
    // Ties share the bin of their first occurrence.
    for (std::size_t pos = 1; pos < n; ++pos) {
      const double prev = matrix.values(static_cast<Eigen::Index>(order[pos - 1]), col);
      const double cur = matrix.values(static_cast<Eigen::Index>(order[pos]), col);
      if (cur == prev) assignment[order[pos]] = assignment[order[pos - 1]];
    }

    // Value boundaries between adjacent occupied bins (strictly increasing).
    std::vector<double> edges;
    for (std::size_t pos = 1; pos < n; ++pos) {
      if (assignment[order[pos]] != assignment[order[pos - 1]]) {
        const double left = matrix.values(static_cast<Eigen::Index>(order[pos - 1]), col);
        const double right = matrix.values(static_cast<Eigen::Index>(order[pos]), col);
        edges.push_back(0.5 * (left + right));
      }
    }
    Eigen::VectorXd edge_vec(static_cast<Eigen::Index>(edges.size()));
    for (std::size_t e = 0; e < edges.size(); ++e) {
      edge_vec[static_cast<Eigen::Index>(e)] = edges[e];
    }
    scheme.edges.push_back(std::move(edge_vec));
    scheme.assignments.push_back(std::move(assignment));
  }
  return scheme;
}

RankingReport info_gain(const FeatureMatrix& matrix, const DiscretizationScheme& scheme) {
  require_both_classes(matrix);
  const double n = static_cast<double>(matrix.sample_count());

  std::vector<double> class_counts(2, 0.0);
  for (const Label l : matrix.labels) {
    class_counts[l == Label::kTrueAlarm ? 1 : 0] += 1.0;
  }
  const double label_entropy = entropy_bits(class_counts, n);

  Eigen::VectorXd scores(matrix.feature_count());
  for (Eigen::Index col = 0; col < matrix.feature_count(); ++col) {
    const auto table =
        contingency(matrix, scheme.assignments[static_cast<std::size_t>(col)], scheme.bins);
    double conditional = 0.0;
    for (const auto& row : table) {
      const double mass = row[0] + row[1];
      if (mass <= 0.0) continue;
      conditional += (mass / n) * entropy_bits({row[0], row[1]}, mass);
    }
    scores[col] = label_entropy - conditional;
  }
  return scored_report(matrix, scores, "info-gain");
}

RankingReport gain_ratio(const FeatureMatrix& matrix, const DiscretizationScheme& scheme) {
  require_both_classes(matrix);
  const double n = static_cast<double>(matrix.sample_count());
  const RankingReport ig = info_gain(matrix, scheme);

  // Recover per-feature IG in column order from the full ranking.
  Eigen::VectorXd ig_by_column(matrix.feature_count());
  {
    const auto names = matrix.feature_names();
    std::map<std::string, double> by_name;
    for (const auto& s : ig.scores) by_name[s.feature] = s.value;
    for (Eigen::Index col = 0; col < matrix.feature_count(); ++col) {
      ig_by_column[col] = by_name.at(names[static_cast<std::size_t>(col)]);
    }
  }

  Eigen::VectorXd scores(matrix.feature_count());
  for (Eigen::Index col = 0; col < matrix.feature_count(); ++col) {
    const auto& assignment = scheme.assignments[static_cast<std::size_t>(col)];
    std::vector<double> bin_counts(static_cast<std::size_t>(scheme.bins), 0.0);
    for (const int bin : assignment) bin_counts[static_cast<std::size_t>(bin)] += 1.0;
    const double split_entropy = entropy_bits(bin_counts, n);
    scores[col] = split_entropy > 0.0 ? ig_by_column[col] / split_entropy : 0.0;
  }
  return scored_report(matrix, scores, "gain-ratio");
}

RankingReport chi_square(const FeatureMatrix& matrix, const DiscretizationScheme& scheme) {
  require_both_classes(matrix);
  Eigen::VectorXd scores(matrix.feature_count());
  for (Eigen::Index col = 0; col < matrix.feature_count(); ++col) {
    const auto table =
        contingency(matrix, scheme.assignments[static_cast<std::size_t>(col)], scheme.bins);

    std::array<double, 2> class_totals = {0.0, 0.0};
    double total = 0.0;
    for (const auto& row : table) {
      class_totals[0] += row[0];
      class_totals[1] += row[1];
      total += row[0] + row[1];
    }

    double statistic = 0.0;
    for (const auto& row : table) {
      const double row_total = row[0] + row[1];
      if (row_total <= 0.0) continue;  // empty bin dropped
      for (int cls = 0; cls < 2; ++cls) {
        const double column_total = class_totals[static_cast<std::size_t>(cls)];
        if (column_total <= 0.0) continue;  // empty class column dropped
        const double expected = row_total * column_total / total;
        const double delta = row[static_cast<std::size_t>(cls)] - expected;
        statistic += delta * delta / expected;
      }
    }
    scores[col] = statistic;
  }
  return scored_report(matrix, scores, "chi2");
}

RankingReport relief(const FeatureMatrix& matrix, const ReliefOptions& options) {
  require_both_classes(matrix);
  const auto n = static_cast<std::size_t>(matrix.sample_count());
  const auto d = matrix.feature_count();
  const int k = options.k_neighbors;
  if (k < 1) throw std::invalid_argument("relief: k_neighbors must be >= 1");

  std::array<std::size_t, 2> class_sizes = {0, 0};
  for (const Label l : matrix.labels) {
    ++class_sizes[l == Label::kTrueAlarm ? 1 : 0];
  }
  for (const auto size : class_sizes) {
    if (size <= static_cast<std::size_t>(k)) {
      throw std::invalid_argument("relief: each class needs more than k_neighbors = " +
                                  std::to_string(k) + " members");
    }
  }

  // Range-normalized copy; zero-range features contribute no difference.
  Eigen::MatrixXd normalized(matrix.sample_count(), d);
  for (Eigen::Index col = 0; col < d; ++col) {
    const double lo = matrix.values.col(col).minCoeff();
    const double hi = matrix.values.col(col).maxCoeff();
    const double range = hi - lo;
    if (range > 0.0) {
      normalized.col(col) = (matrix.values.col(col).array() - lo) / range;
    } else {
      normalized.col(col).setZero();
    }
  }

  // Which samples to visit.
  std::vector<std::size_t> visits;
  if (options.sample_draws <= 0 ||
      options.sample_draws >= static_cast<int>(n)) {
    visits.resize(n);
    std::iota(visits.begin(), visits.end(), 0);
  } else {
    Rng rng(options.seed);
    for (int i = 0; i < options.sample_draws; ++i) {
      visits.push_back(static_cast<std::size_t>(rng.next_below(n)));
    }
  }
  const double m = static_cast<double>(visits.size());

  Eigen::VectorXd weights = Eigen::VectorXd::Zero(d);
  std::vector<std::pair<double, std::size_t>> hits, misses;
  for (const std::size_t self : visits) {
    hits.clear();
    misses.clear();
    const int self_class = matrix.labels[self] == Label::kTrueAlarm ? 1 : 0;
    for (std::size_t other = 0; other < n; ++other) {
      if (other == self) continue;
      const double distance =
          (normalized.row(static_cast<Eigen::Index>(other)) -
           normalized.row(static_cast<Eigen::Index>(self)))
              .norm();
      const int other_class = matrix.labels[other] == Label::kTrueAlarm ? 1 : 0;
      auto& bucket = other_class == self_class ? hits : misses;
      bucket.emplace_back(distance, other);
    }
    auto nearest = [k](std::vector<std::pair<double, std::size_t>>& bucket) {
      const auto count = std::min<std::size_t>(static_cast<std::size_t>(k), bucket.size());
      std::partial_sort(bucket.begin(), bucket.begin() + static_cast<std::ptrdiff_t>(count),
                        bucket.end());
      bucket.resize(count);
    };
    nearest(hits);
    nearest(misses);

    for (Eigen::Index col = 0; col < d; ++col) {
      double hit_diff = 0.0, miss_diff = 0.0;
      for (const auto& [dist, idx] : hits) {
        hit_diff += std::abs(normalized(static_cast<Eigen::Index>(idx), col) -
                             normalized(static_cast<Eigen::Index>(self), col));
      }
      for (const auto& [dist, idx] : misses) {
        miss_diff += std::abs(normalized(static_cast<Eigen::Index>(idx), col) -
                              normalized(static_cast<Eigen::Index>(self), col));
      }
      weights[col] += miss_diff / (m * static_cast<double>(k)) -
                      hit_diff / (m * static_cast<double>(k));
    }
  }

  RankingReport report = scored_report(matrix, weights, "relief");
  report.seed = options.seed;
  return report;
}

}  // namespace coalsel
