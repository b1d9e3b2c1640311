#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "coalsel/features.hpp"
#include "coalsel/report.hpp"

namespace coalsel {

// Equal-frequency discretization. Samples are assigned by rank (ties share
// the first occurrence's bin), which makes the assignment invariant under
// strictly monotone transformations; `edges` records the strictly increasing
// value boundaries between occupied bins.
struct DiscretizationScheme {
  int bins = 10;
  std::vector<Eigen::VectorXd> edges;          // per feature
  std::vector<std::vector<int>> assignments;   // per feature, per sample
};

DiscretizationScheme equal_frequency_bins(const FeatureMatrix& matrix, int bins = 10);

// Information gain of the label given the binned feature, in bits:
// IG = H(Y) - H(Y | X_binned), with 0 log 0 = 0. Full ranking, one entry per
// feature.
RankingReport info_gain(const FeatureMatrix& matrix, const DiscretizationScheme& scheme);

// IG / H(X_binned); features with zero split entropy score 0.
RankingReport gain_ratio(const FeatureMatrix& matrix, const DiscretizationScheme& scheme);

// Pearson chi-square statistic of the bins x classes table; empty rows and
// columns are dropped before the expected counts are formed.
RankingReport chi_square(const FeatureMatrix& matrix, const DiscretizationScheme& scheme);

struct ReliefOptions {
  int sample_draws = 0;  // 0 = every sample, in index order
  int k_neighbors = 10;
  std::uint64_t seed = 1;
};

// ReliefF weights: W[f] accumulates (miss diffs - hit diffs) / (m * k) with
// range-normalized absolute differences and Euclidean neighbor search over
// the normalized features. Requires more than k_neighbors members per class.
RankingReport relief(const FeatureMatrix& matrix, const ReliefOptions& options = {});

}  // namespace coalsel
