#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace coalsel {

// Scalar statistics over dense Eigen expressions. Every function is pure and
// total on non-empty finite input; degenerate cases (zero variance, zero
// range) are mapped to the documented conventions instead of NaN.

template <typename Derived>
typename Derived::Scalar mean(const Eigen::MatrixBase<Derived>& v) {
  return v.derived().mean();
}

// Population standard deviation (divides by n).
template <typename Derived>
typename Derived::Scalar stddev_population(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar mu = v.derived().mean();
  const Scalar var = (v.derived().array() - mu).square().mean();
  return std::sqrt(std::max(var, Scalar(0)));
}

template <typename Derived>
typename Derived::Scalar skewness(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar mu = v.derived().mean();
  const auto centered = (v.derived().array() - mu).eval();
  const Scalar m2 = centered.square().mean();
  if (m2 <= Scalar(0)) return Scalar(0);
  const Scalar m3 = centered.cube().mean();
  return m3 / std::pow(m2, Scalar(1.5));
}

// Excess kurtosis: m4/m2^2 - 3; zero-variance input maps to 0.
template <typename Derived>
typename Derived::Scalar excess_kurtosis(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar mu = v.derived().mean();
  const auto centered = (v.derived().array() - mu).eval();
  const Scalar m2 = centered.square().mean();
  if (m2 <= Scalar(0)) return Scalar(0);
  const Scalar m4 = centered.square().square().mean();
  return m4 / (m2 * m2) - Scalar(3);
}

template <typename Derived>
typename Derived::Scalar root_mean_square(const Eigen::MatrixBase<Derived>& v) {
  return std::sqrt(v.derived().array().square().mean());
}

template <typename Derived>
typename Derived::Scalar energy(const Eigen::MatrixBase<Derived>& v) {
  return v.derived().squaredNorm();
}

// Quantile with linear interpolation between order statistics (the rank is
// q*(n-1)), matching the common "linear" definition.
template <typename Derived>
typename Derived::Scalar quantile(const Eigen::MatrixBase<Derived>& v, double q) {
  using Scalar = typename Derived::Scalar;
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile: q outside [0,1]");
  std::vector<Scalar> sorted(static_cast<std::size_t>(v.size()));
  Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(sorted.data(), v.size()) = v.derived();
  std::sort(sorted.begin(), sorted.end());
  const double rank = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(rank);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return static_cast<Scalar>((1.0 - frac) * sorted[lo] + frac * sorted[hi]);
}

template <typename Derived>
typename Derived::Scalar median(const Eigen::MatrixBase<Derived>& v) {
  return quantile(v, 0.5);
}

template <typename Derived>
typename Derived::Scalar interquartile_range(const Eigen::MatrixBase<Derived>& v) {
  return quantile(v, 0.75) - quantile(v, 0.25);
}

template <typename Derived>
typename Derived::Scalar mean_absolute_deviation(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar mu = v.derived().mean();
  return (v.derived().array() - mu).abs().mean();
}

// Fraction of adjacent sample pairs with a strict sign change.
template <typename Derived>
typename Derived::Scalar zero_crossing_rate(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const auto& x = v.derived();
  if (x.size() < 2) return Scalar(0);
  Eigen::Index crossings = 0;
  for (Eigen::Index i = 1; i < x.size(); ++i) {
    if (x[i - 1] * x[i] < Scalar(0)) ++crossings;
  }
  return static_cast<Scalar>(crossings) / static_cast<Scalar>(x.size() - 1);
}

// Total variation of the sample path: sum of |x[i] - x[i-1]|.
template <typename Derived>
typename Derived::Scalar line_length(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const auto& x = v.derived();
  if (x.size() < 2) return Scalar(0);
  return (x.tail(x.size() - 1) - x.head(x.size() - 1)).array().abs().sum();
}

enum class EntropyConvention {
  kSingleBin,  // all-equal input occupies one bin: 0 bits
  kEqualMass,  // all-equal input treated as n equal mass points: log2(n) bits
};

// Shannon entropy (bits) of the equal-width histogram of |v| over
// [min|v|, max|v|], with 0*log0 = 0.
template <typename Derived>
typename Derived::Scalar shannon_entropy_bits(
    const Eigen::MatrixBase<Derived>& v, int bins = 16,
    EntropyConvention convention = EntropyConvention::kSingleBin) {
  using Scalar = typename Derived::Scalar;
  if (bins < 1) throw std::invalid_argument("shannon_entropy_bits: bins must be >= 1");
  const auto magnitudes = v.derived().array().abs().eval();
  const Scalar lo = magnitudes.minCoeff();
  const Scalar hi = magnitudes.maxCoeff();
  const Scalar width = hi - lo;
  if (!(width > Scalar(0))) {
    if (convention == EntropyConvention::kEqualMass) {
      return std::log2(static_cast<Scalar>(v.size()));
    }
    return Scalar(0);
  }
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(bins), 0);
  for (Eigen::Index i = 0; i < magnitudes.size(); ++i) {
    auto bin = static_cast<Eigen::Index>((magnitudes[i] - lo) / width *
                                         static_cast<Scalar>(bins));
    bin = std::clamp<Eigen::Index>(bin, 0, bins - 1);
    ++counts[static_cast<std::size_t>(bin)];
  }
  Scalar h = 0;
  const auto n = static_cast<Scalar>(v.size());
  for (const Eigen::Index c : counts) {
    if (c == 0) continue;
    const Scalar p = static_cast<Scalar>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

// Sum of log(x_i^2) with log(0) mapped to 0 (the "log-energy entropy" of the
// MATLAB wavelet toolbox).
template <typename Derived>
typename Derived::Scalar log_energy_entropy(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  Scalar acc = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const Scalar sq = v.derived()[i] * v.derived()[i];
    if (sq > Scalar(0)) acc += std::log(sq);
  }
  return acc;
}

}  // namespace coalsel
