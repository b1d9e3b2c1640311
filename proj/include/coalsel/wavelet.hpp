#pragma once

#include <Eigen/Core>

#include <string>
#include <utility>
#include <vector>

namespace coalsel {

// How a signal is extended past its ends before filtering.
//  - kPeriodic: circular extension; the transform is an orthogonal map, so
//    coefficient count equals sample count (odd lengths are padded by
//    repeating the last sample) and energy is preserved exactly when every
//    level input is even.
//  - kSymmetric: half-sample reflection; each band keeps
//    floor((n + taps - 1) / 2) coefficients, which is redundant but makes the
//    reconstruction exact for any length.
enum class BoundaryMode { kPeriodic, kSymmetric };

std::string to_string(BoundaryMode mode);
BoundaryMode boundary_mode_from_string(const std::string& name);

// Orthonormal two-channel filter pair. low_pass holds the scaling taps in
// the standard extremal-phase order; high_pass is its quadrature mirror
// high_pass[k] = (-1)^k * low_pass[taps-1-k].
struct WaveletFilter {
  std::string name;
  Eigen::VectorXd low_pass;
  Eigen::VectorXd high_pass;

  int taps() const { return static_cast<int>(low_pass.size()); }
  int vanishing_moments() const { return taps() / 2; }

  // Throws std::invalid_argument if any invariant fails: even tap count,
  // unit tap energy, sum sqrt(2), quadrature mirror relation.
  void validate() const;
};

// Daubechies filter of the given vanishing-moment order (4 or 8, i.e. 8 or
// 16 taps). Taps are validated before being returned.
WaveletFilter daubechies_filter(int order);

// Parses "db4" / "db8".
WaveletFilter wavelet_filter_from_name(const std::string& name);

// One channel of uniformly sampled waveform data.
struct Signal {
  std::string channel;
  Eigen::VectorXd samples;
  double sample_rate = 0.0;

  // Non-empty and fully finite.
  void validate() const;
};

// Output of a multi-level analysis: one detail vector per level 1..depth and
// the final approximation at the deepest level. level_lengths[j] is the
// length of the level-(j+1) input, which the inverse needs to undo padding.
struct WaveletDecomposition {
  std::vector<Eigen::VectorXd> details;
  Eigen::VectorXd approx;
  std::string filter_name;
  BoundaryMode boundary = BoundaryMode::kPeriodic;
  std::string channel;
  double sample_rate = 0.0;
  std::vector<Eigen::Index> level_lengths;

  int depth() const { return static_cast<int>(details.size()); }
  Eigen::Index signal_length() const {
    return level_lengths.empty() ? 0 : level_lengths.front();
  }
  // Total stored coefficients across all bands.
  Eigen::Index coefficient_count() const;
};

// Single analysis/synthesis steps, exposed for tests and oracles.
// Analysis is correlation with the taps followed by dyadic downsampling.
std::pair<Eigen::VectorXd, Eigen::VectorXd> dwt_level(const Eigen::VectorXd& x,
                                                      const WaveletFilter& filter,
                                                      BoundaryMode mode);
Eigen::VectorXd idwt_level(const Eigen::VectorXd& approx, const Eigen::VectorXd& detail,
                           const WaveletFilter& filter, BoundaryMode mode,
                           Eigen::Index output_length);

// Cascade analysis. Requires depth >= 1 and signal length >= max(2^depth,
// taps); rejects non-finite samples.
WaveletDecomposition dwt_multilevel(const Signal& signal, const WaveletFilter& filter,
                                    int depth, BoundaryMode boundary = BoundaryMode::kPeriodic);

// Exact inverse of dwt_multilevel. The filter must match decomp.filter_name.
Signal idwt_multilevel(const WaveletDecomposition& decomp, const WaveletFilter& filter);

}  // namespace coalsel
