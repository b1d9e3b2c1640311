#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "coalsel/dataset.hpp"
#include "coalsel/wavelet.hpp"

namespace coalsel {

// The per-vector scalar statistics. The default set has 10 entries, so three
// channels at six levels give 180 columns; the extended set doubles it.
enum class FeatureCatalog { kDefault10, kExtended20 };

const std::vector<std::string>& catalog_stat_names(FeatureCatalog catalog);
std::string to_string(FeatureCatalog catalog);
FeatureCatalog catalog_from_string(const std::string& name);

// Identifies a column as "<channel>_L<level>_<stat>". Channel names are
// alphanumeric (enforced at ingestion), so the first underscore always
// starts the level token and the triple round-trips through the string.
struct FeatureDescriptor {
  std::string channel;
  int level = 1;
  std::string statname;

  std::string name() const;
  static FeatureDescriptor parse(const std::string& name);

  bool operator==(const FeatureDescriptor&) const = default;
};

// All catalog statistics of one coefficient vector, in catalog order.
// Rejects empty or non-finite input; every output value is finite.
Eigen::VectorXd extract_feature_values(const Eigen::VectorXd& coefficients,
                                       FeatureCatalog catalog = FeatureCatalog::kDefault10);

// Same values keyed by stat name.
std::map<std::string, double> extract_features(const Eigen::VectorXd& coefficients,
                                               FeatureCatalog catalog = FeatureCatalog::kDefault10);

struct FeatureMatrix {
  std::vector<FeatureDescriptor> descriptors;
  Eigen::MatrixXd values;  // samples x features
  std::vector<Label> labels;

  Eigen::Index sample_count() const { return values.rows(); }
  Eigen::Index feature_count() const { return values.cols(); }
  std::vector<std::string> feature_names() const;
  // Index of a named column, or -1.
  Eigen::Index column_index(const std::string& name) const;
  // Row/label consistency, descriptor uniqueness, finiteness.
  void validate() const;
};

std::map<std::string, WaveletFilter> default_filter_map(
    const std::vector<std::string>& channel_order);

// Decomposes every channel of every record to `depth` levels and extracts the
// catalog statistics of the detail vectors (levels 1..depth; the final
// approximation is not used, matching the 18-vectors-per-sample layout).
// Column order is channel (in channel_order), then level, then catalog order.
FeatureMatrix build_feature_matrix(std::span<const Record> records,
                                   const std::vector<std::string>& channel_order,
                                   const std::map<std::string, WaveletFilter>& filter_map,
                                   int depth,
                                   FeatureCatalog catalog = FeatureCatalog::kDefault10,
                                   BoundaryMode boundary = BoundaryMode::kPeriodic);

// Header row of descriptor names plus a trailing "label" column; one data row
// per sample; RFC-4180 quoting.
void write_feature_matrix_csv(const FeatureMatrix& matrix, const std::filesystem::path& path);

}  // namespace coalsel
