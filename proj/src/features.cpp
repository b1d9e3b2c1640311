#include "coalsel/features.hpp"

#include <cctype>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "coalsel/csv.hpp"
#include "coalsel/stats.hpp"

namespace coalsel {

namespace {

const std::vector<std::string> kDefaultStats = {
    "mean", "std", "skew", "kurt", "min", "max", "median", "rms", "entropy", "zcr",
};

const std::vector<std::string> kExtendedStats = {
    "mean", "std",  "skew",   "kurt", "min",    "max",       "median",      "rms",
    "entropy", "zcr", "iqr",  "mad",  "p05",    "p95",       "energy",      "log_energy",
    "line_length", "range", "p25", "p75",
};

double compute_stat(const std::string& stat, const Eigen::VectorXd& v) {
  if (stat == "mean") return mean(v);
  if (stat == "std") return stddev_population(v);
  if (stat == "skew") return skewness(v);
  if (stat == "kurt") return excess_kurtosis(v);
  if (stat == "min") return v.minCoeff();
  if (stat == "max") return v.maxCoeff();
  if (stat == "median") return median(v);
  if (stat == "rms") return root_mean_square(v);
  if (stat == "entropy") return shannon_entropy_bits(v);
  if (stat == "zcr") return zero_crossing_rate(v);
  if (stat == "iqr") return interquartile_range(v);
  if (stat == "mad") return mean_absolute_deviation(v);
  if (stat == "p05") return quantile(v, 0.05);
  if (stat == "p95") return quantile(v, 0.95);
  if (stat == "energy") return energy(v);
  if (stat == "log_energy") return log_energy_entropy(v);
  if (stat == "line_length") return line_length(v);
  if (stat == "range") return v.maxCoeff() - v.minCoeff();
  if (stat == "p25") return quantile(v, 0.25);
  if (stat == "p75") return quantile(v, 0.75);
  throw std::logic_error("unknown catalog statistic: " + stat);
}

}  // namespace

const std::vector<std::string>& catalog_stat_names(FeatureCatalog catalog) {
  return catalog == FeatureCatalog::kDefault10 ? kDefaultStats : kExtendedStats;
}

std::string to_string(FeatureCatalog catalog) {
  return catalog == FeatureCatalog::kDefault10 ? "default10" : "extended20";
}

FeatureCatalog catalog_from_string(const std::string& name) {
  if (name == "default10") return FeatureCatalog::kDefault10;
  if (name == "extended20") return FeatureCatalog::kExtended20;
  throw std::invalid_argument("unknown feature catalog '" + name +
                              "' (expected 'default10' or 'extended20')");
}

std::string FeatureDescriptor::name() const {
  return channel + "_L" + std::to_string(level) + "_" + statname;
}

FeatureDescriptor FeatureDescriptor::parse(const std::string& name) {
  const auto first = name.find('_');
  if (first == std::string::npos || first == 0 || first + 2 >= name.size() ||
      name[first + 1] != 'L') {
    throw std::invalid_argument("feature name '" + name +
                                "' does not match <channel>_L<level>_<stat>");
  }
  std::size_t pos = first + 2;
  std::size_t digits = 0;
  int level = 0;
  while (pos < name.size() && std::isdigit(static_cast<unsigned char>(name[pos]))) {
    level = level * 10 + (name[pos] - '0');
    ++pos;
    ++digits;
  }
  if (digits == 0 || pos >= name.size() || name[pos] != '_' || pos + 1 >= name.size()) {
    throw std::invalid_argument("feature name '" + name +
                                "' does not match <channel>_L<level>_<stat>");
  }
  FeatureDescriptor d;
  d.channel = name.substr(0, first);
  d.level = level;
  d.statname = name.substr(pos + 1);
  return d;
}

Eigen::VectorXd extract_feature_values(const Eigen::VectorXd& coefficients,
                                       FeatureCatalog catalog) {
  if (coefficients.size() == 0) {
    throw std::invalid_argument("extract_features: empty coefficient vector");
  }
  if (!coefficients.allFinite()) {
    throw std::invalid_argument("extract_features: non-finite coefficient");
  }
  const auto& stats = catalog_stat_names(catalog);
  Eigen::VectorXd out(static_cast<Eigen::Index>(stats.size()));
  for (std::size_t i = 0; i < stats.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = compute_stat(stats[i], coefficients);
  }
  if (!out.allFinite()) {
    throw std::runtime_error("extract_features: produced a non-finite value");
  }
  return out;
}

std::map<std::string, double> extract_features(const Eigen::VectorXd& coefficients,
                                               FeatureCatalog catalog) {
  const Eigen::VectorXd values = extract_feature_values(coefficients, catalog);
  const auto& stats = catalog_stat_names(catalog);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    out.emplace(stats[i], values[static_cast<Eigen::Index>(i)]);
  }
  return out;
}

std::vector<std::string> FeatureMatrix::feature_names() const {
  std::vector<std::string> names;
  names.reserve(descriptors.size());
  for (const auto& d : descriptors) names.push_back(d.name());
  return names;
}

Eigen::Index FeatureMatrix::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < descriptors.size(); ++i) {
    if (descriptors[i].name() == name) return static_cast<Eigen::Index>(i);
  }
  return -1;
}

void FeatureMatrix::validate() const {
  if (values.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw std::invalid_argument("feature matrix: row count != label count");
  }
  if (values.cols() != static_cast<Eigen::Index>(descriptors.size())) {
    throw std::invalid_argument("feature matrix: column count != descriptor count");
  }
  std::set<std::string> names;
  for (const auto& d : descriptors) {
    if (!names.insert(d.name()).second) {
      throw std::invalid_argument("feature matrix: duplicate feature name " + d.name());
    }
  }
  if (!values.allFinite()) {
    throw std::invalid_argument("feature matrix: non-finite entry");
  }
}

std::map<std::string, WaveletFilter> default_filter_map(
    const std::vector<std::string>& channel_order) {
  std::map<std::string, WaveletFilter> filters;
  for (const auto& channel : channel_order) {
    filters.emplace(channel, daubechies_filter(default_wavelet_order(channel)));
  }
  return filters;
}

FeatureMatrix build_feature_matrix(std::span<const Record> records,
                                   const std::vector<std::string>& channel_order,
                                   const std::map<std::string, WaveletFilter>& filter_map,
                                   int depth, FeatureCatalog catalog, BoundaryMode boundary) {
  if (channel_order.empty()) {
    throw std::invalid_argument("build_feature_matrix: empty channel order");
  }
  for (const auto& channel : channel_order) {
    if (filter_map.find(channel) == filter_map.end()) {
      throw std::invalid_argument("build_feature_matrix: no filter for channel '" + channel +
                                  "'");
    }
  }

  const auto& stats = catalog_stat_names(catalog);
  FeatureMatrix matrix;
  for (const auto& channel : channel_order) {
    for (int level = 1; level <= depth; ++level) {
      for (const auto& stat : stats) {
        matrix.descriptors.push_back({channel, level, stat});
      }
    }
  }

  const auto columns = static_cast<Eigen::Index>(matrix.descriptors.size());
  matrix.values.resize(static_cast<Eigen::Index>(records.size()), columns);
  matrix.labels.reserve(records.size());

  const auto block = static_cast<Eigen::Index>(depth * stats.size());
  for (std::size_t row = 0; row < records.size(); ++row) {
    const Record& record = records[row];
    if (record.channels.size() != channel_order.size()) {
      throw std::invalid_argument("record '" + record.id +
                                  "': channel set differs from the declared channels");
    }
    for (std::size_t c = 0; c < channel_order.size(); ++c) {
      const auto& channel = channel_order[c];
      const auto it = record.channels.find(channel);
      if (it == record.channels.end()) {
        throw std::invalid_argument("record '" + record.id + "': missing channel '" +
                                    channel + "'");
      }
      const auto decomp =
          dwt_multilevel(it->second, filter_map.at(channel), depth, boundary);
      for (int level = 1; level <= depth; ++level) {
        const Eigen::VectorXd features =
            extract_feature_values(decomp.details[static_cast<std::size_t>(level - 1)], catalog);
        const Eigen::Index offset = static_cast<Eigen::Index>(c) * block +
                                    static_cast<Eigen::Index>((level - 1) * stats.size());
        matrix.values.row(static_cast<Eigen::Index>(row)).segment(offset, features.size()) =
            features.transpose();
      }
    }
    matrix.labels.push_back(record.label);
  }
  matrix.validate();
  return matrix;
}

void write_feature_matrix_csv(const FeatureMatrix& matrix, const std::filesystem::path& path) {
  std::ostringstream out;
  std::vector<std::string> header = matrix.feature_names();
  header.push_back("label");
  write_csv_row(out, header);
  for (Eigen::Index row = 0; row < matrix.sample_count(); ++row) {
    std::vector<std::string> fields;
    fields.reserve(static_cast<std::size_t>(matrix.feature_count()) + 1);
    for (Eigen::Index col = 0; col < matrix.feature_count(); ++col) {
      fields.push_back(format_double(matrix.values(row, col)));
    }
    fields.push_back(to_string(matrix.labels[static_cast<std::size_t>(row)]));
    write_csv_row(out, fields);
  }
  atomic_write_file(path, out.str());
}

}  // namespace coalsel
