#include "coalsel/dataset.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "coalsel/csv.hpp"
#include "coalsel/rng.hpp"

namespace coalsel {

std::string to_string(Label label) {
  return label == Label::kTrueAlarm ? "true" : "false";
}

namespace {

void validate_channel_name(const std::string& name) {
  if (name.empty()) throw std::invalid_argument("manifest: empty channel name");
  for (const char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c))) {
      throw std::invalid_argument("manifest: channel name '" + name +
                                  "' must be alphanumeric");
    }
  }
}

}  // namespace

DatasetManifest DatasetManifest::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path.string());
  nlohmann::json j;
  in >> j;

  DatasetManifest manifest;
  if (!j.contains("channels") || !j["channels"].is_array() || j["channels"].empty()) {
    throw std::invalid_argument("manifest: missing non-empty 'channels' array");
  }
  for (const auto& c : j["channels"]) {
    manifest.channels.push_back(c.get<std::string>());
    validate_channel_name(manifest.channels.back());
  }
  std::set<std::string> unique(manifest.channels.begin(), manifest.channels.end());
  if (unique.size() != manifest.channels.size()) {
    throw std::invalid_argument("manifest: duplicate channel names");
  }
  if (!j.contains("sample_rate") || !j["sample_rate"].is_number()) {
    throw std::invalid_argument("manifest: missing numeric 'sample_rate'");
  }
  manifest.sample_rate = j["sample_rate"].get<double>();
  if (!j.contains("records") || !j["records"].is_array()) {
    throw std::invalid_argument("manifest: missing 'records' array");
  }
  for (const auto& r : j["records"]) {
    manifest.records.emplace_back(r.at("id").get<std::string>(),
                                  r.at("label").get<std::string>());
  }
  return manifest;
}

LoadResult load_records(const std::filesystem::path& root) {
  const DatasetManifest manifest = DatasetManifest::parse_file(root / "manifest.json");

  LoadResult result;
  result.channel_order = manifest.channels;
  result.sample_rate = manifest.sample_rate;

  for (const auto& [id, label_text] : manifest.records) {
    Label label;
    if (label_text == "true") {
      label = Label::kTrueAlarm;
    } else if (label_text == "false") {
      label = Label::kFalseAlarm;
    } else if (label_text == "unknown") {
      ++result.skipped_unknown;
      continue;
    } else {
      throw std::invalid_argument("record '" + id + "': unknown label string '" +
                                  label_text + "' (expected true/false/unknown)");
    }

    Record record;
    record.id = id;
    record.label = label;
    for (const auto& channel : manifest.channels) {
      const std::filesystem::path csv_path = root / id / (channel + ".csv");
      if (!std::filesystem::exists(csv_path)) {
        throw std::runtime_error("record '" + id + "': missing channel file " +
                                 csv_path.string());
      }
      const auto rows = read_csv_file(csv_path);
      if (rows.empty() || rows.front().size() != 1 || rows.front().front() != "value") {
        throw std::invalid_argument("record '" + id + "' channel '" + channel +
                                    "': expected single-column header 'value'");
      }
      Signal signal;
      signal.channel = channel;
      signal.sample_rate = manifest.sample_rate;
      signal.samples.resize(static_cast<Eigen::Index>(rows.size()) - 1);
      for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 1) {
          throw std::invalid_argument("record '" + id + "' channel '" + channel +
                                      "': malformed row " + std::to_string(i));
        }
        double value;
        try {
          value = parse_double(rows[i][0]);
        } catch (const std::exception&) {
          throw std::invalid_argument("record '" + id + "' channel '" + channel +
                                      "': sample " + std::to_string(i - 1) +
                                      " is not a number");
        }
        if (!std::isfinite(value)) {
          throw std::invalid_argument("record '" + id + "' channel '" + channel +
                                      "': non-finite sample at index " +
                                      std::to_string(i - 1));
        }
        signal.samples[static_cast<Eigen::Index>(i - 1)] = value;
      }
      signal.validate();
      record.channels.emplace(channel, std::move(signal));
    }
    result.records.push_back(std::move(record));
  }
  return result;
}

void write_records(const std::filesystem::path& root, std::span<const Record> records,
                   const std::vector<std::string>& channel_order, double sample_rate) {
  std::filesystem::create_directories(root);

  nlohmann::json manifest;
  manifest["channels"] = channel_order;
  manifest["sample_rate"] = sample_rate;
  auto& entries = manifest["records"] = nlohmann::json::array();
  for (const auto& record : records) {
    entries.push_back({{"id", record.id}, {"label", to_string(record.label)}});
  }
  atomic_write_file(root / "manifest.json", manifest.dump(2) + "\n");

  for (const auto& record : records) {
    const std::filesystem::path dir = root / record.id;
    std::filesystem::create_directories(dir);
    for (const auto& channel : channel_order) {
      const auto it = record.channels.find(channel);
      if (it == record.channels.end()) {
        throw std::invalid_argument("record '" + record.id + "': missing channel '" +
                                    channel + "'");
      }
      std::ostringstream out;
      out << "value\n";
      const auto& samples = it->second.samples;
      for (Eigen::Index i = 0; i < samples.size(); ++i) {
        out << format_double(samples[i]) << '\n';
      }
      atomic_write_file(dir / (channel + ".csv"), out.str());
    }
  }
}

SplitPlan stratified_kfold(const std::vector<Label>& labels, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("stratified_kfold: k must be >= 2");
  if (labels.empty()) throw std::invalid_argument("stratified_kfold: no labels");

  SplitPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.fold_of.assign(labels.size(), -1);

  int class_index = 0;
  for (const Label cls : {Label::kFalseAlarm, Label::kTrueAlarm}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    if (members.empty()) {
      ++class_index;
      continue;
    }
    if (members.size() < static_cast<std::size_t>(k)) {
      throw std::invalid_argument("stratified_kfold: class '" + to_string(cls) + "' has " +
                                  std::to_string(members.size()) +
                                  " members, fewer than k=" + std::to_string(k));
    }
    Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(class_index)));
    rng.shuffle(members);
    for (std::size_t i = 0; i < members.size(); ++i) {
      plan.fold_of[members[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
    ++class_index;
  }
  return plan;
}

int default_wavelet_order(const std::string& channel) {
  return channel == "ECG" ? 8 : 4;
}

namespace {

Eigen::Index periodic_length_at_level(Eigen::Index n, int level) {
  for (int i = 0; i < level; ++i) n = (n + 1) / 2;
  return n;
}

bool is_planted(const GeneratorSpec& spec, const std::string& channel, int level) {
  for (const auto& component : spec.coalition) {
    if (component.channel == channel && component.level == level) return true;
  }
  return false;
}

}  // namespace

SyntheticDataset generate_synthetic(const GeneratorSpec& spec, std::uint64_t seed) {
  if (spec.n_samples < 1) throw std::invalid_argument("generator: n_samples must be >= 1");
  if (spec.channels.empty()) throw std::invalid_argument("generator: no channels");
  for (const auto& channel : spec.channels) validate_channel_name(channel);
  if (spec.depth < 1) throw std::invalid_argument("generator: depth must be >= 1");
  if (spec.signal_length < (1 << spec.depth)) {
    throw std::invalid_argument("generator: signal_length too short for depth");
  }

  const std::size_t component_count = spec.channels.size() * static_cast<std::size_t>(spec.depth);
  if (spec.coalition.size() > component_count) {
    throw std::invalid_argument("generator: coalition size " +
                                std::to_string(spec.coalition.size()) +
                                " exceeds available components (" +
                                std::to_string(component_count) + ")");
  }
  if (spec.coalition.size() == 1) {
    throw std::invalid_argument("generator: a coalition of size 1 would make the feature "
                                "individually informative; use size 0 or >= 2");
  }
  {
    std::set<std::pair<std::string, int>> seen;
    for (const auto& component : spec.coalition) {
      if (std::find(spec.channels.begin(), spec.channels.end(), component.channel) ==
          spec.channels.end()) {
        throw std::invalid_argument("generator: coalition channel '" + component.channel +
                                    "' is not in the channel set");
      }
      if (component.level < 1 || component.level > spec.depth) {
        throw std::invalid_argument("generator: coalition level " +
                                    std::to_string(component.level) +
                                    " outside 1.." + std::to_string(spec.depth));
      }
      if (!seen.insert({component.channel, component.level}).second) {
        throw std::invalid_argument("generator: duplicate coalition component");
      }
    }
  }

  SyntheticDataset dataset;
  dataset.channel_order = spec.channels;
  dataset.sample_rate = spec.sample_rate;
  for (const auto& component : spec.coalition) {
    dataset.planted_feature_names.push_back(component.channel + "_L" +
                                            std::to_string(component.level) + "_std");
  }

  const Eigen::Index n = spec.signal_length;
  const auto samples = static_cast<std::size_t>(spec.n_samples);
  dataset.records.reserve(samples);

  // Balanced label / coalition-bit assignment: every bit pattern appears an
  // equal number of times (remainder spread at random), so each planted
  // component's sample correlation with the label is zero by construction,
  // not just in expectation. The label is the pattern parity.
  // With no coalition the pattern space is just the label bit itself.
  const std::size_t pattern_bits = std::max<std::size_t>(spec.coalition.size(), 1);
  const std::size_t pattern_count = std::size_t{1} << pattern_bits;
  std::vector<std::uint32_t> patterns;
  patterns.reserve(samples);
  {
    Rng head(Rng::mix(seed, 0x636f616c73656cULL));
    std::vector<std::uint32_t> remainder_order(pattern_count);
    for (std::size_t p = 0; p < pattern_count; ++p) {
      remainder_order[p] = static_cast<std::uint32_t>(p);
    }
    head.shuffle(remainder_order);
    for (std::size_t p = 0; p < pattern_count; ++p) {
      std::size_t count = samples / pattern_count;
      if (p < samples % pattern_count) ++count;  // after shuffling below
      for (std::size_t c = 0; c < count; ++c) patterns.push_back(remainder_order[p]);
    }
    head.shuffle(patterns);
  }
  auto parity_of = [](std::uint32_t pattern) {
    return (std::popcount(pattern) % 2) != 0;
  };

  // Carrier draws that feed discrete atoms are also dealt from balanced,
  // shuffled per-class pools per component, so the per-class atom mix is
  // exact and no carrier column picks up a spurious marginal signal.
  std::array<std::vector<std::size_t>, 2> class_members;
  for (std::size_t i = 0; i < samples; ++i) {
    class_members[parity_of(patterns[i]) ? 1 : 0].push_back(i);
  }
  std::vector<std::size_t> class_index(samples, 0);
  for (const auto& members : class_members) {
    for (std::size_t pos = 0; pos < members.size(); ++pos) class_index[members[pos]] = pos;
  }
  auto balanced_pool = [](Rng& rng, std::size_t count, std::size_t numer,
                          std::size_t denom) {
    std::vector<bool> pool(count, false);
    for (std::size_t i = 0; i < count * numer / denom; ++i) pool[i] = true;
    // Fisher-Yates over a bool vector.
    for (std::size_t i = count; i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
      const bool tmp = pool[i - 1];
      pool[i - 1] = pool[j];
      pool[j] = tmp;
    }
    return pool;
  };
  // Continuous draws whose class-wise sample mean must vanish exactly are
  // dealt from antithetic pairs {z, -z}, shuffled per class.
  auto antithetic_pool = [](Rng& rng, std::size_t count) {
    std::vector<double> pool;
    pool.reserve(count + 1);
    for (std::size_t i = 0; i < (count + 1) / 2; ++i) {
      const double z = rng.next_gaussian();
      pool.push_back(z);
      pool.push_back(-z);
    }
    pool.resize(count);
    for (std::size_t i = count; i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
      std::swap(pool[i - 1], pool[j]);
    }
    return pool;
  };

  const std::size_t vector_count = spec.channels.size() * static_cast<std::size_t>(spec.depth);
  // [vector][class] -> per-class-index draws.
  std::vector<std::array<std::vector<bool>, 2>> big_side_pools(vector_count);
  std::vector<std::vector<bool>> amp_sign_pools(vector_count);  // true-alarm class
  std::vector<std::vector<double>> shape_pools(vector_count);   // false-alarm class
  for (std::size_t v = 0; v < vector_count; ++v) {
    Rng pool_rng(Rng::mix(seed, 0x706f6f6c00ULL + v));
    for (int cls = 0; cls < 2; ++cls) {
      big_side_pools[v][static_cast<std::size_t>(cls)] =
          balanced_pool(pool_rng, class_members[static_cast<std::size_t>(cls)].size(), 1, 4);
    }
    amp_sign_pools[v] = balanced_pool(pool_rng, class_members[1].size(), 1, 2);
    shape_pools[v] = antithetic_pool(pool_rng, class_members[0].size());
  }
  // The shared coalition gain is also antithetic per class so that neither
  // designated column can inherit a sampling correlation with the label.
  std::array<std::vector<double>, 2> gain_pools;
  {
    Rng gain_rng(Rng::mix(seed, 0x6761696e21ULL));
    gain_pools[0] = antithetic_pool(gain_rng, class_members[0].size());
    gain_pools[1] = antithetic_pool(gain_rng, class_members[1].size());
  }

  for (int index = 0; index < spec.n_samples; ++index) {
    Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(index)));
    const std::uint32_t pattern = patterns[static_cast<std::size_t>(index)];
    const bool label_bit = parity_of(pattern);
    const std::size_t within_class = class_index[static_cast<std::size_t>(index)];

    std::vector<bool> bits(spec.coalition.size(), false);
    for (std::size_t j = 0; j < bits.size(); ++j) bits[j] = (pattern >> j) & 1u;

    // One shared gain draw for every coalition member (a common per-record
    // sensor gain). Each member's column is smeared by it individually, but
    // member ratios stay crisp, so the parity remains jointly readable.
    double coalition_gain = 1.0;
    if (spec.amp_jitter_log > 0.0 && !bits.empty()) {
      coalition_gain = std::exp(spec.amp_jitter_log *
                                gain_pools[label_bit ? 1 : 0][within_class]);
    }

    Record record;
    {
      std::ostringstream id;
      id << "rec" << std::setw(5) << std::setfill('0') << index;
      record.id = id.str();
    }
    record.label = label_bit ? Label::kTrueAlarm : Label::kFalseAlarm;

    std::size_t vector_id = 0;
    for (const auto& channel : spec.channels) {
      WaveletDecomposition decomp;
      decomp.filter_name = "db" + std::to_string(default_wavelet_order(channel));
      decomp.boundary = BoundaryMode::kPeriodic;
      decomp.channel = channel;
      decomp.sample_rate = spec.sample_rate;

      Eigen::Index current = n;
      for (int level = 1; level <= spec.depth; ++level, ++vector_id) {
        decomp.level_lengths.push_back(current);
        const Eigen::Index band = (current + 1) / 2;

        double amplitude = 1.0;
        double mean_shift = 0.0;
        if (is_planted(spec, channel, level)) {
          std::size_t position = 0;
          for (std::size_t j = 0; j < spec.coalition.size(); ++j) {
            if (spec.coalition[j].channel == channel && spec.coalition[j].level == level) {
              position = j;
              break;
            }
          }
          amplitude = coalition_gain * (bits[position] ? spec.amp_high : spec.amp_low);
        } else {
          if (spec.amp_jitter_log > 0.0) {
            amplitude *= std::exp(spec.amp_jitter_log * rng.next_gaussian());
          }
          // Spread carrier: log-amplitude is normal for one class and a
          // moment-matched two-point for the other. First two moments agree;
          // only the distribution shape separates the classes.
          if (spec.carrier_log_amp > 0.0) {
            const double shape_value =
                label_bit ? (amp_sign_pools[vector_id][within_class] ? 1.0 : -1.0)
                          : shape_pools[vector_id][within_class];
            amplitude *= std::exp(spec.carrier_log_amp * shape_value);
          }
          // Location carrier: the coefficient mean is a mirrored skewed
          // two-point draw, {-3a w.p. 1/4, +a w.p. 3/4} for one class and its
          // negation for the other. Mean, variance and the law of |shift|
          // all match across classes, so symmetric statistics and a Gaussian
          // model carry nothing; binned marginals and neighbor distances do.
          if (spec.carrier_mean_scale > 0.0) {
            const bool big_side =
                big_side_pools[vector_id][label_bit ? 1 : 0][within_class];
            const double atom = spec.carrier_mean_scale / std::sqrt(3.0) *
                                (big_side ? -3.0 : 1.0);
            const double orientation = label_bit ? -1.0 : 1.0;
            mean_shift = orientation * atom / std::sqrt(static_cast<double>(band));
          }
        }

        Eigen::VectorXd detail(band);
        for (Eigen::Index i = 0; i < band; ++i) {
          detail[i] = amplitude * rng.next_gaussian() + mean_shift;
        }
        decomp.details.push_back(std::move(detail));
        current = band;
      }

      Eigen::VectorXd approx(current);
      for (Eigen::Index i = 0; i < current; ++i) approx[i] = rng.next_gaussian();
      decomp.approx = std::move(approx);

      const WaveletFilter filter = daubechies_filter(default_wavelet_order(channel));
      Signal signal = idwt_multilevel(decomp, filter);
      record.channels.emplace(channel, std::move(signal));
    }
    dataset.records.push_back(std::move(record));
  }
  return dataset;
}

}  // namespace coalsel
