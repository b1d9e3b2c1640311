#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "coalsel/wavelet.hpp"

namespace coalsel {

enum class Label { kFalseAlarm, kTrueAlarm };

std::string to_string(Label label);  // "false" / "true"

// One labeled multi-channel observation.
struct Record {
  std::string id;
  std::map<std::string, Signal> channels;
  Label label = Label::kFalseAlarm;
};

// Parsed manifest.json: declared channel set (in file order), sample rate and
// per-record labels ("true" | "false" | "unknown").
struct DatasetManifest {
  std::vector<std::string> channels;
  double sample_rate = 0.0;
  std::vector<std::pair<std::string, std::string>> records;  // (id, label string)

  static DatasetManifest parse_file(const std::filesystem::path& path);
};

struct LoadResult {
  std::vector<Record> records;
  std::vector<std::string> channel_order;
  double sample_rate = 0.0;
  // Records labeled "unknown" are excluded from `records`; this counts them.
  int skipped_unknown = 0;
};

// Reads <root>/manifest.json plus one <root>/<record-id>/<channel>.csv per
// declared channel. Every signal is validated; failures name the record and
// sample position.
LoadResult load_records(const std::filesystem::path& root);

// Inverse of load_records: writes manifest.json and per-channel CSV files.
// Values are serialized with shortest round-trip precision, so a
// load/write/load cycle is lossless.
void write_records(const std::filesystem::path& root, std::span<const Record> records,
                   const std::vector<std::string>& channel_order, double sample_rate);

// Deterministic stratified k-fold assignment.
struct SplitPlan {
  std::vector<int> fold_of;  // per-sample fold index in [0, k)
  int k = 0;
  std::uint64_t seed = 0;
};

// Shuffles each class independently (seeded) and deals members round-robin,
// so per-fold class counts differ by at most one. Requires k >= 2 and at
// least k members per class.
SplitPlan stratified_kfold(const std::vector<Label>& labels, int k, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Synthetic generator. Signals are synthesized in wavelet-coefficient space
// and inverted to the time domain, so the planted structure survives the full
// decompose-and-extract pipeline rather than being painted onto a matrix.
//
// Planting: each coalition member (channel, level) gets a binary amplitude
// (amp_low / amp_high); the bits are uniform with their parity equal to the
// record label. Each member is therefore statistically independent of the
// label on its own while the group determines it exactly.
//
// Carriers: every non-planted detail vector can additionally receive a
// distribution-shape signature that separates the classes without moving any
// per-class mean or variance (log-amplitude and coefficient-mean values are
// Gaussian for one class, two-point for the other, with matched moments).
// Individual-relevance filters see these columns; a Gaussian classifier
// gains nothing from them. Both carrier strengths default to off.
// ---------------------------------------------------------------------------

struct PlantedComponent {
  std::string channel;
  int level = 1;
};

struct GeneratorSpec {
  int n_samples = 200;
  std::vector<std::string> channels = {"ECG", "PLETH", "ABP"};
  int signal_length = 256;
  int depth = 2;
  std::vector<PlantedComponent> coalition = {{"ECG", 1}, {"PLETH", 2}};
  double amp_low = 1.0;
  double amp_high = 2.5;
  // Multiplicative per-record amplitude jitter, exp(jitter * N(0,1)), applied
  // to every detail vector. Label-independent; blurs the planted amplitude
  // clusters so distance-based selectors cannot read the pattern off single
  // columns while a joint classifier still separates the parity.
  double amp_jitter_log = 0.0;
  double carrier_log_amp = 0.0;     // shape-only spread signature, log units
  double carrier_mean_scale = 0.0;  // shape-only location signature, in units
                                    // of the coefficient-mean standard error
  double sample_rate = 125.0;
};

struct SyntheticDataset {
  std::vector<Record> records;
  std::vector<std::string> channel_order;
  double sample_rate = 0.0;
  // Ground truth: the designated readout column per coalition member,
  // "<channel>_L<level>_std".
  std::vector<std::string> planted_feature_names;
};

// Default filter order per channel used across the pipeline: db8 for ECG,
// db4 otherwise.
int default_wavelet_order(const std::string& channel);

SyntheticDataset generate_synthetic(const GeneratorSpec& spec, std::uint64_t seed);

}  // namespace coalsel
