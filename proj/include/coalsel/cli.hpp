#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coalsel/dataset.hpp"

namespace coalsel {

struct ShapleyConfig {
  int group_size = 4;
  int rounds = 100;
  int exact_ceiling = 20;
};

// Declarative run description. Every field serializes; the effective config
// (defaults filled in) is copied verbatim into the run's output directory so
// a run can be reproduced bit for bit.
struct RunConfig {
  std::string dataset_path;                 // one of dataset_path / synthetic
  std::optional<GeneratorSpec> synthetic;   // generated with `seed`
  std::map<std::string, std::string> filters;  // channel -> wavelet name; empty
                                               // entries fall back to defaults
  int depth = 6;
  std::string boundary = "periodic";
  std::string catalog = "default10";
  std::vector<std::string> selectors = {"shapley-mpe", "info-gain", "gain-ratio",
                                        "chi2", "relief"};
  int top_k = 30;
  int cv_folds = 5;
  int bins = 10;
  ShapleyConfig shapley;
  int relief_neighbors = 10;
  std::string classifier_covariance = "full";
  double variance_floor_scale = 1e-9;
  int threads = 1;
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

// FNV-1a over the canonical config serialization, as a hex string.
std::string config_hash(const RunConfig& config);

// Subcommand bodies. All of them create the output directory, write the
// effective config copy and a run.json with seed, config hash, stage timings
// and the tool version. Failures throw; the CLI maps that to a nonzero exit.
void cmd_synth(const RunConfig& config);
void cmd_decompose(const RunConfig& config);
void cmd_rank(const RunConfig& config);
// reports_dir: where to look for previously written rank reports; falls back
// to computing selectors in-run. Empty means the run's own output directory.
void cmd_evaluate(const RunConfig& config, const std::string& reports_dir = "");

}  // namespace coalsel
