#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "coalsel/cli.hpp"

namespace {

struct Overrides {
  std::optional<std::string> dataset;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> top_k;
  std::optional<int> depth;
  std::optional<int> rounds;
  std::optional<int> group_size;
  std::optional<int> threads;
  std::optional<int> folds;
  std::optional<std::string> covariance;
  std::optional<std::string> boundary;
  std::optional<std::string> catalog;
  std::vector<std::string> selectors;
};

void add_common_options(CLI::App* cmd, std::string& config_path, Overrides& overrides) {
  cmd->add_option("-c,--config", config_path, "JSON run configuration");
  cmd->add_option("--dataset", overrides.dataset, "dataset directory (overrides config)");
  cmd->add_option("-o,--out", overrides.out_dir, "output directory");
  cmd->add_option("--seed", overrides.seed, "global seed");
  cmd->add_option("--top-k", overrides.top_k, "features to keep in reports");
  cmd->add_option("--depth", overrides.depth, "wavelet decomposition depth");
  cmd->add_option("--rounds", overrides.rounds, "sampling rounds for shapley-mpe");
  cmd->add_option("-L,--group-size", overrides.group_size, "coalition group size");
  cmd->add_option("--threads", overrides.threads, "worker threads");
  cmd->add_option("--folds", overrides.folds, "cross-validation folds");
  cmd->add_option("--covariance", overrides.covariance, "classifier covariance: diag|full");
  cmd->add_option("--boundary", overrides.boundary, "wavelet boundary: periodic|symmetric");
  cmd->add_option("--catalog", overrides.catalog, "feature catalog: default10|extended20");
  cmd->add_option("--selectors", overrides.selectors, "selector list")->delimiter(',');
}

coalsel::RunConfig make_config(const std::string& config_path, const Overrides& overrides) {
  coalsel::RunConfig config;
  if (!config_path.empty()) config = coalsel::RunConfig::from_file(config_path);
  if (overrides.dataset) {
    config.dataset_path = *overrides.dataset;
    config.synthetic.reset();
  }
  if (overrides.out_dir) config.out_dir = *overrides.out_dir;
  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.top_k) config.top_k = *overrides.top_k;
  if (overrides.depth) config.depth = *overrides.depth;
  if (overrides.rounds) config.shapley.rounds = *overrides.rounds;
  if (overrides.group_size) config.shapley.group_size = *overrides.group_size;
  if (overrides.threads) config.threads = *overrides.threads;
  if (overrides.folds) config.cv_folds = *overrides.folds;
  if (overrides.covariance) config.classifier_covariance = *overrides.covariance;
  if (overrides.boundary) config.boundary = *overrides.boundary;
  if (overrides.catalog) config.catalog = *overrides.catalog;
  if (!overrides.selectors.empty()) config.selectors = overrides.selectors;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coalition-game feature selection over wavelet features"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  std::string reports_dir;

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset on disk");
  CLI::App* decompose =
      app.add_subcommand("decompose", "dump wavelet coefficients for a dataset");
  CLI::App* rank = app.add_subcommand("rank", "rank features with the configured selectors");
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "compare selector accuracy on top-k subsets");
  for (CLI::App* cmd : {synth, decompose, rank, evaluate}) {
    add_common_options(cmd, config_path, overrides);
  }
  evaluate->add_option("--reports-dir", reports_dir,
                       "directory holding rank_<selector>.json files to reuse");

  CLI11_PARSE(app, argc, argv);

  try {
    const coalsel::RunConfig config = make_config(config_path, overrides);
    if (synth->parsed()) coalsel::cmd_synth(config);
    else if (decompose->parsed()) coalsel::cmd_decompose(config);
    else if (rank->parsed()) coalsel::cmd_rank(config);
    else coalsel::cmd_evaluate(config, reports_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
