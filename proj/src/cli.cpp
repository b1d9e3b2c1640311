#include "coalsel/cli.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "coalsel/baselines.hpp"
#include "coalsel/classifier.hpp"
#include "coalsel/csv.hpp"
#include "coalsel/features.hpp"
#include "coalsel/game.hpp"
#include "coalsel/report.hpp"
#include "coalsel/wavelet.hpp"

namespace coalsel {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

nlohmann::json generator_to_json(const GeneratorSpec& spec) {
  nlohmann::json j;
  j["n_samples"] = spec.n_samples;
  j["channels"] = spec.channels;
  j["signal_length"] = spec.signal_length;
  j["depth"] = spec.depth;
  auto& coalition = j["coalition"] = nlohmann::json::array();
  for (const auto& c : spec.coalition) {
    coalition.push_back({{"channel", c.channel}, {"level", c.level}});
  }
  j["amp_low"] = spec.amp_low;
  j["amp_high"] = spec.amp_high;
  j["amp_jitter_log"] = spec.amp_jitter_log;
  j["carrier_log_amp"] = spec.carrier_log_amp;
  j["carrier_mean_scale"] = spec.carrier_mean_scale;
  j["sample_rate"] = spec.sample_rate;
  return j;
}

GeneratorSpec generator_from_json(const nlohmann::json& j) {
  GeneratorSpec spec;
  for (const auto& [key, value] : j.items()) {
    if (key == "n_samples") spec.n_samples = value.get<int>();
    else if (key == "channels") spec.channels = value.get<std::vector<std::string>>();
    else if (key == "signal_length") spec.signal_length = value.get<int>();
    else if (key == "depth") spec.depth = value.get<int>();
    else if (key == "coalition") {
      spec.coalition.clear();
      for (const auto& c : value) {
        spec.coalition.push_back({c.at("channel").get<std::string>(), c.at("level").get<int>()});
      }
    } else if (key == "amp_low") spec.amp_low = value.get<double>();
    else if (key == "amp_high") spec.amp_high = value.get<double>();
    else if (key == "amp_jitter_log") spec.amp_jitter_log = value.get<double>();
    else if (key == "carrier_log_amp") spec.carrier_log_amp = value.get<double>();
    else if (key == "carrier_mean_scale") spec.carrier_mean_scale = value.get<double>();
    else if (key == "sample_rate") spec.sample_rate = value.get<double>();
    else throw std::invalid_argument("config: unknown synthetic key '" + key + "'");
  }
  return spec;
}

struct LoadedData {
  std::vector<Record> records;
  std::vector<std::string> channel_order;
  double sample_rate = 0.0;
};

LoadedData load_or_generate(const RunConfig& config) {
  LoadedData data;
  if (!config.dataset_path.empty() && config.synthetic.has_value()) {
    throw std::invalid_argument("config: set either 'dataset' or 'synthetic', not both");
  }
  if (config.synthetic.has_value()) {
    auto dataset = generate_synthetic(*config.synthetic, config.seed);
    data.records = std::move(dataset.records);
    data.channel_order = std::move(dataset.channel_order);
    data.sample_rate = dataset.sample_rate;
  } else if (!config.dataset_path.empty()) {
    auto loaded = load_records(config.dataset_path);
    data.records = std::move(loaded.records);
    data.channel_order = std::move(loaded.channel_order);
    data.sample_rate = loaded.sample_rate;
  } else {
    throw std::invalid_argument("config: one of 'dataset' or 'synthetic' is required");
  }
  return data;
}

std::map<std::string, WaveletFilter> filters_for(const RunConfig& config,
                                                 const std::vector<std::string>& channels) {
  std::map<std::string, WaveletFilter> filters;
  for (const auto& channel : channels) {
    const auto it = config.filters.find(channel);
    filters.emplace(channel, it != config.filters.end()
                                 ? wavelet_filter_from_name(it->second)
                                 : daubechies_filter(default_wavelet_order(channel)));
  }
  return filters;
}

ClassifierOptions classifier_options(const RunConfig& config) {
  ClassifierOptions options;
  options.covariance = covariance_model_from_string(config.classifier_covariance);
  options.variance_floor_scale = config.variance_floor_scale;
  return options;
}

void write_config_copy(const RunConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  atomic_write_file(std::filesystem::path(config.out_dir) / "config.json",
                    config.to_json().dump(2) + "\n");
}

void write_run_metadata(const RunConfig& config,
                        const std::map<std::string, double>& durations) {
  nlohmann::json j;
  j["seed"] = config.seed;
  j["config_hash"] = config_hash(config);
  j["durations"] = durations;
  j["tool_version"] = COALSEL_VERSION;
  atomic_write_file(std::filesystem::path(config.out_dir) / "run.json", j.dump(2) + "\n");
}

struct SelectorRun {
  RankingReport report;  // full ranking over all features
  double seconds = 0.0;
};

SelectorRun run_selector(const std::string& method, const FeatureMatrix& matrix,
                         const SplitPlan& plan, const RunConfig& config) {
  const auto start = Clock::now();
  SelectorRun run;
  if (method == "shapley-mpe" || method == "shapley-exact") {
    const CoalitionGame game = make_accuracy_game(matrix, plan, classifier_options(config));
    Eigen::VectorXd values;
    if (method == "shapley-mpe") {
      MpeOptions options;
      options.group_size = config.shapley.group_size;
      options.rounds = config.shapley.rounds;
      options.seed = config.seed;
      options.threads = config.threads;
      const ShapleyEstimate estimate = multi_perturbation_shapley(game, options);
      values = estimate.values;
      run.report = rank_features(values, matrix.feature_names(),
                                 static_cast<int>(matrix.feature_count()));
      run.report.group_size = options.group_size;
      run.report.rounds = options.rounds;
    } else {
      const ExactShapley exact = exact_shapley(game, config.shapley.exact_ceiling);
      values = exact.values;
      run.report = rank_features(values, matrix.feature_names(),
                                 static_cast<int>(matrix.feature_count()));
    }
    run.report.seed = config.seed;
    run.report.evaluations = game.evaluations();
  } else if (method == "info-gain" || method == "gain-ratio" || method == "chi2") {
    const DiscretizationScheme scheme = equal_frequency_bins(matrix, config.bins);
    if (method == "info-gain") run.report = info_gain(matrix, scheme);
    else if (method == "gain-ratio") run.report = gain_ratio(matrix, scheme);
    else run.report = chi_square(matrix, scheme);
  } else if (method == "relief") {
    ReliefOptions options;
    options.k_neighbors = config.relief_neighbors;
    options.seed = config.seed;
    run.report = relief(matrix, options);
  } else {
    throw std::invalid_argument(
        "unknown selector '" + method +
        "' (supported: shapley-mpe, shapley-exact, info-gain, gain-ratio, chi2, relief)");
  }
  run.report.method = method;
  run.seconds = seconds_since(start);
  return run;
}

std::filesystem::path report_path(const std::string& dir, const std::string& method) {
  return std::filesystem::path(dir) / ("rank_" + method + ".json");
}

FeatureMatrix build_matrix(const RunConfig& config, const LoadedData& data) {
  return build_feature_matrix(data.records, data.channel_order,
                              filters_for(config, data.channel_order), config.depth,
                              catalog_from_string(config.catalog),
                              boundary_mode_from_string(config.boundary));
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig config;
  for (const auto& [key, value] : j.items()) {
    if (key == "dataset") config.dataset_path = value.get<std::string>();
    else if (key == "synthetic") config.synthetic = generator_from_json(value);
    else if (key == "filters") config.filters = value.get<std::map<std::string, std::string>>();
    else if (key == "depth") config.depth = value.get<int>();
    else if (key == "boundary") config.boundary = value.get<std::string>();
    else if (key == "catalog") config.catalog = value.get<std::string>();
    else if (key == "selectors") config.selectors = value.get<std::vector<std::string>>();
    else if (key == "top_k") config.top_k = value.get<int>();
    else if (key == "cv_folds") config.cv_folds = value.get<int>();
    else if (key == "bins") config.bins = value.get<int>();
    else if (key == "shapley") {
      for (const auto& [skey, svalue] : value.items()) {
        if (skey == "L") config.shapley.group_size = svalue.get<int>();
        else if (skey == "rounds") config.shapley.rounds = svalue.get<int>();
        else if (skey == "exact_ceiling") config.shapley.exact_ceiling = svalue.get<int>();
        else throw std::invalid_argument("config: unknown shapley key '" + skey + "'");
      }
    } else if (key == "relief_neighbors") config.relief_neighbors = value.get<int>();
    else if (key == "classifier_covariance")
      config.classifier_covariance = value.get<std::string>();
    else if (key == "variance_floor_scale")
      config.variance_floor_scale = value.get<double>();
    else if (key == "threads") config.threads = value.get<int>();
    else if (key == "seed") config.seed = value.get<std::uint64_t>();
    else if (key == "out_dir") config.out_dir = value.get<std::string>();
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  return config;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  if (!dataset_path.empty()) j["dataset"] = dataset_path;
  if (synthetic.has_value()) j["synthetic"] = generator_to_json(*synthetic);
  j["filters"] = filters;
  j["depth"] = depth;
  j["boundary"] = boundary;
  j["catalog"] = catalog;
  j["selectors"] = selectors;
  j["top_k"] = top_k;
  j["cv_folds"] = cv_folds;
  j["bins"] = bins;
  j["shapley"] = {{"L", shapley.group_size},
                  {"rounds", shapley.rounds},
                  {"exact_ceiling", shapley.exact_ceiling}};
  j["relief_neighbors"] = relief_neighbors;
  j["classifier_covariance"] = classifier_covariance;
  j["variance_floor_scale"] = variance_floor_scale;
  j["threads"] = threads;
  j["seed"] = seed;
  j["out_dir"] = out_dir;
  return j;
}

std::string config_hash(const RunConfig& config) {
  const std::string canonical = config.to_json().dump();
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char c : canonical) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << hash;
  return out.str();
}

void cmd_synth(const RunConfig& config) {
  if (!config.synthetic.has_value()) {
    throw std::invalid_argument("synth: config needs a 'synthetic' section");
  }
  const auto dataset = generate_synthetic(*config.synthetic, config.seed);
  write_records(config.out_dir, dataset.records, dataset.channel_order, dataset.sample_rate);
  write_config_copy(config);
}

void cmd_decompose(const RunConfig& config) {
  const auto start = Clock::now();
  const LoadedData data = load_or_generate(config);
  const auto filters = filters_for(config, data.channel_order);

  std::ostringstream out;
  write_csv_row(out, {"record", "channel", "level", "band", "index", "value"});
  for (const auto& record : data.records) {
    for (const auto& channel : data.channel_order) {
      const auto decomp =
          dwt_multilevel(record.channels.at(channel), filters.at(channel), config.depth,
                         boundary_mode_from_string(config.boundary));
      for (int level = 1; level <= decomp.depth(); ++level) {
        const auto& band = decomp.details[static_cast<std::size_t>(level - 1)];
        for (Eigen::Index i = 0; i < band.size(); ++i) {
          write_csv_row(out, {record.id, channel, std::to_string(level), "detail",
                              std::to_string(i), format_double(band[i])});
        }
      }
      for (Eigen::Index i = 0; i < decomp.approx.size(); ++i) {
        write_csv_row(out, {record.id, channel, std::to_string(decomp.depth()), "approx",
                            std::to_string(i), format_double(decomp.approx[i])});
      }
    }
  }
  write_config_copy(config);
  atomic_write_file(std::filesystem::path(config.out_dir) / "coefficients.csv", out.str());
  write_run_metadata(config, {{"decompose", seconds_since(start)}});
}

void cmd_rank(const RunConfig& config) {
  std::map<std::string, double> durations;
  const auto load_start = Clock::now();
  const LoadedData data = load_or_generate(config);
  const FeatureMatrix matrix = build_matrix(config, data);
  durations["features"] = seconds_since(load_start);

  if (config.top_k > matrix.feature_count()) {
    throw std::invalid_argument("rank: top_k " + std::to_string(config.top_k) +
                                " exceeds feature count " +
                                std::to_string(matrix.feature_count()));
  }
  if (config.selectors.empty()) {
    throw std::invalid_argument("rank: no selectors configured");
  }

  std::vector<Label> labels;
  for (const auto& r : data.records) labels.push_back(r.label);
  const SplitPlan plan = stratified_kfold(labels, config.cv_folds, config.seed);

  write_config_copy(config);
  std::optional<RankingReport> preferred;
  for (const auto& method : config.selectors) {
    const SelectorRun run = run_selector(method, matrix, plan, config);
    durations["rank:" + method] = run.seconds;
    const RankingReport top = truncated(run.report, config.top_k);
    write_ranking_report(top, report_path(config.out_dir, method));
    if (!preferred.has_value() || (method == "shapley-mpe" && preferred->method != "shapley-mpe")) {
      preferred = top;
    }
  }

  write_appearance_csv(*preferred, data.channel_order, config.depth,
                       std::filesystem::path(config.out_dir) / "appearance.csv");
  write_run_metadata(config, durations);
}

void cmd_evaluate(const RunConfig& config, const std::string& reports_dir) {
  std::map<std::string, double> durations;
  const auto load_start = Clock::now();
  const LoadedData data = load_or_generate(config);
  const FeatureMatrix matrix = build_matrix(config, data);
  durations["features"] = seconds_since(load_start);

  std::vector<Label> labels;
  for (const auto& r : data.records) labels.push_back(r.label);
  const SplitPlan plan = stratified_kfold(labels, config.cv_folds, config.seed);
  const ClassifierOptions options = classifier_options(config);

  const std::string source_dir = reports_dir.empty() ? config.out_dir : reports_dir;
  write_config_copy(config);

  std::ostringstream out;
  write_csv_row(out, {"selector", "top_k", "cv_accuracy", "recall_true", "recall_false",
                      "evaluations", "wall_seconds"});

  auto emit_row = [&](const std::string& selector, int top_k, const EvalResult& result,
                      std::uint64_t evaluations, double seconds) {
    write_csv_row(out, {selector, std::to_string(top_k), format_double(result.accuracy),
                        format_double(result.recall[1]), format_double(result.recall[0]),
                        std::to_string(evaluations), format_double(seconds)});
  };

  for (const auto& method : config.selectors) {
    const auto row_start = Clock::now();
    RankingReport report;
    const auto path = report_path(source_dir, method);
    if (std::filesystem::exists(path)) {
      report = read_ranking_report(path);
    } else {
      const SelectorRun run = run_selector(method, matrix, plan, config);
      report = run.report;
      write_ranking_report(truncated(report, config.top_k),
                           report_path(config.out_dir, method));
    }
    if (static_cast<int>(report.scores.size()) < config.top_k) {
      throw std::invalid_argument("evaluate: report for '" + method + "' holds " +
                                  std::to_string(report.scores.size()) +
                                  " features, fewer than top_k = " +
                                  std::to_string(config.top_k));
    }
    std::vector<int> columns;
    for (int i = 0; i < config.top_k; ++i) {
      const auto col = matrix.column_index(report.scores[static_cast<std::size_t>(i)].feature);
      if (col < 0) {
        throw std::invalid_argument("evaluate: feature '" +
                                    report.scores[static_cast<std::size_t>(i)].feature +
                                    "' not present in the feature matrix");
      }
      columns.push_back(static_cast<int>(col));
    }
    const EvalResult result = cv_accuracy(matrix, columns, plan, options);
    const double seconds = seconds_since(row_start);
    durations["evaluate:" + method] = seconds;
    emit_row(method, config.top_k, result, report.evaluations, seconds);
  }

  // Reference row: every feature, no selection.
  {
    const auto row_start = Clock::now();
    std::vector<int> all;
    for (Eigen::Index c = 0; c < matrix.feature_count(); ++c) all.push_back(static_cast<int>(c));
    const EvalResult result = cv_accuracy(matrix, all, plan, options);
    const double seconds = seconds_since(row_start);
    durations["evaluate:none"] = seconds;
    emit_row("none", static_cast<int>(matrix.feature_count()), result, 0, seconds);
  }

  atomic_write_file(std::filesystem::path(config.out_dir) / "comparison.csv", out.str());
  write_run_metadata(config, durations);
}

}  // namespace coalsel
