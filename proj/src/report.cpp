#include "coalsel/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "coalsel/csv.hpp"
#include "coalsel/features.hpp"

namespace coalsel {

RankingReport rank_features(const Eigen::VectorXd& values,
                            const std::vector<std::string>& names, int top_k) {
  if (values.size() != static_cast<Eigen::Index>(names.size())) {
    throw std::invalid_argument("rank_features: value/name count mismatch");
  }
  if (top_k < 0 || top_k > values.size()) {
    throw std::invalid_argument("rank_features: top_k " + std::to_string(top_k) +
                                " outside [0, " + std::to_string(values.size()) + "]");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return a < b;
  });

  RankingReport report;
  report.scores.reserve(static_cast<std::size_t>(top_k));
  for (int i = 0; i < top_k; ++i) {
    const Eigen::Index idx = order[static_cast<std::size_t>(i)];
    report.scores.push_back({names[static_cast<std::size_t>(idx)], values[idx], i + 1});
  }
  return report;
}

RankingReport truncated(const RankingReport& report, int top_k) {
  if (top_k < 0 || top_k > static_cast<int>(report.scores.size())) {
    throw std::invalid_argument("truncated: top_k out of range");
  }
  RankingReport out = report;
  out.scores.resize(static_cast<std::size_t>(top_k));
  return out;
}

std::string ranking_report_to_json(const RankingReport& report) {
  nlohmann::ordered_json j;
  j["method"] = report.method;
  j["L"] = report.group_size;
  j["rounds"] = report.rounds;
  j["seed"] = report.seed;
  auto& scores = j["scores"] = nlohmann::ordered_json::array();
  for (const auto& s : report.scores) {
    scores.push_back({{"feature", s.feature}, {"value", s.value}, {"rank", s.rank}});
  }
  j["evaluations"] = report.evaluations;
  return j.dump(2) + "\n";
}

RankingReport ranking_report_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  RankingReport report;
  report.method = j.at("method").get<std::string>();
  report.group_size = j.at("L").get<int>();
  report.rounds = j.at("rounds").get<int>();
  report.seed = j.at("seed").get<std::uint64_t>();
  report.evaluations = j.at("evaluations").get<std::uint64_t>();
  for (const auto& s : j.at("scores")) {
    report.scores.push_back({s.at("feature").get<std::string>(), s.at("value").get<double>(),
                             s.at("rank").get<int>()});
  }
  return report;
}

void write_ranking_report(const RankingReport& report, const std::filesystem::path& path) {
  atomic_write_file(path, ranking_report_to_json(report));
}

RankingReport read_ranking_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open report: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ranking_report_from_json(buffer.str());
}

void write_appearance_csv(const RankingReport& report,
                          const std::vector<std::string>& channel_order, int depth,
                          const std::filesystem::path& path) {
  std::map<std::pair<std::string, int>, int> counts;
  for (const auto& channel : channel_order) {
    for (int level = 1; level <= depth; ++level) counts[{channel, level}] = 0;
  }
  for (const auto& score : report.scores) {
    const FeatureDescriptor d = FeatureDescriptor::parse(score.feature);
    const auto it = counts.find({d.channel, d.level});
    if (it == counts.end()) {
      throw std::invalid_argument("appearance: feature '" + score.feature +
                                  "' outside the declared channel/level grid");
    }
    ++it->second;
  }
  std::ostringstream out;
  write_csv_row(out, {"channel", "level", "count"});
  for (const auto& channel : channel_order) {
    for (int level = 1; level <= depth; ++level) {
      write_csv_row(out, {channel, std::to_string(level),
                          std::to_string(counts[{channel, level}])});
    }
  }
  atomic_write_file(path, out.str());
}

}  // namespace coalsel
