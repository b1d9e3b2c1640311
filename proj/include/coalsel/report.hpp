#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace coalsel {

struct RankedFeature {
  std::string feature;
  double value = 0.0;
  int rank = 0;  // 1-based
};

// Scores from one selector over one feature matrix. group_size ("L"), rounds
// and seed are zero for selectors they do not apply to; evaluations counts
// distinct characteristic-function computations for game-based selectors.
struct RankingReport {
  std::string method;
  int group_size = 0;
  int rounds = 0;
  std::uint64_t seed = 0;
  std::vector<RankedFeature> scores;  // descending by value, ties by input order
  std::uint64_t evaluations = 0;
};

// Sorts descending by value with ties broken by ascending input index, keeps
// the first top_k entries (top_k <= number of values).
RankingReport rank_features(const Eigen::VectorXd& values,
                            const std::vector<std::string>& names, int top_k);

RankingReport truncated(const RankingReport& report, int top_k);

// {"method":..., "L":..., "rounds":..., "seed":..., "scores":[...],
//  "evaluations":...}
std::string ranking_report_to_json(const RankingReport& report);
RankingReport ranking_report_from_json(const std::string& text);
void write_ranking_report(const RankingReport& report, const std::filesystem::path& path);
RankingReport read_ranking_report(const std::filesystem::path& path);

// Fig.-2-style appearance counts: how many of the report's features fall on
// each (channel, level) cell. Rows are emitted for every cell in
// channel_order x 1..depth, zeros included.
void write_appearance_csv(const RankingReport& report,
                          const std::vector<std::string>& channel_order, int depth,
                          const std::filesystem::path& path);

}  // namespace coalsel
