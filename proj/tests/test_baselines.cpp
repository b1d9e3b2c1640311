#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "coalsel/baselines.hpp"
#include "coalsel/dataset.hpp"
#include "coalsel/rng.hpp"

using coalsel::DiscretizationScheme;
using coalsel::FeatureMatrix;
using coalsel::Label;
using coalsel::RankingReport;
using coalsel::ReliefOptions;

namespace {

FeatureMatrix make_matrix(const Eigen::MatrixXd& values, const std::vector<Label>& labels) {
  FeatureMatrix m;
  m.values = values;
  m.labels = labels;
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    m.descriptors.push_back({"F", static_cast<int>(c + 1), "mean"});
  }
  m.validate();
  return m;
}

double score_of(const RankingReport& report, const std::string& feature) {
  for (const auto& s : report.scores) {
    if (s.feature == feature) return s.value;
  }
  throw std::logic_error("feature not in report: " + feature);
}

int rank_of(const RankingReport& report, const std::string& feature) {
  for (const auto& s : report.scores) {
    if (s.feature == feature) return s.rank;
  }
  throw std::logic_error("feature not in report: " + feature);
}

}  // namespace

TEST_CASE("equal-frequency bins: edges increase and every sample gets one bin") {
  coalsel::Rng rng(3);
  Eigen::MatrixXd values(40, 3);
  for (Eigen::Index i = 0; i < 40; ++i) {
    values(i, 0) = rng.next_gaussian();
    values(i, 1) = static_cast<double>(i % 4);  // heavy ties
    values(i, 2) = 7.0;                         // constant
  }
  std::vector<Label> labels;
  for (int i = 0; i < 40; ++i) {
    labels.push_back(i % 2 == 0 ? Label::kTrueAlarm : Label::kFalseAlarm);
  }
  const auto matrix = make_matrix(values, labels);
  const auto scheme = coalsel::equal_frequency_bins(matrix, 10);

  for (Eigen::Index col = 0; col < 3; ++col) {
    const auto& edges = scheme.edges[static_cast<std::size_t>(col)];
    for (Eigen::Index e = 1; e < edges.size(); ++e) CHECK(edges[e] > edges[e - 1]);
    for (const int bin : scheme.assignments[static_cast<std::size_t>(col)]) {
      CHECK(bin >= 0);
      CHECK(bin < 10);
    }
  }
  // Ties share a bin.
  const auto& tied = scheme.assignments[1];
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 40; ++j) {
      if (static_cast<int>(values(i, 1)) == static_cast<int>(values(j, 1))) {
        CHECK(tied[static_cast<std::size_t>(i)] == tied[static_cast<std::size_t>(j)]);
      }
    }
  }
  // Constant feature occupies a single bin with no edges.
  CHECK(scheme.edges[2].size() == 0);
  CHECK_THROWS_AS(coalsel::equal_frequency_bins(matrix, 1), std::invalid_argument);
}

TEST_CASE("info gain of a feature whose bins determine the label equals the label entropy") {
  // Three equal-frequency bins of four samples; the last bin is exactly the
  // true-alarm class, the others are false alarms.
  Eigen::MatrixXd values(12, 2);
  std::vector<Label> labels;
  coalsel::Rng rng(5);
  for (int i = 0; i < 12; ++i) {
    const bool positive = i >= 8;  // 4 true / 8 false
    labels.push_back(positive ? Label::kTrueAlarm : Label::kFalseAlarm);
    values(i, 0) = static_cast<double>(i);
    values(i, 1) = rng.next_gaussian();
  }
  const auto matrix = make_matrix(values, labels);
  const auto scheme = coalsel::equal_frequency_bins(matrix, 3);
  const auto report = coalsel::info_gain(matrix, scheme);

  const double p = 4.0 / 12.0;
  const double label_entropy = -(p * std::log2(p) + (1 - p) * std::log2(1 - p));
  CHECK(score_of(report, "F_L1_mean") == doctest::Approx(label_entropy).epsilon(1e-12));
  CHECK(report.method == "info-gain");
}

TEST_CASE("info gain of a label-independent feature stays near zero") {
  coalsel::Rng rng(7);
  const int n = 500;
  Eigen::MatrixXd values(n, 1);
  std::vector<Label> labels;
  for (int i = 0; i < n; ++i) {
    labels.push_back(i % 2 == 0 ? Label::kTrueAlarm : Label::kFalseAlarm);
    values(i, 0) = rng.next_gaussian();
  }
  const auto matrix = make_matrix(values, labels);
  const auto scheme = coalsel::equal_frequency_bins(matrix, 10);
  const auto report = coalsel::info_gain(matrix, scheme);
  CHECK(score_of(report, "F_L1_mean") < 0.05);
  CHECK(score_of(report, "F_L1_mean") >= 0.0);
}

TEST_CASE("hand-computed eight-sample table: IG and gain ratio") {
  // Two equal-frequency bins with class counts ((3,1),(1,3)).
  Eigen::MatrixXd values(8, 1);
  values << 1, 2, 3, 4, 5, 6, 7, 8;
  const std::vector<Label> labels = {
      Label::kFalseAlarm, Label::kFalseAlarm, Label::kFalseAlarm, Label::kTrueAlarm,
      Label::kFalseAlarm, Label::kTrueAlarm,  Label::kTrueAlarm,  Label::kTrueAlarm};
  const auto matrix = make_matrix(values, labels);
  const auto scheme = coalsel::equal_frequency_bins(matrix, 2);

  // H(Y) = 1; H(Y|X) = H(3/4, 1/4) = 0.8112781244591328 in both bins.
  const double conditional = -(0.75 * std::log2(0.75) + 0.25 * std::log2(0.25));
  const double expected_ig = 1.0 - conditional;
  const auto ig = coalsel::info_gain(matrix, scheme);
  CHECK(score_of(ig, "F_L1_mean") == doctest::Approx(expected_ig).epsilon(1e-12));

  // Split entropy is exactly one bit, so the ratio equals the gain.
  const auto gr = coalsel::gain_ratio(matrix, scheme);
  CHECK(score_of(gr, "F_L1_mean") == doctest::Approx(expected_ig).epsilon(1e-12));
  CHECK(gr.method == "gain-ratio");
}

TEST_CASE("gain ratio of a constant feature is zero by convention") {
  Eigen::MatrixXd values(8, 2);
  for (int i = 0; i < 8; ++i) {
    values(i, 0) = 3.0;
    values(i, 1) = static_cast<double>(i);
  }
  const std::vector<Label> labels = {
      Label::kFalseAlarm, Label::kTrueAlarm, Label::kFalseAlarm, Label::kTrueAlarm,
      Label::kFalseAlarm, Label::kTrueAlarm, Label::kFalseAlarm, Label::kTrueAlarm};
  const auto matrix = make_matrix(values, labels);
  const auto scheme = coalsel::equal_frequency_bins(matrix, 4);
  const auto gr = coalsel::gain_ratio(matrix, scheme);
  CHECK(score_of(gr, "F_L1_mean") == 0.0);
}

TEST_CASE("chi-square: exact independence scores zero, diagonal table scores N") {
  // Independent: both bins split classes equally.
  Eigen::MatrixXd values(8, 1);
  values << 1, 2, 3, 4, 5, 6, 7, 8;
  const std::vector<Label> independent = {
      Label::kFalseAlarm, Label::kFalseAlarm, Label::kTrueAlarm, Label::kTrueAlarm,
      Label::kFalseAlarm, Label::kFalseAlarm, Label::kTrueAlarm, Label::kTrueAlarm};
  const auto ind_matrix = make_matrix(values, independent);
  const auto ind_scheme = coalsel::equal_frequency_bins(ind_matrix, 2);
  const auto ind = coalsel::chi_square(ind_matrix, ind_scheme);
  CHECK(score_of(ind, "F_L1_mean") == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ind.method == "chi2");

  // Perfectly dependent: bins coincide with classes.
  const std::vector<Label> dependent = {
      Label::kFalseAlarm, Label::kFalseAlarm, Label::kFalseAlarm, Label::kFalseAlarm,
      Label::kTrueAlarm,  Label::kTrueAlarm,  Label::kTrueAlarm,  Label::kTrueAlarm};
  const auto dep_matrix = make_matrix(values, dependent);
  const auto dep_scheme = coalsel::equal_frequency_bins(dep_matrix, 2);
  const auto dep = coalsel::chi_square(dep_matrix, dep_scheme);
  CHECK(score_of(dep, "F_L1_mean") == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("duplicating every sample doubles the chi-square statistic") {
  coalsel::Rng rng(11);
  const int n = 30;
  Eigen::MatrixXd values(n, 1);
  std::vector<Label> labels;
  for (int i = 0; i < n; ++i) {
    labels.push_back(i % 3 == 0 ? Label::kTrueAlarm : Label::kFalseAlarm);
    values(i, 0) = rng.next_gaussian() + (i % 3 == 0 ? 0.8 : 0.0);
  }
  const auto matrix = make_matrix(values, labels);
  const auto scheme = coalsel::equal_frequency_bins(matrix, 5);
  const double base = score_of(coalsel::chi_square(matrix, scheme), "F_L1_mean");

  Eigen::MatrixXd doubled_values(2 * n, 1);
  std::vector<Label> doubled_labels;
  for (int i = 0; i < n; ++i) {
    doubled_values(2 * i, 0) = values(i, 0);
    doubled_values(2 * i + 1, 0) = values(i, 0);
    doubled_labels.push_back(labels[static_cast<std::size_t>(i)]);
    doubled_labels.push_back(labels[static_cast<std::size_t>(i)]);
  }
  const auto doubled = make_matrix(doubled_values, doubled_labels);
  const auto doubled_scheme = coalsel::equal_frequency_bins(doubled, 5);
  const double twice = score_of(coalsel::chi_square(doubled, doubled_scheme), "F_L1_mean");
  CHECK(twice == doctest::Approx(2.0 * base).epsilon(1e-9));
}

TEST_CASE("info gain and gain ratio are invariant under strictly monotone transforms") {
  coalsel::Rng rng(13);
  const int n = 200;
  Eigen::MatrixXd values(n, 1);
  std::vector<Label> labels;
  for (int i = 0; i < n; ++i) {
    labels.push_back(rng.next_bool() ? Label::kTrueAlarm : Label::kFalseAlarm);
    values(i, 0) = rng.next_gaussian() + (labels.back() == Label::kTrueAlarm ? 0.3 : 0.0);
  }
  const auto matrix = make_matrix(values, labels);
  const auto scheme = coalsel::equal_frequency_bins(matrix, 10);

  Eigen::MatrixXd cubed = values.array().cube();
  const auto cubed_matrix = make_matrix(cubed, labels);
  const auto cubed_scheme = coalsel::equal_frequency_bins(cubed_matrix, 10);

  Eigen::MatrixXd exped = values.array().exp();
  const auto exp_matrix = make_matrix(exped, labels);
  const auto exp_scheme = coalsel::equal_frequency_bins(exp_matrix, 10);

  const double base_ig = score_of(coalsel::info_gain(matrix, scheme), "F_L1_mean");
  CHECK(score_of(coalsel::info_gain(cubed_matrix, cubed_scheme), "F_L1_mean") ==
        doctest::Approx(base_ig).epsilon(1e-12));
  CHECK(score_of(coalsel::info_gain(exp_matrix, exp_scheme), "F_L1_mean") ==
        doctest::Approx(base_ig).epsilon(1e-12));

  const double base_gr = score_of(coalsel::gain_ratio(matrix, scheme), "F_L1_mean");
  CHECK(score_of(coalsel::gain_ratio(cubed_matrix, cubed_scheme), "F_L1_mean") ==
        doctest::Approx(base_gr).epsilon(1e-12));
}

TEST_CASE("relief: a label-equal feature attains the maximum weight") {
  coalsel::Rng rng(17);
  const int n = 60;
  Eigen::MatrixXd values(n, 3);
  std::vector<Label> labels;
  for (int i = 0; i < n; ++i) {
    labels.push_back(i % 2 == 0 ? Label::kTrueAlarm : Label::kFalseAlarm);
    values(i, 0) = i % 2 == 0 ? 1.0 : 0.0;  // equals the label
    values(i, 1) = rng.next_gaussian();
    values(i, 2) = rng.next_gaussian();
  }
  const auto matrix = make_matrix(values, labels);
  ReliefOptions options;
  options.k_neighbors = 5;
  const auto report = coalsel::relief(matrix, options);
  // Hits never differ, misses differ by the full range: weight is exactly 1.
  CHECK(score_of(report, "F_L1_mean") == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rank_of(report, "F_L1_mean") == 1);
  CHECK(std::abs(score_of(report, "F_L2_mean")) < 0.2);
}

TEST_CASE("relief: constant features weigh zero and small classes are rejected") {
  Eigen::MatrixXd values(30, 2);
  coalsel::Rng rng(19);
  std::vector<Label> labels;
  for (int i = 0; i < 30; ++i) {
    labels.push_back(i % 2 == 0 ? Label::kTrueAlarm : Label::kFalseAlarm);
    values(i, 0) = 4.2;
    values(i, 1) = rng.next_gaussian();
  }
  const auto matrix = make_matrix(values, labels);
  ReliefOptions options;
  options.k_neighbors = 5;
  CHECK(score_of(coalsel::relief(matrix, options), "F_L1_mean") == 0.0);

  options.k_neighbors = 15;  // each class has exactly 15 members; need more
  CHECK_THROWS_WITH_AS(coalsel::relief(matrix, options), doctest::Contains("k_neighbors"),
                       std::invalid_argument);
}

TEST_CASE("relief six-sample hand trace with one neighbor") {
  Eigen::MatrixXd values(6, 1);
  values << 0.0, 0.2, 0.4, 0.6, 0.8, 1.0;
  const std::vector<Label> labels = {Label::kFalseAlarm, Label::kFalseAlarm,
                                     Label::kFalseAlarm, Label::kTrueAlarm,
                                     Label::kTrueAlarm,  Label::kTrueAlarm};
  const auto matrix = make_matrix(values, labels);
  ReliefOptions options;
  options.k_neighbors = 1;
  const auto report = coalsel::relief(matrix, options);
  // Visit-by-visit nearest hit/miss differences, traced by hand:
  //   0.0: hit 0.2 (0.2), miss 0.6 (0.6) -> +0.4
  //   0.2: hit 0.0 (0.2), miss 0.6 (0.4) -> +0.2
  //   0.4: hit 0.2 (0.2), miss 0.6 (0.2) -> 0
  //   0.6: hit 0.8 (0.2), miss 0.4 (0.2) -> 0
  //   0.8: hit 0.6 (0.2), miss 0.4 (0.4) -> +0.2
  //   1.0: hit 0.8 (0.2), miss 0.4 (0.6) -> +0.4
  // Total 1.2 over m*k = 6 -> 0.2.
  CHECK(score_of(report, "F_L1_mean") == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("selectors are deterministic given their inputs") {
  coalsel::GeneratorSpec spec;
  spec.n_samples = 80;
  spec.channels = {"ECG"};
  spec.signal_length = 64;
  spec.depth = 2;
  spec.coalition = {};
  const auto dataset = coalsel::generate_synthetic(spec, 42);
  const auto matrix = coalsel::build_feature_matrix(
      dataset.records, dataset.channel_order,
      coalsel::default_filter_map(dataset.channel_order), spec.depth);
  const auto scheme = coalsel::equal_frequency_bins(matrix, 10);

  for (int rep = 0; rep < 2; ++rep) {
    const auto a = coalsel::info_gain(matrix, scheme);
    const auto b = coalsel::info_gain(matrix, scheme);
    for (std::size_t i = 0; i < a.scores.size(); ++i) {
      CHECK(a.scores[i].feature == b.scores[i].feature);
      CHECK(a.scores[i].value == b.scores[i].value);
    }
  }
  ReliefOptions options;
  options.k_neighbors = 10;
  const auto r1 = coalsel::relief(matrix, options);
  const auto r2 = coalsel::relief(matrix, options);
  for (std::size_t i = 0; i < r1.scores.size(); ++i) {
    CHECK(r1.scores[i].value == r2.scores[i].value);
  }
}

TEST_CASE("planted parity features sit in the filter blind spot") {
  // Planted columns must score like noise columns: per-seed info gain under
  // 0.05 bits, and chi-square at the noise scale on average. The two planted
  // columns share the label's finite-sample parity fluctuation, so they are
  // treated as one paired draw per seed and compared with a 3-sigma margin
  // estimated from those draws. A genuinely informative column would sit at
  // n * rho^2 above the noise mean for every seed and fail by a wide gap.
  std::vector<double> planted_per_seed;
  double noise_chi_sum = 0.0;
  int noise_count = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    coalsel::GeneratorSpec spec;
    spec.n_samples = 500;
    spec.channels = {"ECG", "PLETH"};
    spec.signal_length = 256;
    spec.depth = 2;
    spec.coalition = {{"ECG", 1}, {"PLETH", 2}};
    const auto dataset = coalsel::generate_synthetic(spec, seed);
    const auto matrix = coalsel::build_feature_matrix(
        dataset.records, dataset.channel_order,
        coalsel::default_filter_map(dataset.channel_order), spec.depth);
    const auto scheme = coalsel::equal_frequency_bins(matrix, 10);

    const auto ig = coalsel::info_gain(matrix, scheme);
    const auto chi = coalsel::chi_square(matrix, scheme);

    double pair_sum = 0.0;
    for (const auto& name : dataset.planted_feature_names) {
      CHECK(score_of(ig, name) < 0.05);
      pair_sum += score_of(chi, name);
    }
    planted_per_seed.push_back(pair_sum / 2.0);
    for (const auto& s : chi.scores) {
      const auto d = coalsel::FeatureDescriptor::parse(s.feature);
      const bool planted_vector = (d.channel == "ECG" && d.level == 1) ||
                                  (d.channel == "PLETH" && d.level == 2);
      if (!planted_vector) {
        noise_chi_sum += s.value;
        ++noise_count;
      }
    }
  }
  const double noise_mean = noise_chi_sum / noise_count;
  double planted_mean = 0.0;
  for (const double v : planted_per_seed) planted_mean += v;
  planted_mean /= static_cast<double>(planted_per_seed.size());
  double planted_var = 0.0;
  for (const double v : planted_per_seed) {
    planted_var += (v - planted_mean) * (v - planted_mean);
  }
  planted_var /= static_cast<double>(planted_per_seed.size() - 1);
  const double margin =
      3.0 * std::sqrt(planted_var / static_cast<double>(planted_per_seed.size()));
  CHECK(planted_mean <= noise_mean + margin);
}
