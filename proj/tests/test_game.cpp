#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "coalsel/game.hpp"
#include "coalsel/rng.hpp"
#include "oracles.hpp"

using coalsel::CoalitionGame;
using coalsel::MpeOptions;

namespace {

// Random general game: independent uniform payoff per coalition, v(empty)=0.
// Deterministic in (n, seed) and usable as a plain function.
class TableGame {
 public:
  TableGame(int n, std::uint64_t seed) : n_(n) {
    coalsel::Rng rng(seed);
    table_.resize(std::size_t{1} << n, 0.0);
    for (std::size_t mask = 1; mask < table_.size(); ++mask) {
      table_[mask] = rng.next_double();
    }
  }

  int players() const { return n_; }

  double operator()(std::span<const int> subset) const {
    std::size_t mask = 0;
    for (const int p : subset) mask |= std::size_t{1} << p;
    return table_[mask];
  }

  double& at_mask(std::size_t mask) { return table_[mask]; }
  double at_mask(std::size_t mask) const { return table_[mask]; }

  // Rewrites the table so that `player` contributes nothing to any coalition.
  void make_dummy(int player) {
    const std::size_t bit = std::size_t{1} << player;
    for (std::size_t mask = 0; mask < table_.size(); ++mask) {
      if (mask & bit) table_[mask] = table_[mask & ~bit];
    }
  }

  // Rewrites the table so players a and b are interchangeable.
  void make_symmetric(int a, int b) {
    const std::size_t bit_a = std::size_t{1} << a;
    const std::size_t bit_b = std::size_t{1} << b;
    for (std::size_t mask = 0; mask < table_.size(); ++mask) {
      const bool has_a = mask & bit_a;
      const bool has_b = mask & bit_b;
      if (has_a != has_b) {
        const std::size_t swapped = (mask & ~(bit_a | bit_b)) | (has_a ? bit_b : bit_a);
        const double mean = 0.5 * (table_[mask] + table_[swapped]);
        table_[mask] = mean;
        table_[swapped] = mean;
      }
    }
  }

 private:
  int n_;
  std::vector<double> table_;
};

CoalitionGame to_game(const TableGame& table) {
  return CoalitionGame(table.players(),
                       [table](std::span<const int> subset) { return table(subset); });
}

// Supermodular family: additive worths plus nonnegative pairwise synergies.
class SynergyGame {
 public:
  SynergyGame(int n, std::uint64_t seed) : n_(n), singles_(n), pairs_(n, n) {
    coalsel::Rng rng(seed);
    for (int i = 0; i < n; ++i) singles_[i] = rng.next_double();
    pairs_.setZero();
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        pairs_(i, j) = 0.2 * rng.next_double();
      }
    }
  }

  int players() const { return n_; }

  double operator()(std::span<const int> subset) const {
    double value = 0.0;
    for (std::size_t a = 0; a < subset.size(); ++a) {
      value += singles_[subset[a]];
      for (std::size_t b = a + 1; b < subset.size(); ++b) {
        value += pairs_(subset[a], subset[b]);
      }
    }
    return value;
  }

  // Closed form: gamma_i = singles_i + half the total synergy i participates in.
  Eigen::VectorXd analytic_shapley() const {
    Eigen::VectorXd gamma = singles_;
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        const double synergy = i < j ? pairs_(i, j) : pairs_(j, i);
        if (i != j) gamma[i] += 0.5 * synergy;
      }
    }
    return gamma;
  }

 private:
  int n_;
  Eigen::VectorXd singles_;
  Eigen::MatrixXd pairs_;
};

}  // namespace

TEST_CASE("empty coalition is worth zero and marginal importance matches the definition") {
  CoalitionGame game(3, [](std::span<const int> s) {
    return s.size() == 1 && s[0] == 1 ? 0.6 : static_cast<double>(s.size());
  });
  CHECK(game.value(std::vector<int>{}) == 0.0);
  CHECK(coalsel::marginal_importance(game, 1, std::vector<int>{}) == 0.6);
}

TEST_CASE("quadratic game: joining a two-player coalition is worth five") {
  CoalitionGame game(4, [](std::span<const int> s) {
    const double size = static_cast<double>(s.size());
    return size * size;
  });
  const std::vector<int> coalition = {0, 2};
  CHECK(coalsel::marginal_importance(game, 3, coalition) == 5.0);
  CHECK_THROWS_WITH_AS(coalsel::marginal_importance(game, 2, coalition),
                       doctest::Contains("already in the coalition"), std::invalid_argument);
}

TEST_CASE("dummy player's marginal importance is zero for every coalition") {
  TableGame table(5, 77);
  table.make_dummy(2);
  const CoalitionGame game = to_game(table);
  for (const std::vector<int> s :
       {std::vector<int>{}, {0}, {1, 3}, {0, 1, 3, 4}}) {
    CHECK(coalsel::marginal_importance(game, 2, s) == 0.0);
  }
}

TEST_CASE("two-player hand example: values (2, 4)") {
  CoalitionGame game(2, [](std::span<const int> s) {
    if (s.size() == 2) return 6.0;
    return s[0] == 0 ? 1.0 : 3.0;
  });
  const auto exact = coalsel::exact_shapley(game);
  CHECK(exact.values[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(exact.values[1] == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("fully symmetric game splits the grand payoff evenly") {
  for (const int n : {3, 5, 7}) {
    CoalitionGame game(n, [](std::span<const int> s) {
      const double size = static_cast<double>(s.size());
      return size * std::sqrt(size);
    });
    const auto exact = coalsel::exact_shapley(game);
    const double expected = game.value([&] {
      std::vector<int> all(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
      return all;
    }()) / n;
    for (int i = 0; i < n; ++i) {
      CHECK(exact.values[i] == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("exact shapley refuses oversized games and points at the estimator") {
  CoalitionGame game(22, [](std::span<const int>) { return 0.0; });
  CHECK_THROWS_WITH_AS(coalsel::exact_shapley(game),
                       doctest::Contains("multi_perturbation_shapley"),
                       std::invalid_argument);
}

TEST_CASE("axioms hold on random games: efficiency, symmetry, dummy, additivity") {
  coalsel::Rng picker(13);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 3 + static_cast<int>(picker.next_below(6));  // 3..8
    TableGame table(n, 500 + static_cast<std::uint64_t>(trial));
    table.make_dummy(n - 1);
    table.make_symmetric(0, 1);
    const CoalitionGame game = to_game(table);
    const auto exact = coalsel::exact_shapley(game);

    // Efficiency.
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    CHECK(std::abs(exact.values.sum() - game.value(all)) <= 1e-9);
    // Symmetry and dummy.
    CHECK(std::abs(exact.values[0] - exact.values[1]) <= 1e-9);
    CHECK(std::abs(exact.values[n - 1]) <= 1e-12);

    // Additivity: shapley(v + w) = shapley(v) + shapley(w).
    const TableGame other(n, 9000 + static_cast<std::uint64_t>(trial));
    const CoalitionGame game_w = to_game(other);
    CoalitionGame game_sum(n, [&table, &other](std::span<const int> s) {
      return table(s) + other(s);
    });
    const auto w_vals = coalsel::exact_shapley(game_w);
    const auto sum_vals = coalsel::exact_shapley(game_sum);
    CHECK((sum_vals.values - exact.values - w_vals.values).lpNorm<Eigen::Infinity>() <=
          1e-9);
  }
}

TEST_CASE("subset-weighted form equals the permutation-enumeration oracle") {
  coalsel::Rng picker(17);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 3 + static_cast<int>(picker.next_below(5));  // 3..7
    const TableGame table(n, 2000 + static_cast<std::uint64_t>(trial));
    const CoalitionGame game = to_game(table);
    const auto exact = coalsel::exact_shapley(game);
    const Eigen::VectorXd reference = oracles::permutation_shapley(
        n, [&table](std::span<const int> s) { return table(s); });
    CHECK((exact.values - reference).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("estimator with L = n reproduces the exact values regardless of rounds and seed") {
  const TableGame table(9, 4242);
  for (const auto& [rounds, seed] : std::vector<std::pair<int, std::uint64_t>>{
           {1, 3}, {7, 99}, {25, 12345}}) {
    const CoalitionGame game = to_game(table);
    const auto exact = coalsel::exact_shapley(game);
    MpeOptions options;
    options.group_size = 9;
    options.rounds = rounds;
    options.seed = seed;
    const auto estimate = coalsel::multi_perturbation_shapley(game, options);
    CHECK((estimate.values - exact.values).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK(estimate.rounds_used == rounds);
  }
}

TEST_CASE("dummy players estimate to exactly zero for any group size") {
  TableGame table(8, 31);
  table.make_dummy(3);
  table.make_dummy(6);
  const CoalitionGame game = to_game(table);
  for (const int L : {2, 3, 5, 8}) {
    MpeOptions options;
    options.group_size = L;
    options.rounds = 40;
    options.seed = 7;
    const auto estimate = coalsel::multi_perturbation_shapley(game, options);
    CHECK(estimate.values[3] == 0.0);
    CHECK(estimate.values[6] == 0.0);
  }
}

TEST_CASE("supermodular 12-player games: estimator tracks the exact ranking") {
  // The acceptance suite runs the frozen version of this at 20 games and
  // 2000 rounds; this is the fast smoke version.
  const SynergyGame synergy(12, 606);
  const CoalitionGame game(12, [&synergy](std::span<const int> s) { return synergy(s); });
  const auto exact = coalsel::exact_shapley(game);
  CHECK((exact.values - synergy.analytic_shapley()).lpNorm<Eigen::Infinity>() <= 1e-10);

  MpeOptions options;
  options.group_size = 4;
  options.rounds = 400;
  options.seed = 11;
  const auto estimate = coalsel::multi_perturbation_shapley(game, options);
  CHECK(oracles::spearman(estimate.values, exact.values) >= 0.9);
}

TEST_CASE("estimator rejects invalid group sizes and rounds") {
  const TableGame table(6, 1);
  const CoalitionGame game = to_game(table);
  MpeOptions options;
  options.group_size = 7;
  CHECK_THROWS_AS(coalsel::multi_perturbation_shapley(game, options), std::invalid_argument);
  options.group_size = 1;
  CHECK_THROWS_WITH_AS(coalsel::multi_perturbation_shapley(game, options),
                       doctest::Contains("allow_singleton_groups"), std::invalid_argument);
  options.allow_singleton_groups = true;
  const auto singles = coalsel::multi_perturbation_shapley(game, options);
  // L = 1: every round measures v({i}) exactly.
  for (int i = 0; i < 6; ++i) {
    CHECK(singles.values[i] == doctest::Approx(game.value(std::vector<int>{i})));
  }
  options.group_size = 3;
  options.rounds = 0;
  CHECK_THROWS_AS(coalsel::multi_perturbation_shapley(game, options), std::invalid_argument);
}

TEST_CASE("per-round evaluation budget stays within ceil(n/L) * 2^L") {
  const int n = 10;
  const TableGame table(n, 3);
  const CoalitionGame game = to_game(table);
  MpeOptions options;
  options.group_size = 4;
  options.rounds = 5;
  options.seed = 2;
  const std::uint64_t before = game.value_calls();
  coalsel::multi_perturbation_shapley(game, options);
  const std::uint64_t calls = game.value_calls() - before;
  const std::uint64_t per_round_budget =
      static_cast<std::uint64_t>((n + options.group_size - 1) / options.group_size)
      << options.group_size;
  CHECK(calls <= per_round_budget * static_cast<std::uint64_t>(options.rounds));
  // Distinct coalitions computed can never exceed calls.
  CHECK(game.evaluations() <= calls);
  CHECK(game.evaluations() > 0);
}

TEST_CASE("per-player marginal counts are recorded") {
  const TableGame table(7, 5);
  const CoalitionGame game = to_game(table);
  MpeOptions options;
  options.group_size = 3;
  options.rounds = 6;
  const auto estimate = coalsel::multi_perturbation_shapley(game, options);
  REQUIRE(estimate.per_player_marginals.size() == 7);
  // Each round a player sits in a group of size 3 or 1 (remainder), doing
  // 2^(g-1) marginal computations: 4 or 1. Round total: 3*4 + 3*4 + 1 = 25.
  std::uint64_t total = 0;
  for (const auto c : estimate.per_player_marginals) {
    total += c;
    CHECK(c >= 6);
  }
  CHECK(total == static_cast<std::uint64_t>(6 * 25));
}

TEST_CASE("estimate is deterministic in the seed and independent of thread count") {
  const SynergyGame synergy(20, 88);
  MpeOptions options;
  options.group_size = 4;
  options.rounds = 60;
  options.seed = 2024;

  const CoalitionGame a(20, [&synergy](std::span<const int> s) { return synergy(s); });
  options.threads = 1;
  const auto single = coalsel::multi_perturbation_shapley(a, options);

  const CoalitionGame b(20, [&synergy](std::span<const int> s) { return synergy(s); });
  options.threads = 4;
  const auto pooled = coalsel::multi_perturbation_shapley(b, options);

  for (int i = 0; i < 20; ++i) {
    CHECK(single.values[i] == pooled.values[i]);  // bit-identical
  }

  const CoalitionGame c(20, [&synergy](std::span<const int> s) { return synergy(s); });
  options.seed = 2025;
  const auto reseeded = coalsel::multi_perturbation_shapley(c, options);
  CHECK((single.values - reseeded.values).lpNorm<Eigen::Infinity>() > 0.0);
}

TEST_CASE("memoization returns cached payoffs exactly and counts evaluations once") {
  int executions = 0;
  CoalitionGame game(4, [&executions](std::span<const int> s) {
    ++executions;
    return static_cast<double>(s.size()) * 0.25;
  });
  const std::vector<int> subset = {1, 3};
  const double first = game.value(subset);
  const double second = game.value(subset);
  CHECK(first == second);
  CHECK(executions == 1);
  CHECK(game.evaluations() == 1);
  CHECK(game.value_calls() == 2);
  CHECK_THROWS_AS(game.value(std::vector<int>{3, 1}), std::invalid_argument);
  CHECK_THROWS_AS(game.value(std::vector<int>{1, 1}), std::invalid_argument);
}

TEST_CASE("rank_features sorts descending with index tie-break") {
  const Eigen::VectorXd values = (Eigen::VectorXd(3) << 0.1, 0.5, 0.3).finished();
  const std::vector<std::string> names = {"p1", "p2", "p3"};
  const auto report = coalsel::rank_features(values, names, 2);
  REQUIRE(report.scores.size() == 2);
  CHECK(report.scores[0].feature == "p2");
  CHECK(report.scores[0].rank == 1);
  CHECK(report.scores[1].feature == "p3");
  CHECK(report.scores[1].rank == 2);

  const auto tied =
      coalsel::rank_features(Eigen::VectorXd::Constant(3, 1.0), names, 2);
  CHECK(tied.scores[0].feature == "p1");
  CHECK(tied.scores[1].feature == "p2");

  const auto complete = coalsel::rank_features(values, names, 3);
  std::set<std::string> seen;
  for (const auto& s : complete.scores) seen.insert(s.feature);
  CHECK(seen.size() == 3);

  CHECK_THROWS_AS(coalsel::rank_features(values, names, 4), std::invalid_argument);
}

TEST_CASE("ranking is invariant under positive affine transformations") {
  coalsel::Rng rng(55);
  Eigen::VectorXd values(12);
  for (Eigen::Index i = 0; i < 12; ++i) values[i] = rng.next_gaussian();
  std::vector<std::string> names;
  for (int i = 0; i < 12; ++i) names.push_back("f" + std::to_string(i));

  const auto base = coalsel::rank_features(values, names, 12);
  const Eigen::VectorXd transformed = (3.7 * values.array() + 11.0).matrix();
  const auto moved = coalsel::rank_features(transformed, names, 12);
  for (std::size_t i = 0; i < base.scores.size(); ++i) {
    CHECK(base.scores[i].feature == moved.scores[i].feature);
    CHECK(base.scores[i].rank == moved.scores[i].rank);
  }
}

TEST_CASE("accuracy game centers the payoff at the majority rate") {
  coalsel::Rng rng(61);
  const int n = 40;
  Eigen::MatrixXd values(n, 3);
  std::vector<coalsel::Label> labels;
  for (int i = 0; i < n; ++i) {
    labels.push_back(i % 2 == 0 ? coalsel::Label::kTrueAlarm : coalsel::Label::kFalseAlarm);
    values(i, 0) = (i % 2 == 0 ? 3.0 : -3.0) + 0.05 * rng.next_gaussian();
    values(i, 1) = rng.next_gaussian();
    values(i, 2) = rng.next_gaussian();
  }
  coalsel::FeatureMatrix matrix;
  matrix.values = values;
  matrix.labels = labels;
  for (int c = 0; c < 3; ++c) matrix.descriptors.push_back({"F", c + 1, "mean"});

  const auto plan = coalsel::stratified_kfold(labels, 5, 9);
  const CoalitionGame game = coalsel::make_accuracy_game(matrix, plan);
  CHECK(game.value(std::vector<int>{}) == 0.0);
  // The separating feature alone is worth accuracy 1.0 minus the majority rate 0.5.
  CHECK(game.value(std::vector<int>{0}) == doctest::Approx(0.5).epsilon(1e-12));
}
