#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "coalsel/classifier.hpp"
#include "coalsel/dataset.hpp"
#include "coalsel/features.hpp"
#include "coalsel/report.hpp"

namespace coalsel {

// Transferable-utility coalition game over players 0..n-1. The characteristic
// function is supplied as a deterministic evaluator over ascending player
// subsets; values are memoized, so re-evaluating a coalition returns the
// cached payoff exactly. v(empty) = 0 by definition and never reaches the
// evaluator. Safe for concurrent value() calls.
class CoalitionGame {
 public:
  using Evaluator = std::function<double(std::span<const int>)>;

  CoalitionGame(int player_count, Evaluator evaluator);

  int player_count() const { return player_count_; }

  // players must be ascending and duplicate-free.
  double value(std::span<const int> players) const;

  // All value() invocations, including cache hits and the empty coalition.
  std::uint64_t value_calls() const;
  // Evaluator executions only (distinct coalitions actually computed).
  std::uint64_t evaluations() const;

 private:
  int player_count_;
  Evaluator evaluator_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, double> cache_;
  mutable std::uint64_t value_calls_ = 0;
  mutable std::uint64_t evaluations_ = 0;
};

// Payoff change when `player` joins `coalition` (which must exclude it):
// v(S u {i}) - v(S).
double marginal_importance(const CoalitionGame& game, int player,
                           std::span<const int> coalition);

struct ExactShapley {
  Eigen::VectorXd values;
};

// Factorial-weighted subset sum over all coalitions:
//   gamma_i = sum_{S not containing i} |S|! (n-|S|-1)! / n! * (v(S u i) - v(S)).
// Exponential in n; refuses n beyond `ceiling` and points the caller at the
// sampling estimator.
ExactShapley exact_shapley(const CoalitionGame& game, int ceiling = 20);

struct MpeOptions {
  int group_size = 4;  // L
  int rounds = 100;
  std::uint64_t seed = 1;
  int threads = 1;
  // L = 1 measures only v({i}) and is rejected unless explicitly enabled for
  // baseline comparisons.
  bool allow_singleton_groups = false;
};

struct ShapleyEstimate {
  Eigen::VectorXd values;
  int rounds_used = 0;
  int group_size = 0;
  std::uint64_t seed = 0;
  // Marginal-importance computations attributed to each player.
  std::vector<std::uint64_t> per_player_marginals;
};

// Multi-perturbation estimator: each round partitions the players uniformly
// at random into consecutive groups of size L (the remainder forms a smaller
// final group), computes every member's within-group Shapley value with the
// factorial weights at group scale, and averages across rounds. Rounds are
// independent and may be computed on multiple threads; the per-round
// contributions are reduced in round order, so the result is bit-identical
// for a given seed regardless of thread count.
ShapleyEstimate multi_perturbation_shapley(const CoalitionGame& game,
                                           const MpeOptions& options);

// The feature-selection payoff: cross-validated accuracy of the classifier
// on the column subset, centered by the majority-class rate so that an
// uninformative coalition is worth zero. The game holds a reference to
// `matrix`, which must outlive it.
CoalitionGame make_accuracy_game(const FeatureMatrix& matrix, const SplitPlan& plan,
                                 const ClassifierOptions& options = {});

}  // namespace coalsel
