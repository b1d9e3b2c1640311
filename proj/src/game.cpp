#include "coalsel/game.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstring>
#include <stdexcept>
#include <thread>

#include "coalsel/rng.hpp"

namespace coalsel {

namespace {

std::string subset_key(std::span<const int> players) {
  std::string key(players.size() * sizeof(int), '\0');
  if (!players.empty()) {
    std::memcpy(key.data(), players.data(), players.size() * sizeof(int));
  }
  return key;
}

// w(s, n) = s! (n-s-1)! / n! = 1 / (n * C(n-1, s)), exact in double for the
// group sizes used here.
std::vector<double> shapley_weights(int n) {
  std::vector<double> weights(static_cast<std::size_t>(n));
  double binom = 1.0;  // C(n-1, s)
  for (int s = 0; s < n; ++s) {
    weights[static_cast<std::size_t>(s)] = 1.0 / (static_cast<double>(n) * binom);
    binom = binom * static_cast<double>(n - 1 - s) / static_cast<double>(s + 1);
  }
  return weights;
}

}  // namespace

CoalitionGame::CoalitionGame(int player_count, Evaluator evaluator)
    : player_count_(player_count), evaluator_(std::move(evaluator)) {
  if (player_count_ < 1) {
    throw std::invalid_argument("coalition game: need at least one player");
  }
  if (!evaluator_) {
    throw std::invalid_argument("coalition game: null evaluator");
  }
}

double CoalitionGame::value(std::span<const int> players) const {
  for (std::size_t i = 0; i < players.size(); ++i) {
    if (players[i] < 0 || players[i] >= player_count_) {
      throw std::invalid_argument("coalition game: player index out of range");
    }
    if (i > 0 && players[i] <= players[i - 1]) {
      throw std::invalid_argument("coalition game: players must be ascending and unique");
    }
  }
  {
    std::lock_guard<std::mutex> lock(mutex_);
    ++value_calls_;
    if (players.empty()) return 0.0;
    const auto it = cache_.find(subset_key(players));
    if (it != cache_.end()) return it->second;
  }
  const double computed = evaluator_(players);
  std::lock_guard<std::mutex> lock(mutex_);
  const auto [it, inserted] = cache_.emplace(subset_key(players), computed);
  if (inserted) ++evaluations_;
  return it->second;
}

std::uint64_t CoalitionGame::value_calls() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return value_calls_;
}

std::uint64_t CoalitionGame::evaluations() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return evaluations_;
}

double marginal_importance(const CoalitionGame& game, int player,
                           std::span<const int> coalition) {
  std::vector<int> with;
  with.reserve(coalition.size() + 1);
  for (const int p : coalition) {
    if (p == player) {
      throw std::invalid_argument("marginal_importance: player already in the coalition");
    }
    with.push_back(p);
  }
  with.push_back(player);
  std::sort(with.begin(), with.end());
  return game.value(with) - game.value(coalition);
}

ExactShapley exact_shapley(const CoalitionGame& game, int ceiling) {
  const int n = game.player_count();
  if (n > ceiling) {
    throw std::invalid_argument(
        "exact_shapley: " + std::to_string(n) + " players exceeds the exact ceiling of " +
        std::to_string(ceiling) + "; use multi_perturbation_shapley instead");
  }

  // Dense table of v over all subsets of the player set.
  const std::uint32_t subsets = 1u << n;
  std::vector<double> table(subsets);
  std::vector<int> scratch;
  scratch.reserve(static_cast<std::size_t>(n));
  for (std::uint32_t mask = 0; mask < subsets; ++mask) {
    scratch.clear();
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) scratch.push_back(i);
    }
    table[mask] = game.value(scratch);
  }

  const std::vector<double> weights = shapley_weights(n);
  ExactShapley result;
  result.values = Eigen::VectorXd::Zero(n);
  for (std::uint32_t mask = 0; mask < subsets; ++mask) {
    const int size = std::popcount(mask);
    for (int i = 0; i < n; ++i) {
      const std::uint32_t bit = 1u << i;
      if (mask & bit) continue;
      result.values[i] +=
          weights[static_cast<std::size_t>(size)] * (table[mask | bit] - table[mask]);
    }
  }
  return result;
}

ShapleyEstimate multi_perturbation_shapley(const CoalitionGame& game,
                                           const MpeOptions& options) {
  const int n = game.player_count();
  const int L = options.group_size;
  if (L > n) {
    throw std::invalid_argument("multi_perturbation_shapley: group size " +
                                std::to_string(L) + " exceeds player count " +
                                std::to_string(n));
  }
  if (L < 1 || (L < 2 && !options.allow_singleton_groups)) {
    throw std::invalid_argument(
        "multi_perturbation_shapley: group size must be >= 2 (L = 1 only measures "
        "isolated players; enable allow_singleton_groups to permit it)");
  }
  if (options.rounds < 1) {
    throw std::invalid_argument("multi_perturbation_shapley: rounds must be >= 1");
  }
  if (L > 25) {
    throw std::invalid_argument("multi_perturbation_shapley: group size too large to "
                                "enumerate (max 25)");
  }

  const int rounds = options.rounds;
  std::vector<Eigen::VectorXd> per_round(static_cast<std::size_t>(rounds));
  std::vector<std::vector<std::uint64_t>> per_round_marginals(
      static_cast<std::size_t>(rounds));

  auto run_round = [&](int round) {
    Rng rng(Rng::mix(options.seed, static_cast<std::uint64_t>(round)));
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    rng.shuffle(order);

    Eigen::VectorXd contribution = Eigen::VectorXd::Zero(n);
    std::vector<std::uint64_t> marginals(static_cast<std::size_t>(n), 0);

    for (int start = 0; start < n; start += L) {
      const int g = std::min(L, n - start);
      std::vector<int> group(order.begin() + start, order.begin() + start + g);
      std::sort(group.begin(), group.end());

      // Evaluate v over every subset of the group once.
      const std::uint32_t subsets = 1u << g;
      std::vector<double> local(subsets);
      std::vector<int> scratch;
      scratch.reserve(static_cast<std::size_t>(g));
      for (std::uint32_t mask = 0; mask < subsets; ++mask) {
        scratch.clear();
        for (int b = 0; b < g; ++b) {
          if (mask & (1u << b)) scratch.push_back(group[static_cast<std::size_t>(b)]);
        }
        local[mask] = game.value(scratch);
      }

      const std::vector<double> weights = shapley_weights(g);
      for (int b = 0; b < g; ++b) {
        const std::uint32_t bit = 1u << b;
        const int player = group[static_cast<std::size_t>(b)];
        double gamma = 0.0;
        for (std::uint32_t mask = 0; mask < subsets; ++mask) {
          if (mask & bit) continue;
          gamma += weights[static_cast<std::size_t>(std::popcount(mask))] *
                   (local[mask | bit] - local[mask]);
        }
        contribution[player] = gamma;
        marginals[static_cast<std::size_t>(player)] += subsets / 2;
      }
    }
    per_round[static_cast<std::size_t>(round)] = std::move(contribution);
    per_round_marginals[static_cast<std::size_t>(round)] = std::move(marginals);
  };

  const int threads = std::max(1, options.threads);
  if (threads == 1) {
    for (int round = 0; round < rounds; ++round) run_round(round);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&]() {
        for (;;) {
          const int round = next.fetch_add(1);
          if (round >= rounds) return;
          run_round(round);
        }
      });
    }
    for (auto& worker : pool) worker.join();
  }

  ShapleyEstimate estimate;
  estimate.values = Eigen::VectorXd::Zero(n);
  estimate.per_player_marginals.assign(static_cast<std::size_t>(n), 0);
  // Fixed reduction order: round 0, 1, 2, ... regardless of thread schedule.
  for (int round = 0; round < rounds; ++round) {
    estimate.values += per_round[static_cast<std::size_t>(round)];
    for (int i = 0; i < n; ++i) {
      estimate.per_player_marginals[static_cast<std::size_t>(i)] +=
          per_round_marginals[static_cast<std::size_t>(round)][static_cast<std::size_t>(i)];
    }
  }
  estimate.values /= static_cast<double>(rounds);
  estimate.rounds_used = rounds;
  estimate.group_size = L;
  estimate.seed = options.seed;
  return estimate;
}

CoalitionGame make_accuracy_game(const FeatureMatrix& matrix, const SplitPlan& plan,
                                 const ClassifierOptions& options) {
  const double baseline = majority_class_rate(matrix.labels);
  const auto players = static_cast<int>(matrix.feature_count());
  return CoalitionGame(players, [&matrix, plan, options, baseline](
                                    std::span<const int> subset) {
    std::vector<int> columns(subset.begin(), subset.end());
    return cv_accuracy(matrix, columns, plan, options).accuracy - baseline;
  });
}

}  // namespace coalsel
