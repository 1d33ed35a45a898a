#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "abmal/matching.hpp"

namespace abmal {

/// Mixed strategy over a finite support of permutations.
struct MixedStrategy {
  std::vector<Permutation> support;
  std::vector<double> probs;

  std::size_t n() const { return support.empty() ? 0 : support.front().size(); }
  /// Throws InvalidInput unless probs are nonnegative, sum to 1 within 1e-9,
  /// and support entries are distinct permutations of equal length.
  void validate() const;
};

/// Pair of strategy-support lists used to seed a double-oracle run.
struct SupportSeed {
  std::vector<Permutation> predictor;
  std::vector<Permutation> adversary;
};

struct GameConfig {
  double eps_do = 1e-6;  ///< best-response improvement tolerance
  double eps_lp = 1e-9;  ///< restricted-game solve tolerance
  /// Iteration cap; defaults to 10 n^2 when unset.
  std::optional<std::size_t> max_iters;
  std::optional<SupportSeed> warm_start;

  void validate() const;
};

struct Equilibrium {
  MixedStrategy predictor;
  MixedStrategy adversary;
  double value = 0.0;
  Eigen::MatrixXd predictor_marginals;  ///< (i, j) = P(predictor assigns i -> j)
  Eigen::MatrixXd adversary_marginals;
  std::size_t iterations = 0;
  std::size_t support_size = 0;  ///< adversary support cardinality
  double gap = 0.0;              ///< largest best-response improvement at termination
  /// Every strategy generated during the run, including zero-probability ones.
  SupportSeed strategy_sets;

  /// Warm-start seed that reproduces this run's restricted game exactly.
  const SupportSeed& supports() const { return strategy_sets; }
  /// Warm-start seed holding only the positive-probability strategies.
  SupportSeed active_supports() const { return {predictor.support, adversary.support}; }
};

/// Payoff of the pure strategy pair: Hamming(pred, adv) + sum_i psi(i, adv_i).
double game_payoff(const Permutation& pred, const Permutation& adv, const WeightMatrix& psi);

/// M(i, j) = total probability of support permutations with pi_i = j.
Eigen::MatrixXd unary_marginals(const MixedStrategy& s);

/// Q(a, b) = total probability of support permutations with pi_i = a and pi_j = b.
/// Requires i != j; by bijectivity the diagonal of Q is zero.
Eigen::MatrixXd pairwise_marginals(const MixedStrategy& s, std::size_t i, std::size_t j);

/// argmax_pi sum_i [1 - pred_marginals(i, pi_i) + psi(i, pi_i)].
Permutation adversary_best_response(const Eigen::MatrixXd& pred_marginals, const WeightMatrix& psi);

/// argmin_pi sum_i [1 - adv_marginals(i, pi_i)], i.e. max-weight matching on the marginals.
Permutation predictor_best_response(const Eigen::MatrixXd& adv_marginals);

/// Double-oracle equilibrium of the game with payoff game_payoff over all n!
/// permutations. The predictor minimizes, the adversary maximizes. Both
/// strategy sets grow by one best response per iteration when it improves by
/// more than eps_do.
Equilibrium double_oracle_equilibrium(const WeightMatrix& psi, const GameConfig& cfg = {});

}  // namespace abmal
