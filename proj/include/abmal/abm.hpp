#pragma once

#include <Eigen/Dense>
#include <span>

#include "abmal/data.hpp"
#include "abmal/game.hpp"
#include "abmal/model.hpp"

namespace abmal {

/// psi(i, j) = theta . phi(x, i, j).
WeightMatrix potentials(const Eigen::VectorXd& theta, const MatchingInstance& x);
inline WeightMatrix potentials(const ModelParams& m, const MatchingInstance& x) {
  return potentials(m.theta, x);
}

/// Phi(x, pi) = sum_i phi(x, i, pi_i).
Eigen::VectorXd feature_sum(const MatchingInstance& x, const Permutation& pi);

/// sum_{i,j} marginals(i, j) phi(x, i, j): expected feature vector under a
/// distribution with the given unary marginals.
Eigen::VectorXd expected_features(const MatchingInstance& x, const Eigen::MatrixXd& marginals);

/// Per-example adversarial objective: value of the game with payoff
/// Hamming(pred, adv) + theta . (Phi(x, adv) - Phi(x, truth)), and its
/// subgradient E_adv[Phi] - Phi(truth).
struct ExampleObjective {
  double value = 0.0;
  Eigen::VectorXd subgradient;
  Equilibrium equilibrium;
};

ExampleObjective abm_example_objective(const Eigen::VectorXd& theta, const MatchingInstance& x,
                                       const GameConfig& game = {});

/// Stochastic subgradient descent on the regularized adversarial objective over
/// ds[ids]. ids are visited in a per-epoch shuffle of their ascending order, so
/// the result depends only on the set of ids, the data, and cfg.
TrainResult train_abm(const Dataset& ds, std::span<const std::size_t> ids, const TrainConfig& cfg);
TrainResult train_abm(const Dataset& ds, const TrainConfig& cfg);

struct Prediction {
  Permutation permutation;
  Equilibrium equilibrium;
};

/// Predictor best response to the adversary's equilibrium marginals.
Prediction predict(const ModelParams& m, const MatchingInstance& x, const GameConfig& game = {});

void check_dimension(const ModelParams& m, const MatchingInstance& x);

}  // namespace abmal
