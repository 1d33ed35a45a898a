#pragma once

#include <Eigen/Dense>
#include <span>

#include "abmal/data.hpp"
#include "abmal/model.hpp"

namespace abmal {

/// argmax_pi [Hamming(truth, pi) + theta . Phi(x, pi)].
Permutation loss_augmented_argmax(const Eigen::VectorXd& theta, const MatchingInstance& x);

/// Structured hinge max_pi [Hamming(truth, pi) + theta . Phi(x, pi)] - theta . Phi(x, truth)
/// and its subgradient Phi(x, pi_aug) - Phi(x, truth).
struct HingeTerm {
  double value = 0.0;
  Eigen::VectorXd subgradient;
  Permutation augmented;
};
HingeTerm structured_hinge(const Eigen::VectorXd& theta, const MatchingInstance& x);

/// Stochastic subgradient descent on the regularized structured hinge; same
/// ordering and step schedule as train_abm. cfg.game is unused.
TrainResult train_ssvm(const Dataset& ds, std::span<const std::size_t> ids, const TrainConfig& cfg);
TrainResult train_ssvm(const Dataset& ds, const TrainConfig& cfg);

/// Single max-weight matching on the learned potentials.
Permutation ssvm_predict(const ModelParams& m, const MatchingInstance& x);

inline constexpr double kPlattParamCap = 50.0;

/// Fits (a, b) of p(z) = 1 / (1 + exp(a z + b)) by minimizing the binary
/// log-loss with projected Newton steps inside the box |a|, |b| <= 50.
/// Throws DegenerateFit when all labels share one class.
PlattParams platt_fit(std::span<const double> scores, std::span<const int> labels);

/// Mean binary log-loss (natural log) of the sigmoid on the sample.
double platt_log_loss(const PlattParams& p, std::span<const double> scores, std::span<const int> labels);

double platt_prob(const PlattParams& p, double z);

/// Platt fit on every edge of ds[ids]: score psi(i, j), label 1 iff truth_i = j.
PlattParams fit_platt_on_edges(const ModelParams& m, const Dataset& ds, std::span<const std::size_t> ids);

struct SsvmUncertainty {
  Eigen::VectorXd node_scores;  ///< sum over right nodes of edge Bernoulli entropies (bits)
  double sample_score = 0.0;
};

/// Edge-independent Bernoulli entropy scoring. Throws InvalidState if the
/// model carries no fitted Platt parameters.
SsvmUncertainty ssvm_uncertainty(const ModelParams& m, const MatchingInstance& x);
SsvmUncertainty ssvm_uncertainty(const ModelParams& m, const PlattParams& p, const MatchingInstance& x);

/// Entropy in bits of a Bernoulli(p) variable.
double bernoulli_entropy(double p);

}  // namespace abmal
