#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "abmal/game.hpp"

namespace abmal {

enum class ModelKind { Abm, Ssvm };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

/// Sigmoid p(z) = 1 / (1 + exp(a z + b)) mapping an edge potential to a probability.
struct PlattParams {
  double a = 0.0;
  double b = 0.0;
};

struct ModelParams {
  ModelKind kind = ModelKind::Abm;
  Eigen::VectorXd theta;
  double reg_lambda = 0.0;
  std::size_t trained_rounds = 0;
  /// Present once a Platt sigmoid has been fitted (SSVM models only).
  std::optional<PlattParams> platt;

  std::size_t d() const { return static_cast<std::size_t>(theta.size()); }
};

enum class Regularizer {
  Squared,  ///< lambda * ||theta||^2
  Norm,     ///< lambda * ||theta||
};

struct TrainConfig {
  std::size_t epochs = 30;
  double learning_rate = 0.05;
  /// Step size eta_t = learning_rate / (1 + t / decay_steps); 0 means one epoch.
  double decay_steps = 0.0;
  double reg_lambda = 1e-3;
  Regularizer regularizer = Regularizer::Squared;
  std::uint64_t seed = 1;
  GameConfig game;
  bool cache_equilibria = true;
  /// Starting point; zero vector when unset.
  std::optional<Eigen::VectorXd> init_theta;

  void validate() const;
};

struct EpochStats {
  /// Mean over the epoch's visits of the per-example objective plus regularizer.
  double objective = 0.0;
  std::size_t game_iterations = 0;
  double mean_support_size = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochStats> epochs;
};

/// Regularizer value and gradient under the configured form.
double regularizer_value(const Eigen::VectorXd& theta, double lambda, Regularizer kind);
Eigen::VectorXd regularizer_gradient(const Eigen::VectorXd& theta, double lambda, Regularizer kind);

}  // namespace abmal
