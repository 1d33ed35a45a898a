#pragma once
// Shared stochastic subgradient driver for the ABM and SSVM learners.

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "abmal/data.hpp"
#include "abmal/errors.hpp"
#include "abmal/model.hpp"
#include "abmal/random.hpp"

namespace abmal::detail {

struct StepResult {
  double value = 0.0;
  Eigen::VectorXd subgradient;
  std::size_t game_iterations = 0;
  std::size_t support_size = 1;
};

/// fn(theta, position, instance) -> StepResult, where position indexes the
/// ascending-sorted training ids and stays fixed across epochs.
template <typename StepFn>
TrainResult run_sgd(const Dataset& ds, std::span<const std::size_t> ids, const TrainConfig& cfg,
                    ModelKind kind, StepFn&& fn) {
  cfg.validate();
  if (ids.empty()) throw InvalidInput("training set is empty");
  std::vector<std::size_t> sorted(ids.begin(), ids.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t id : sorted) {
    if (id >= ds.size()) throw InvalidInput("training instance index out of range");
    if (ds[id].d != ds.d) throw InvalidInput("training instance has inconsistent feature dimension");
  }
  const auto d = static_cast<Eigen::Index>(ds.d);
  Eigen::VectorXd theta = cfg.init_theta.value_or(Eigen::VectorXd::Zero(d));
  if (theta.size() != d) throw InvalidInput("init_theta has the wrong length");

  const double decay = cfg.decay_steps > 0.0 ? cfg.decay_steps : static_cast<double>(sorted.size());
  auto rng = substream(cfg.seed, "train-shuffle");
  std::vector<std::size_t> order(sorted.size());

  TrainResult result;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    EpochStats stats;
    for (std::size_t pos : order) {
      const StepResult r = fn(theta, pos, ds[sorted[pos]]);
      stats.objective += r.value + regularizer_value(theta, cfg.reg_lambda, cfg.regularizer);
      stats.game_iterations += r.game_iterations;
      stats.mean_support_size += static_cast<double>(r.support_size);
      const Eigen::VectorXd grad = r.subgradient + regularizer_gradient(theta, cfg.reg_lambda, cfg.regularizer);
      const double eta = cfg.learning_rate / (1.0 + static_cast<double>(step) / decay);
      theta -= eta * grad;
      ++step;
    }
    stats.objective /= static_cast<double>(order.size());
    stats.mean_support_size /= static_cast<double>(order.size());
    result.epochs.push_back(stats);
  }
  result.params.kind = kind;
  result.params.theta = std::move(theta);
  result.params.reg_lambda = cfg.reg_lambda;
  result.params.trained_rounds = 1;
  return result;
}

}  // namespace abmal::detail
