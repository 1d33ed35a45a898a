#include "abmal/abm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "abmal/errors.hpp"
#include "sgd.hpp"

namespace abmal {

std::string_view to_string(ModelKind kind) { return kind == ModelKind::Abm ? "abm" : "ssvm"; }

ModelKind parse_model_kind(std::string_view text) {
  if (text == "abm") return ModelKind::Abm;
  if (text == "ssvm") return ModelKind::Ssvm;
  throw InvalidInput("unknown model kind '" + std::string(text) + "'");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidInput("train config: epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw InvalidInput("train config: learning_rate must be positive");
  if (!(reg_lambda >= 0.0)) throw InvalidInput("train config: reg_lambda must be nonnegative");
  if (!(decay_steps >= 0.0)) throw InvalidInput("train config: decay_steps must be nonnegative");
  game.validate();
}

double regularizer_value(const Eigen::VectorXd& theta, double lambda, Regularizer kind) {
  return kind == Regularizer::Squared ? lambda * theta.squaredNorm() : lambda * theta.norm();
}

Eigen::VectorXd regularizer_gradient(const Eigen::VectorXd& theta, double lambda, Regularizer kind) {
  if (kind == Regularizer::Squared) return 2.0 * lambda * theta;
  const double norm = theta.norm();
  // Zero is a valid subgradient of the norm at the origin.
  if (norm == 0.0) return Eigen::VectorXd::Zero(theta.size());
  return (lambda / norm) * theta;
}

void check_dimension(const ModelParams& m, const MatchingInstance& x) {
  if (m.d() != x.d) {
    throw InvalidInput("model has d=" + std::to_string(m.d()) + " but instance " + x.id +
                       " has d=" + std::to_string(x.d));
  }
}

WeightMatrix potentials(const Eigen::VectorXd& theta, const MatchingInstance& x) {
  if (static_cast<std::size_t>(theta.size()) != x.d) {
    throw InvalidInput("potentials: theta has length " + std::to_string(theta.size()) +
                       " but instance " + x.id + " has d=" + std::to_string(x.d));
  }
  const Eigen::VectorXd flat = x.features * theta;
  const auto n = static_cast<Eigen::Index>(x.n);
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), n, n);
}

Eigen::VectorXd feature_sum(const MatchingInstance& x, const Permutation& pi) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(x.d));
  for (std::size_t i = 0; i < x.n; ++i) s += x.edge(i, static_cast<std::size_t>(pi[i])).transpose();
  return s;
}

Eigen::VectorXd expected_features(const MatchingInstance& x, const Eigen::MatrixXd& marginals) {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(x.n * x.n));
  for (std::size_t i = 0; i < x.n; ++i)
    for (std::size_t j = 0; j < x.n; ++j)
      flat(static_cast<Eigen::Index>(i * x.n + j)) =
          marginals(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return x.features.transpose() * flat;
}

ExampleObjective abm_example_objective(const Eigen::VectorXd& theta, const MatchingInstance& x,
                                       const GameConfig& game) {
  const WeightMatrix psi = potentials(theta, x);
  ExampleObjective out;
  out.equilibrium = double_oracle_equilibrium(psi, game);
  const Eigen::VectorXd truth_features = feature_sum(x, x.truth);
  out.value = out.equilibrium.value - theta.dot(truth_features);
  out.subgradient = expected_features(x, out.equilibrium.adversary_marginals) - truth_features;
  return out;
}

TrainResult train_abm(const Dataset& ds, std::span<const std::size_t> ids, const TrainConfig& cfg) {
  std::vector<std::optional<SupportSeed>> cache(ids.size());
  return detail::run_sgd(ds, ids, cfg, ModelKind::Abm,
                         [&](const Eigen::VectorXd& theta, std::size_t pos, const MatchingInstance& x) {
                           GameConfig game = cfg.game;
                           if (cfg.cache_equilibria && cache[pos]) {
                             game.warm_start = cache[pos];
                             const Permutation map = max_weight_matching(potentials(theta, x));
                             game.warm_start->predictor.push_back(map);
                             game.warm_start->adversary.push_back(map);
                           }
                           ExampleObjective obj;
                           try {
                             obj = abm_example_objective(theta, x, game);
                           } catch (const NonConvergence& e) {
                             throw NonConvergence("example " + x.id + ": " + e.what(), e.gap());
                           }
                           if (cfg.cache_equilibria) cache[pos] = obj.equilibrium.supports();
                           return detail::StepResult{obj.value, std::move(obj.subgradient),
                                                     obj.equilibrium.iterations,
                                                     obj.equilibrium.support_size};
                         });
}

TrainResult train_abm(const Dataset& ds, const TrainConfig& cfg) {
  std::vector<std::size_t> ids(ds.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  return train_abm(ds, ids, cfg);
}

Prediction predict(const ModelParams& m, const MatchingInstance& x, const GameConfig& game) {
  check_dimension(m, x);
  const WeightMatrix psi = potentials(m, x);
  Equilibrium eq = double_oracle_equilibrium(psi, game);
  const Eigen::MatrixXd& am = eq.adversary_marginals;
  auto agreement = [&](const Permutation& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += am(static_cast<Eigen::Index>(i), p[i]);
    return s;
  };
  // Ties among Hamming-optimal responses go to the highest potential.
  Permutation pi = predictor_best_response(am);
  const double best = agreement(pi);
  const double tol = tie_tolerance(am);
  double best_psi = matching_weight(psi, pi);
  for (const Permutation& p : eq.predictor.support) {
    if (agreement(p) < best - tol) continue;
    const double w = matching_weight(psi, p);
    if (w > best_psi + tie_tolerance(psi) || (std::abs(w - best_psi) <= tie_tolerance(psi) && p < pi)) {
      pi = p;
      best_psi = w;
    }
  }
  return {std::move(pi), std::move(eq)};
}

}  // namespace abmal
