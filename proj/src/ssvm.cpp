#include "abmal/ssvm.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "abmal/abm.hpp"
#include "abmal/errors.hpp"
#include "sgd.hpp"

namespace abmal {

Permutation loss_augmented_argmax(const Eigen::VectorXd& theta, const MatchingInstance& x) {
  WeightMatrix w = potentials(theta, x);
  for (std::size_t i = 0; i < x.n; ++i) {
    for (std::size_t j = 0; j < x.n; ++j) {
      if (static_cast<int>(j) != x.truth[i]) w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += 1.0;
    }
  }
  return max_weight_matching(w);
}

HingeTerm structured_hinge(const Eigen::VectorXd& theta, const MatchingInstance& x) {
  HingeTerm h;
  h.augmented = loss_augmented_argmax(theta, x);
  const Eigen::VectorXd aug = feature_sum(x, h.augmented);
  const Eigen::VectorXd truth = feature_sum(x, x.truth);
  h.value = static_cast<double>(hamming_distance(x.truth, h.augmented)) + theta.dot(aug) - theta.dot(truth);
  h.subgradient = aug - truth;
  return h;
}

TrainResult train_ssvm(const Dataset& ds, std::span<const std::size_t> ids, const TrainConfig& cfg) {
  return detail::run_sgd(ds, ids, cfg, ModelKind::Ssvm,
                         [](const Eigen::VectorXd& theta, std::size_t, const MatchingInstance& x) {
                           HingeTerm h = structured_hinge(theta, x);
                           return detail::StepResult{h.value, std::move(h.subgradient), 0, 1};
                         });
}

TrainResult train_ssvm(const Dataset& ds, const TrainConfig& cfg) {
  std::vector<std::size_t> ids(ds.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  return train_ssvm(ds, ids, cfg);
}

Permutation ssvm_predict(const ModelParams& m, const MatchingInstance& x) {
  check_dimension(m, x);
  return max_weight_matching(potentials(m, x));
}

namespace {

double softplus(double u) { return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

struct PlattObjective {
  double value = 0.0;
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();
  Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
};

// Mean of softplus(u) - (1 - t) u with u = a z + b: the log-loss of p = 1/(1+e^u).
PlattObjective platt_objective(const Eigen::Vector2d& ab, std::span<const double> z, std::span<const int> t) {
  PlattObjective o;
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double u = ab(0) * z[k] + ab(1);
    const double target = t[k] ? 1.0 : 0.0;
    const double p = 1.0 / (1.0 + std::exp(u));
    o.value += softplus(u) - (1.0 - target) * u;
    const double r = target - p;
    o.grad += Eigen::Vector2d(r * z[k], r);
    const double w = p * (1.0 - p);
    o.hess += w * Eigen::Matrix2d{{z[k] * z[k], z[k]}, {z[k], 1.0}};
  }
  const double inv = 1.0 / static_cast<double>(z.size());
  o.value *= inv;
  o.grad *= inv;
  o.hess *= inv;
  return o;
}

Eigen::Vector2d clip(const Eigen::Vector2d& v) {
  return v.cwiseMax(-kPlattParamCap).cwiseMin(kPlattParamCap);
}

}  // namespace

PlattParams platt_fit(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw InvalidInput("platt_fit: scores and labels must be non-empty and of equal length");
  }
  std::size_t positives = 0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] != 0 && labels[k] != 1) throw InvalidInput("platt_fit: labels must be 0 or 1");
    if (!std::isfinite(scores[k])) throw InvalidInput("platt_fit: non-finite score");
    positives += static_cast<std::size_t>(labels[k]);
  }
  if (positives == 0 || positives == labels.size()) {
    throw DegenerateFit("platt_fit: need at least one positive and one negative label");
  }

  // Start at the prior-only fit: a = 0, p = prior.
  const double prior = static_cast<double>(positives) / static_cast<double>(labels.size());
  Eigen::Vector2d x(0.0, std::log((1.0 - prior) / prior));
  x = clip(x);
  for (int iter = 0; iter < 500; ++iter) {
    const PlattObjective o = platt_objective(x, scores, labels);
    // Variables pinned at the cap with the gradient pushing outward stay fixed.
    std::array<bool, 2> free{};
    for (int k = 0; k < 2; ++k) {
      const bool at_hi = x(k) >= kPlattParamCap && o.grad(k) < 0.0;
      const bool at_lo = x(k) <= -kPlattParamCap && o.grad(k) > 0.0;
      free[k] = !(at_hi || at_lo);
    }
    Eigen::Vector2d pg = o.grad;
    for (int k = 0; k < 2; ++k)
      if (!free[k]) pg(k) = 0.0;
    if (pg.norm() <= 1e-8) break;

    Eigen::Vector2d dir = Eigen::Vector2d::Zero();
    if (free[0] && free[1]) {
      Eigen::Matrix2d h = o.hess;
      h.diagonal().array() += 1e-12;
      dir = -h.ldlt().solve(o.grad);
      if (!dir.allFinite() || dir.dot(o.grad) >= 0.0) dir = -o.grad;
    } else {
      for (int k = 0; k < 2; ++k) {
        if (free[k]) dir(k) = o.hess(k, k) > 1e-14 ? -o.grad(k) / o.hess(k, k) : -o.grad(k);
      }
    }
    double step = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::Vector2d cand = clip(x + step * dir);
      const double f = platt_objective(cand, scores, labels).value;
      if (f <= o.value + 1e-4 * o.grad.dot(cand - x)) {
        moved = (cand - x).norm() > 0.0;
        x = cand;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return {x(0), x(1)};
}

double platt_log_loss(const PlattParams& p, std::span<const double> scores, std::span<const int> labels) {
  return platt_objective(Eigen::Vector2d(p.a, p.b), scores, labels).value;
}

double platt_prob(const PlattParams& p, double z) {
  const double u = p.a * z + p.b;
  if (u >= 0.0) {
    const double e = std::exp(-u);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(u));
}

PlattParams fit_platt_on_edges(const ModelParams& m, const Dataset& ds, std::span<const std::size_t> ids) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (std::size_t id : ids) {
    const MatchingInstance& x = ds[id];
    const WeightMatrix psi = potentials(m, x);
    for (std::size_t i = 0; i < x.n; ++i) {
      for (std::size_t j = 0; j < x.n; ++j) {
        scores.push_back(psi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        labels.push_back(x.truth[i] == static_cast<int>(j) ? 1 : 0);
      }
    }
  }
  return platt_fit(scores, labels);
}

double bernoulli_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

SsvmUncertainty ssvm_uncertainty(const ModelParams& m, const PlattParams& p, const MatchingInstance& x) {
  const WeightMatrix psi = potentials(m, x);
  SsvmUncertainty u;
  u.node_scores = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(x.n));
  for (Eigen::Index i = 0; i < psi.rows(); ++i) {
    for (Eigen::Index j = 0; j < psi.cols(); ++j) u.node_scores(i) += bernoulli_entropy(platt_prob(p, psi(i, j)));
  }
  u.sample_score = u.node_scores.sum();
  return u;
}

SsvmUncertainty ssvm_uncertainty(const ModelParams& m, const MatchingInstance& x) {
  if (!m.platt) throw InvalidState("ssvm_uncertainty: model has no fitted Platt parameters");
  return ssvm_uncertainty(m, *m.platt, x);
}

}  // namespace abmal
