#include "abmal/game.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "abmal/errors.hpp"
#include "abmal/matrix_game.hpp"

namespace abmal {
namespace {

constexpr double kPruneThreshold = 1e-12;

void check_doubly_stochastic(const Eigen::MatrixXd& m, const char* who) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw InvalidInput(std::string(who) + ": marginal matrix must be square and non-empty");
  }
  constexpr double tol = 1e-6;
  const bool rows_ok = ((m.rowwise().sum().array() - 1.0).abs() <= tol).all();
  const bool cols_ok = ((m.colwise().sum().array() - 1.0).abs() <= tol).all();
  if (!rows_ok || !cols_ok || (m.array() < -tol).any()) {
    throw InvalidInput(std::string(who) + ": marginals are not doubly stochastic");
  }
}

// Keeps strictly positive entries and renormalizes.
MixedStrategy prune(const std::vector<Permutation>& support, const Eigen::VectorXd& probs) {
  MixedStrategy s;
  double total = 0.0;
  for (Eigen::Index k = 0; k < probs.size(); ++k) {
    if (probs(k) > kPruneThreshold) total += probs(k);
  }
  for (Eigen::Index k = 0; k < probs.size(); ++k) {
    if (probs(k) > kPruneThreshold) {
      s.support.push_back(support[static_cast<std::size_t>(k)]);
      s.probs.push_back(probs(k) / total);
    }
  }
  return s;
}

bool contains(const std::vector<Permutation>& set, const Permutation& p) {
  return std::find(set.begin(), set.end(), p) != set.end();
}

std::vector<Permutation> dedupe(const std::vector<Permutation>& in, std::size_t n) {
  std::vector<Permutation> out;
  for (const Permutation& p : in) {
    if (p.size() != n) throw InvalidInput("warm start permutation has the wrong size");
    if (!contains(out, p)) out.push_back(p);
  }
  return out;
}

}  // namespace

void MixedStrategy::validate() const {
  if (support.empty() || support.size() != probs.size()) {
    throw InvalidInput("mixed strategy: support and probs must be non-empty and equal length");
  }
  const std::size_t len = support.front().size();
  double total = 0.0;
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (support[k].size() != len) throw InvalidInput("mixed strategy: permutations differ in size");
    if (!(probs[k] >= 0.0)) throw InvalidInput("mixed strategy: negative probability");
    total += probs[k];
    for (std::size_t l = 0; l < k; ++l) {
      if (support[l] == support[k]) throw InvalidInput("mixed strategy: duplicate support entry");
    }
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("mixed strategy: probs do not sum to 1");
}

void GameConfig::validate() const {
  if (!(eps_lp > 0.0) || !(eps_do > eps_lp)) {
    throw InvalidInput("game config: require eps_do > eps_lp > 0");
  }
  if (max_iters && *max_iters < 1) throw InvalidInput("game config: max_iters must be >= 1");
}

double game_payoff(const Permutation& pred, const Permutation& adv, const WeightMatrix& psi) {
  return static_cast<double>(hamming_distance(pred, adv)) + matching_weight(psi, adv);
}

Eigen::MatrixXd unary_marginals(const MixedStrategy& s) {
  s.validate();
  const auto n = static_cast<Eigen::Index>(s.n());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < s.support.size(); ++k) {
    const Permutation& p = s.support[k];
    for (Eigen::Index i = 0; i < n; ++i) m(i, p[static_cast<std::size_t>(i)]) += s.probs[k];
  }
  return m;
}

Eigen::MatrixXd pairwise_marginals(const MixedStrategy& s, std::size_t i, std::size_t j) {
  s.validate();
  const std::size_t n = s.n();
  if (i == j) throw InvalidInput("pairwise_marginals: i must differ from j");
  if (i >= n || j >= n) throw InvalidInput("pairwise_marginals: node index out of range");
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(nn, nn);
  for (std::size_t k = 0; k < s.support.size(); ++k) {
    q(s.support[k][i], s.support[k][j]) += s.probs[k];
  }
  return q;
}

Permutation adversary_best_response(const Eigen::MatrixXd& pred_marginals, const WeightMatrix& psi) {
  check_doubly_stochastic(pred_marginals, "adversary_best_response");
  if (psi.rows() != pred_marginals.rows() || psi.cols() != pred_marginals.cols()) {
    throw InvalidInput("adversary_best_response: dimension mismatch");
  }
  const WeightMatrix w = (1.0 - pred_marginals.array()).matrix() + psi;
  return max_weight_matching(w);
}

Permutation predictor_best_response(const Eigen::MatrixXd& adv_marginals) {
  check_doubly_stochastic(adv_marginals, "predictor_best_response");
  return max_weight_matching(adv_marginals);
}

Equilibrium double_oracle_equilibrium(const WeightMatrix& psi, const GameConfig& cfg) {
  validate_weights(psi);
  cfg.validate();
  const std::size_t n = static_cast<std::size_t>(psi.rows());

  Equilibrium eq;
  if (n == 1) {
    const Permutation only = Permutation::identity(1);
    eq.predictor = {{only}, {1.0}};
    eq.adversary = {{only}, {1.0}};
    eq.value = psi(0, 0);
    eq.predictor_marginals = Eigen::MatrixXd::Ones(1, 1);
    eq.adversary_marginals = Eigen::MatrixXd::Ones(1, 1);
    eq.iterations = 1;
    eq.support_size = 1;
    eq.strategy_sets = {{only}, {only}};
    return eq;
  }

  std::vector<Permutation> rows, cols;
  if (cfg.warm_start && !cfg.warm_start->predictor.empty() && !cfg.warm_start->adversary.empty()) {
    rows = dedupe(cfg.warm_start->predictor, n);
    cols = dedupe(cfg.warm_start->adversary, n);
  } else {
    const Permutation seed = max_weight_matching(psi);
    rows = {seed};
    cols = {seed};
  }

  Eigen::MatrixXd payoff(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      payoff(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          game_payoff(rows[r], cols[c], psi);
    }
  }

  const std::size_t max_iters = cfg.max_iters.value_or(10 * n * n);
  double last_gap = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= max_iters; ++it) {
    const MatrixGameSolution sol = solve_matrix_game(payoff, cfg.eps_lp);
    MixedStrategy pred = prune(rows, sol.row_strategy);
    MixedStrategy adv = prune(cols, sol.col_strategy);
    const Eigen::MatrixXd pm = unary_marginals(pred);
    const Eigen::MatrixXd am = unary_marginals(adv);

    const Permutation adv_br = adversary_best_response(pm, psi);
    double adv_br_value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      adv_br_value += 1.0 - pm(ii, adv_br[i]) + psi(ii, adv_br[i]);
    }
    const Permutation pred_br = predictor_best_response(am);
    double pred_br_value = (am.array() * psi.array()).sum();
    for (std::size_t i = 0; i < n; ++i) {
      pred_br_value += 1.0 - am(static_cast<Eigen::Index>(i), pred_br[i]);
    }
    const double gap_adv = adv_br_value - sol.value;
    const double gap_pred = sol.value - pred_br_value;
    last_gap = std::max({gap_adv, gap_pred, 0.0});

    bool grew = false;
    if (gap_adv > cfg.eps_do && !contains(cols, adv_br)) {
      cols.push_back(adv_br);
      const auto c = static_cast<Eigen::Index>(cols.size() - 1);
      payoff.conservativeResize(Eigen::NoChange, c + 1);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        payoff(static_cast<Eigen::Index>(r), c) = game_payoff(rows[r], adv_br, psi);
      }
      grew = true;
    }
    if (gap_pred > cfg.eps_do && !contains(rows, pred_br)) {
      rows.push_back(pred_br);
      const auto r = static_cast<Eigen::Index>(rows.size() - 1);
      payoff.conservativeResize(r + 1, Eigen::NoChange);
      for (std::size_t c = 0; c < cols.size(); ++c) {
        payoff(r, static_cast<Eigen::Index>(c)) = game_payoff(pred_br, cols[c], psi);
      }
      grew = true;
    }
    if (!grew) {
      if (last_gap > cfg.eps_do) {
        throw NumericFailure("double oracle: best response already in support but gap remains",
                             last_gap);
      }
      eq.value = sol.value;
      eq.predictor_marginals = pm;
      eq.adversary_marginals = am;
      eq.support_size = adv.support.size();
      eq.predictor = std::move(pred);
      eq.adversary = std::move(adv);
      eq.iterations = it;
      eq.gap = last_gap;
      eq.strategy_sets = {std::move(rows), std::move(cols)};
      return eq;
    }
  }
  throw NonConvergence("double oracle: max_iters exhausted", last_gap);
}

}  // namespace abmal
