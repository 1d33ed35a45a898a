#pragma once
// Independent reference computations used only by tests.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "abmal/game.hpp"
#include "abmal/data.hpp"
#include "abmal/matching.hpp"

namespace abmal::oracle {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                                     double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

inline Permutation random_permutation(std::mt19937_64& rng, std::size_t n) {
  std::vector<int> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = static_cast<int>(i);
  std::shuffle(a.begin(), a.end(), rng);
  return Permutation(a);
}

/// Mixture over `k` distinct random permutations with random weights.
inline MixedStrategy random_mixture(std::mt19937_64& rng, std::size_t n, std::size_t k) {
  MixedStrategy s;
  std::uniform_real_distribution<double> u(0.1, 1.0);
  double total = 0.0;
  while (s.support.size() < k) {
    Permutation p = random_permutation(rng, n);
    if (std::find(s.support.begin(), s.support.end(), p) != s.support.end()) continue;
    s.support.push_back(p);
    s.probs.push_back(u(rng));
    total += s.probs.back();
  }
  for (double& p : s.probs) p /= total;
  return s;
}

inline std::vector<Permutation> all_permutations(std::size_t n) {
  std::vector<Permutation> out;
  for_each_permutation(n, [&](std::span<const int> a) {
    out.emplace_back(std::vector<int>(a.begin(), a.end()));
  });
  return out;
}

/// Full n! x n! payoff matrix of the matching game (rows: predictor, cols: adversary).
inline Eigen::MatrixXd full_game_matrix(const WeightMatrix& psi) {
  const auto perms = all_permutations(static_cast<std::size_t>(psi.rows()));
  const auto m = static_cast<Eigen::Index>(perms.size());
  Eigen::MatrixXd g(m, m);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) {
      double h = 0.0, pot = 0.0;
      for (std::size_t i = 0; i < perms[r].size(); ++i) {
        h += perms[r][i] != perms[c][i] ? 1.0 : 0.0;
        pot += psi(static_cast<Eigen::Index>(i), perms[c][i]);
      }
      g(r, c) = h + pot;
    }
  }
  return g;
}

/// Value of a zero-sum game (row minimizes) by enumerating equal-size support
/// pairs and solving the indifference equations. Valid for nondegenerate games.
inline std::optional<double> support_enumeration_value(const Eigen::MatrixXd& a, double tol = 1e-9) {
  const int m = static_cast<int>(a.rows());
  const int k = static_cast<int>(a.cols());
  const int smax = std::min(m, k);
  for (int s = 1; s <= smax; ++s) {
    std::vector<int> rmask(m, 0), cmask(k, 0);
    std::fill(rmask.end() - s, rmask.end(), 1);
    do {
      std::vector<int> rows;
      for (int i = 0; i < m; ++i)
        if (rmask[i]) rows.push_back(i);
      std::fill(cmask.begin(), cmask.end(), 0);
      std::fill(cmask.end() - s, cmask.end(), 1);
      do {
        std::vector<int> cols;
        for (int j = 0; j < k; ++j)
          if (cmask[j]) cols.push_back(j);
        // Unknowns: q (s entries) and v. Equations: A_IJ q - v = 0, sum q = 1.
        Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(s + 1, s + 1);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s + 1);
        Eigen::MatrixXd lhs_p = Eigen::MatrixXd::Zero(s + 1, s + 1);
        for (int r = 0; r < s; ++r) {
          for (int c = 0; c < s; ++c) {
            lhs(r, c) = a(rows[r], cols[c]);
            lhs_p(c, r) = a(rows[r], cols[c]);
          }
          lhs(r, s) = -1.0;
          lhs_p(r, s) = -1.0;
          lhs(s, r) = 1.0;
          lhs_p(s, r) = 1.0;
        }
        rhs(s) = 1.0;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(lhs), lu_p(lhs_p);
        if (!lu.isInvertible() || !lu_p.isInvertible()) continue;
        const Eigen::VectorXd xq = lu.solve(rhs);
        const Eigen::VectorXd xp = lu_p.solve(rhs);
        const double v = xq(s);
        if (std::abs(v - xp(s)) > 1e-7) continue;
        if ((xq.head(s).array() < -tol).any() || (xp.head(s).array() < -tol).any()) continue;
        Eigen::VectorXd q = Eigen::VectorXd::Zero(k), p = Eigen::VectorXd::Zero(m);
        for (int c = 0; c < s; ++c) q(cols[c]) = xq(c);
        for (int r = 0; r < s; ++r) p(rows[r]) = xp(r);
        if ((a * q).minCoeff() < v - 1e-7) continue;
        if ((p.transpose() * a).maxCoeff() > v + 1e-7) continue;
        return v;
      } while (std::next_permutation(cmask.begin(), cmask.end()));
    } while (std::next_permutation(rmask.begin(), rmask.end()));
  }
  return std::nullopt;
}

inline double entropy_bits(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log2(x);
  return h;
}

/// Entropy of node i's assignment under a support-weighted mixture restricted to `mask`.
inline std::vector<double> node_distribution(const MixedStrategy& s, std::size_t i,
                                             const std::vector<bool>& mask) {
  std::vector<double> d(s.n(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < s.support.size(); ++k) {
    if (!mask[k]) continue;
    d[s.support[k][i]] += s.probs[k];
    total += s.probs[k];
  }
  for (double& x : d) x /= total;
  return d;
}

/// Sum_i H(Y_i) - sum_a P(Y_j = a) sum_i H(Y_i | Y_j = a), by conditioning the
/// explicit support joint.
inline double expected_entropy_reduction(const MixedStrategy& s, std::size_t j) {
  const std::size_t n = s.n();
  const std::vector<bool> all(s.support.size(), true);
  double before = 0.0;
  for (std::size_t i = 0; i < n; ++i) before += entropy_bits(node_distribution(s, i, all));
  double after = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    std::vector<bool> mask(s.support.size(), false);
    double pa = 0.0;
    for (std::size_t k = 0; k < s.support.size(); ++k) {
      if (static_cast<std::size_t>(s.support[k][j]) == a) {
        mask[k] = true;
        pa += s.probs[k];
      }
    }
    if (pa <= 0.0) continue;
    double cond = 0.0;
    for (std::size_t i = 0; i < n; ++i) cond += entropy_bits(node_distribution(s, i, mask));
    after += pa * cond;
  }
  return before - after;
}


inline MatchingInstance random_instance(std::mt19937_64& rng, std::size_t n, std::size_t d,
                                        const std::string& id = "x") {
  std::normal_distribution<double> g(0.0, 1.0);
  MatchingInstance x;
  x.id = id;
  x.n = n;
  x.d = d;
  x.features.resize(static_cast<Eigen::Index>(n * n), static_cast<Eigen::Index>(d));
  for (Eigen::Index r = 0; r < x.features.rows(); ++r)
    for (Eigen::Index k = 0; k < x.features.cols(); ++k) x.features(r, k) = g(rng);
  x.truth = random_permutation(rng, n);
  return x;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, std::size_t d, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  Eigen::VectorXd v(static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = g(rng);
  return v;
}

/// psi(i, j) by explicit loops over the feature tensor.
inline Eigen::MatrixXd recount_potentials(const Eigen::VectorXd& theta, const MatchingInstance& x) {
  Eigen::MatrixXd psi(static_cast<Eigen::Index>(x.n), static_cast<Eigen::Index>(x.n));
  for (std::size_t i = 0; i < x.n; ++i)
    for (std::size_t j = 0; j < x.n; ++j) {
      double v = 0.0;
      for (std::size_t k = 0; k < x.d; ++k) v += theta(static_cast<Eigen::Index>(k)) * x.feature(i, j, k);
      psi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  return psi;
}

inline Eigen::VectorXd recount_feature_sum(const MatchingInstance& x, const Permutation& pi) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(x.d));
  for (std::size_t i = 0; i < x.n; ++i)
    for (std::size_t k = 0; k < x.d; ++k) f(static_cast<Eigen::Index>(k)) += x.feature(i, static_cast<std::size_t>(pi[i]), k);
  return f;
}

struct Slopes {
  double central = 0.0;
  double forward = 0.0;
  double backward = 0.0;
};

/// One-sided and central difference quotients of f along u at step h.
template <typename F>
Slopes directional_slopes(F&& f, const Eigen::VectorXd& theta, const Eigen::VectorXd& u, double h) {
  const double f0 = f(theta);
  const double fp = f(theta + h * u);
  const double fm = f(theta - h * u);
  return {(fp - fm) / (2.0 * h), (fp - f0) / h, (f0 - fm) / h};
}

}  // namespace abmal::oracle
