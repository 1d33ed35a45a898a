#include "abmal/matrix_game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "abmal/errors.hpp"

namespace abmal {
namespace {

template <typename T>
struct LpResult {
  std::vector<T> primal;  // one entry per column of the constraint matrix
  std::vector<T> dual;    // one entry per row
  T objective{};
  bool ok = false;
};

// max 1^T y  s.t.  B y <= 1, y >= 0, with B > 0 entrywise. Bland's rule.
template <typename T>
LpResult<T> simplex_unit_lp(const Eigen::MatrixXd& shifted) {
  const int m = static_cast<int>(shifted.rows());
  const int k = static_cast<int>(shifted.cols());
  const int cols = k + m + 1;  // y | slack | rhs
  const int rhs = k + m;
  std::vector<T> tab(static_cast<std::size_t>(m) * cols, T(0));
  auto at = [&](int r, int c) -> T& { return tab[static_cast<std::size_t>(r) * cols + c]; };
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < k; ++c) at(r, c) = static_cast<T>(shifted(r, c));
    at(r, k + r) = T(1);
    at(r, rhs) = T(1);
  }
  std::vector<T> obj(cols, T(0));  // reduced costs; obj[rhs] = -objective
  for (int c = 0; c < k; ++c) obj[c] = T(1);
  std::vector<int> basis(m);
  for (int r = 0; r < m; ++r) basis[r] = k + r;

  const T tol = static_cast<T>(1e-12);
  const T pivot_tol = static_cast<T>(1e-9);
  const int max_pivots = 50 * (m + k) + 1000;
  LpResult<T> out;
  for (int pivots = 0;; ++pivots) {
    if (pivots > max_pivots) return out;
    int enter = -1;
    for (int c = 0; c < k + m; ++c) {
      if (obj[c] > tol) {
        enter = c;
        break;
      }
    }
    if (enter < 0) break;
    int leave = -1;
    T best_ratio = std::numeric_limits<T>::infinity();
    for (int r = 0; r < m; ++r) {
      const T a = at(r, enter);
      if (a <= pivot_tol) continue;
      const T ratio = at(r, rhs) / a;
      if (leave < 0 || ratio < best_ratio - tol) {
        leave = r;
        best_ratio = ratio;
      } else if (ratio <= best_ratio + tol && basis[r] < basis[leave]) {
        leave = r;
        best_ratio = std::min(best_ratio, ratio);
      }
    }
    if (leave < 0) return out;  // unbounded; impossible for B > 0
    const T piv = at(leave, enter);
    for (int c = 0; c < cols; ++c) at(leave, c) /= piv;
    for (int r = 0; r < m; ++r) {
      if (r == leave) continue;
      const T f = at(r, enter);
      if (f == T(0)) continue;
      for (int c = 0; c < cols; ++c) at(r, c) -= f * at(leave, c);
    }
    const T f = obj[enter];
    for (int c = 0; c < cols; ++c) obj[c] -= f * at(leave, c);
    basis[leave] = enter;
  }
  out.primal.assign(k, T(0));
  for (int r = 0; r < m; ++r) {
    if (basis[r] < k) out.primal[basis[r]] = at(r, rhs);
  }
  out.dual.assign(m, T(0));
  for (int r = 0; r < m; ++r) out.dual[r] = -obj[k + r];
  out.objective = -obj[rhs];
  out.ok = true;
  return out;
}

template <typename T>
Eigen::VectorXd to_distribution(const std::vector<T>& raw) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(raw.size()));
  T sum(0);
  for (const T& x : raw) sum += std::max(x, T(0));
  for (std::size_t i = 0; i < raw.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = static_cast<double>(std::max(raw[i], T(0)) / sum);
  }
  return v;
}

template <typename T>
bool try_solve(const Eigen::MatrixXd& payoffs, double shift, double eps_lp,
               MatrixGameSolution& sol) {
  const Eigen::MatrixXd shifted = payoffs.array() + shift;
  // The LP variables are the minimizing row player's x = p / v; its duals give q.
  LpResult<T> lp = simplex_unit_lp<T>(shifted.transpose());
  if (!lp.ok || !(lp.objective > T(0))) return false;
  sol.row_strategy = to_distribution(lp.primal);
  sol.col_strategy = to_distribution(lp.dual);
  sol.value = static_cast<double>(T(1) / lp.objective) - shift;
  const double lower = (payoffs * sol.col_strategy).minCoeff();
  const double upper = (sol.row_strategy.transpose() * payoffs).maxCoeff();
  sol.residual = upper - lower;
  const bool ok = lower >= sol.value - eps_lp && upper <= sol.value + eps_lp;
  if (ok) sol.value = std::clamp(sol.value, lower, upper);
  return ok;
}

}  // namespace

MatrixGameSolution solve_matrix_game(const Eigen::MatrixXd& payoffs, double eps_lp) {
  if (payoffs.rows() == 0 || payoffs.cols() == 0) {
    throw InvalidInput("solve_matrix_game: empty payoff matrix");
  }
  if (!payoffs.allFinite()) throw InvalidInput("solve_matrix_game: non-finite payoffs");
  if (!(eps_lp > 0.0)) throw InvalidInput("solve_matrix_game: eps_lp must be positive");

  MatrixGameSolution sol;
  if (payoffs.rows() == 1 && payoffs.cols() == 1) {
    sol.row_strategy = Eigen::VectorXd::Ones(1);
    sol.col_strategy = Eigen::VectorXd::Ones(1);
    sol.value = payoffs(0, 0);
    return sol;
  }
  const double shift = 1.0 - payoffs.minCoeff();
  if (try_solve<double>(payoffs, shift, eps_lp, sol)) return sol;
  if (try_solve<long double>(payoffs, shift, eps_lp, sol)) return sol;
  throw NumericFailure("solve_matrix_game: equilibrium certificate failed", sol.residual);
}

}  // namespace abmal
