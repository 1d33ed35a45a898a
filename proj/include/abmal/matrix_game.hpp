#pragma once

#include <Eigen/Dense>

namespace abmal {

/// Minimax solution of a finite two-player zero-sum game. The row player
/// minimizes the payoff, the column player maximizes it.
struct MatrixGameSolution {
  Eigen::VectorXd row_strategy;
  Eigen::VectorXd col_strategy;
  double value = 0.0;
  /// max_c (p^T A)_c - min_r (A q)_r; zero at an exact equilibrium.
  double residual = 0.0;
};

/// Solves the game by the simplex method on the row player's LP
/// (max 1^T x s.t. (A + s)^T x <= 1, x >= 0 with a positive shift s); the column
/// strategy is read off the optimal duals. Falls back to extended precision if
/// the double-precision result misses the eps_lp certificate, and throws
/// NumericFailure if that also fails.
MatrixGameSolution solve_matrix_game(const Eigen::MatrixXd& payoffs, double eps_lp = 1e-9);

}  // namespace abmal
