#pragma once

#include <Eigen/Dense>
#include <span>

#include "abmal/game.hpp"

namespace abmal {

/// Shannon entropy in bits with 0 log 0 = 0. Throws InvalidInput unless p is a
/// distribution (nonnegative, sums to 1 within 1e-9).
double node_entropy(std::span<const double> p);
double node_entropy(const Eigen::VectorXd& p);

/// I(Y_i; Y_j) in bits from the joint q(a, b) and its margins; tiny negative
/// round-off is clamped to zero. Throws InvalidInput if the margins of q differ
/// from p_i / p_j by more than 1e-6.
double mutual_information(const Eigen::MatrixXd& q, const Eigen::VectorXd& p_i,
                          const Eigen::VectorXd& p_j);

/// V_j = sum_i I(Y_i; Y_j) under the adversary's equilibrium mixture. With
/// include_self the i = j term contributes H(Y_j).
double value_of_information(const Equilibrium& eq, std::size_t j, bool include_self = true);

/// V_j for every node, computed from the sparse support joint in
/// O(n^2 |support| log |support|).
Eigen::VectorXd value_scores(const MixedStrategy& adversary, bool include_self = true);
inline Eigen::VectorXd value_scores(const Equilibrium& eq, bool include_self = true) {
  return value_scores(eq.adversary, include_self);
}

/// Sum over nodes of V_j: the instance-level solicitation score.
double sample_value(const Equilibrium& eq, bool include_self = true);

}  // namespace abmal
