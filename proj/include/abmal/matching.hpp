#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <compare>
#include <cstddef>
#include <span>
#include <vector>

namespace abmal {

/// Edge weights of a square bipartite graph, w(i, j) for left node i and right node j.
using WeightMatrix = Eigen::MatrixXd;

/// A perfect matching stored as the assignment sequence: entry i is the right
/// partner of left node i. Construction validates bijectivity.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<int> assignment);

  static Permutation identity(std::size_t n);

  std::size_t size() const noexcept { return assignment_.size(); }
  int operator[](std::size_t i) const { return assignment_[i]; }
  const std::vector<int>& assignment() const noexcept { return assignment_; }
  std::span<const int> view() const noexcept { return assignment_; }

  /// Inverse mapping: result[j] is the left node matched to right node j.
  Permutation inverse() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation& a, const Permutation& b) {
    return a.assignment_ <=> b.assignment_;
  }

 private:
  std::vector<int> assignment_;
};

/// True iff `assignment` is a bijection on {0..n-1} with n >= 1.
bool is_permutation(std::span<const int> assignment);

/// Throws InvalidInput unless w is square, non-empty and finite.
void validate_weights(const WeightMatrix& w);

/// Sum over i of w(i, pi_i), accumulated in row order.
double matching_weight(const WeightMatrix& w, const Permutation& pi);

/// Hungarian (Kuhn-Munkres) maximum-weight perfect matching, O(n^3).
/// Among optimal matchings the lexicographically smallest assignment is returned:
/// after the Hungarian pass the equality subgraph of the optimal duals is searched
/// greedily row by row, rerouting along alternating cycles.
Permutation max_weight_matching(const WeightMatrix& w);

/// Exhaustive argmax over all n! permutations, n <= 9. Same tie-break as
/// max_weight_matching: the first permutation in lexicographic order whose weight
/// is within the tie tolerance of the maximum.
Permutation brute_force_matching(const WeightMatrix& w);

inline constexpr std::size_t kBruteForceLimit = 9;

/// Absolute tolerance used by both matchers to treat two totals as tied.
double tie_tolerance(const WeightMatrix& w);

/// Number of positions where a and b disagree.
std::size_t hamming_distance(const Permutation& a, const Permutation& b);

/// Calls fn(perm) for every permutation of length n in lexicographic order.
template <typename Fn>
void for_each_permutation(std::size_t n, Fn&& fn) {
  std::vector<int> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = static_cast<int>(i);
  do {
    fn(std::span<const int>(a));
  } while (std::next_permutation(a.begin(), a.end()));
}

}  // namespace abmal
