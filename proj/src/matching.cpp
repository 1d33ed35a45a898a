#include "abmal/matching.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "abmal/errors.hpp"

namespace abmal {

bool is_permutation(std::span<const int> assignment) {
  const std::size_t n = assignment.size();
  if (n == 0) return false;
  std::vector<bool> seen(n, false);
  for (int v : assignment) {
    if (v < 0 || static_cast<std::size_t>(v) >= n || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

Permutation::Permutation(std::vector<int> assignment) : assignment_(std::move(assignment)) {
  if (!is_permutation(assignment_)) {
    throw InvalidInput("assignment is not a bijection on {0..n-1}");
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<int> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = static_cast<int>(i);
  return Permutation(std::move(a));
}

Permutation Permutation::inverse() const {
  std::vector<int> inv(size());
  for (std::size_t i = 0; i < size(); ++i) inv[assignment_[i]] = static_cast<int>(i);
  return Permutation(std::move(inv));
}

void validate_weights(const WeightMatrix& w) {
  if (w.rows() == 0 || w.rows() != w.cols()) {
    throw InvalidInput("weight matrix must be square and non-empty, got " +
                       std::to_string(w.rows()) + "x" + std::to_string(w.cols()));
  }
  if (!w.allFinite()) throw InvalidInput("weight matrix has non-finite entries");
}

double matching_weight(const WeightMatrix& w, const Permutation& pi) {
  double total = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) total += w(static_cast<Eigen::Index>(i), pi[i]);
  return total;
}

double tie_tolerance(const WeightMatrix& w) {
  return 1e-9 * std::max(1.0, w.cwiseAbs().maxCoeff()) * static_cast<double>(w.rows());
}

namespace {

// Minimum-cost assignment with dual potentials. Indices are 1-based inside;
// row_duals/col_duals satisfy cost(i,j) - u_i - v_j >= 0 with equality on the matching.
struct HungarianState {
  std::vector<double> u, v;
  std::vector<int> col_of_row;  // 0-based result
};

HungarianState solve_min_cost(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  HungarianState st;
  st.col_of_row.assign(n, -1);
  for (int j = 1; j <= n; ++j) st.col_of_row[p[j] - 1] = j - 1;
  st.u.assign(u.begin() + 1, u.end());
  st.v.assign(v.begin() + 1, v.end());
  return st;
}

}  // namespace

Permutation max_weight_matching(const WeightMatrix& w) {
  validate_weights(w);
  const int n = static_cast<int>(w.rows());
  if (n == 1) return Permutation::identity(1);

  const Eigen::MatrixXd cost = -w;
  HungarianState st = solve_min_cost(cost);
  const double edge_tol = tie_tolerance(w) / n;
  auto tight = [&](int i, int j) { return cost(i, j) - st.u[i] - st.v[j] <= edge_tol; };

  std::vector<int>& match = st.col_of_row;
  std::vector<int> owner(n);
  for (int i = 0; i < n; ++i) owner[match[i]] = i;
  std::vector<char> fixed_col(n, 0);
  std::vector<int> parent(n);

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < match[i]; ++j) {
      if (fixed_col[j] || !tight(i, j)) continue;
      // Look for an alternating cycle i -> j -> owner(j) -> ... -> match[i] -> i
      // through tight edges among unfixed rows and columns.
      const int start = owner[j];
      const int target = match[i];
      std::fill(parent.begin(), parent.end(), -1);
      std::queue<int> rows;
      rows.push(start);
      bool found = false;
      while (!rows.empty() && !found) {
        const int r = rows.front();
        rows.pop();
        for (int c = 0; c < n; ++c) {
          if (c == j || fixed_col[c] || parent[c] != -1 || !tight(r, c)) continue;
          parent[c] = r;
          if (c == target) {
            found = true;
            break;
          }
          rows.push(owner[c]);
        }
      }
      if (!found) continue;
      int c = target;
      while (true) {
        const int r = parent[c];
        const int prev = match[r];
        match[r] = c;
        owner[c] = r;
        if (r == start) break;
        c = prev;
      }
      match[i] = j;
      owner[j] = i;
      break;
    }
    fixed_col[match[i]] = 1;
  }
  return Permutation(std::move(match));
}

Permutation brute_force_matching(const WeightMatrix& w) {
  validate_weights(w);
  const std::size_t n = static_cast<std::size_t>(w.rows());
  if (n > kBruteForceLimit) {
    throw SizeLimit("brute_force_matching supports n <= 9, got " + std::to_string(n));
  }
  auto weight_of = [&](std::span<const int> a) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += w(static_cast<Eigen::Index>(i), a[i]);
    return total;
  };
  double best = -std::numeric_limits<double>::infinity();
  for_each_permutation(n, [&](std::span<const int> a) { best = std::max(best, weight_of(a)); });
  const double tol = tie_tolerance(w);
  std::vector<int> chosen;
  for_each_permutation(n, [&](std::span<const int> a) {
    if (chosen.empty() && weight_of(a) >= best - tol) chosen.assign(a.begin(), a.end());
  });
  return Permutation(std::move(chosen));
}

std::size_t hamming_distance(const Permutation& a, const Permutation& b) {
  if (a.size() != b.size()) {
    throw InvalidInput("hamming_distance: length mismatch " + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()));
  }
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != b[i]) ? 1 : 0;
  return d;
}

}  // namespace abmal
