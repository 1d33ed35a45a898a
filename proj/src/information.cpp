#include "abmal/information.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "abmal/errors.hpp"

namespace abmal {
namespace {

double clamp_small_negative(double v) { return (v < 0.0 && v > -1e-12) ? 0.0 : v; }

double entropy_unchecked(const double* p, std::size_t len) {
  double h = 0.0;
  for (std::size_t k = 0; k < len; ++k)
    if (p[k] > 0.0) h -= p[k] * std::log2(p[k]);
  return h;
}

}  // namespace

double node_entropy(std::span<const double> p) {
  double total = 0.0;
  for (double x : p) {
    if (!(x >= 0.0)) throw InvalidInput("node_entropy: negative or non-finite probability");
    total += x;
  }
  if (p.empty() || std::abs(total - 1.0) > 1e-9) {
    throw InvalidInput("node_entropy: probabilities sum to " + std::to_string(total));
  }
  return entropy_unchecked(p.data(), p.size());
}

double node_entropy(const Eigen::VectorXd& p) {
  return node_entropy(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
}

double mutual_information(const Eigen::MatrixXd& q, const Eigen::VectorXd& p_i,
                          const Eigen::VectorXd& p_j) {
  if (q.rows() != p_i.size() || q.cols() != p_j.size()) {
    throw InvalidInput("mutual_information: shape mismatch");
  }
  constexpr double tol = 1e-6;
  if ((q.rowwise().sum() - p_i).cwiseAbs().maxCoeff() > tol ||
      (q.colwise().sum().transpose() - p_j).cwiseAbs().maxCoeff() > tol) {
    throw InvalidInput("mutual_information: joint margins disagree with unary distributions");
  }
  double mi = 0.0;
  for (Eigen::Index a = 0; a < q.rows(); ++a) {
    for (Eigen::Index b = 0; b < q.cols(); ++b) {
      const double v = q(a, b);
      if (v > 0.0) mi += v * std::log2(v / (p_i(a) * p_j(b)));
    }
  }
  return clamp_small_negative(mi);
}

Eigen::VectorXd value_scores(const MixedStrategy& s, bool include_self) {
  s.validate();
  const std::size_t n = s.n();
  const std::size_t support = s.support.size();
  const Eigen::MatrixXd m = unary_marginals(s);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  if (include_self) {
    for (std::size_t j = 0; j < n; ++j) {
      const Eigen::VectorXd row = m.row(static_cast<Eigen::Index>(j)).transpose();
      v(static_cast<Eigen::Index>(j)) = entropy_unchecked(row.data(), n);
    }
  }
  if (support == 1) return v;

  std::vector<std::tuple<int, int, double>> cells(support);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = 0; k < support; ++k) cells[k] = {s.support[k][i], s.support[k][j], s.probs[k]};
      std::sort(cells.begin(), cells.end());
      double mi = 0.0;
      for (std::size_t k = 0; k < support;) {
        const auto [a, b, p0] = cells[k];
        double joint = p0;
        std::size_t l = k + 1;
        while (l < support && std::get<0>(cells[l]) == a && std::get<1>(cells[l]) == b) {
          joint += std::get<2>(cells[l]);
          ++l;
        }
        mi += joint * std::log2(joint / (m(static_cast<Eigen::Index>(i), a) * m(static_cast<Eigen::Index>(j), b)));
        k = l;
      }
      mi = std::max(mi, 0.0);
      v(static_cast<Eigen::Index>(i)) += mi;
      v(static_cast<Eigen::Index>(j)) += mi;
    }
  }
  return v;
}

double value_of_information(const Equilibrium& eq, std::size_t j, bool include_self) {
  if (j >= eq.adversary.n()) throw InvalidInput("value_of_information: node index out of range");
  return value_scores(eq.adversary, include_self)(static_cast<Eigen::Index>(j));
}

double sample_value(const Equilibrium& eq, bool include_self) {
  return value_scores(eq.adversary, include_self).sum();
}

}  // namespace abmal
