#pragma once

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <vector>

#include "aqua/model.hpp"
#include "aqua/scenarios.hpp"
#include "aqua/symlin.hpp"

namespace aqua::testing {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) m(i, j) = g(rng);
  }
  return m;
}

inline SymMatrix random_symmetric(std::mt19937_64& rng, int m) {
  return SymMatrix::symmetrized(random_matrix(rng, m, m));
}

/// SPD with eigenvalues bounded away from zero: R R^T + eps I.
inline SymMatrix random_spd(std::mt19937_64& rng, int m, double ridge = 0.5) {
  Eigen::MatrixXd r = random_matrix(rng, m, m);
  return SymMatrix(r * r.transpose() + ridge * Eigen::MatrixXd::Identity(m, m));
}

/// A random design problem with rank-one elementary matrices.
inline DesignProblem random_problem(std::mt19937_64& rng, int n, int m) {
  return from_regressors(random_matrix(rng, n, m));
}

/// Enumerates all xi in N_0^n with 1'xi = total.
inline void enumerate_simplex(int n, int total,
                              const std::function<void(const Eigen::VectorXd&)>& visit) {
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(n);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == n - 1) {
      xi(pos) = left;
      visit(xi);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      xi(pos) = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, total);
}

/// Enumerates all integer xi with lower <= xi <= upper (finite bounds).
inline void enumerate_box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                          const std::function<void(const Eigen::VectorXd&)>& visit) {
  const int n = static_cast<int>(lower.size());
  Eigen::VectorXd xi = lower;
  std::function<void(int)> rec = [&](int pos) {
    if (pos == n) {
      visit(xi);
      return;
    }
    for (int v = static_cast<int>(lower(pos)); v <= static_cast<int>(upper(pos)); ++v) {
      xi(pos) = v;
      rec(pos + 1);
    }
  };
  rec(0);
}

/// Bit-index of a binary spring-balance row (x_1 ... x_m) in the 2^m grid.
inline int spring_index(const std::vector<int>& row) {
  int idx = 0;
  for (size_t j = 0; j < row.size(); ++j) {
    if (row[j]) idx |= 1 << j;
  }
  return idx;
}

/// The balanced 7-point D-optimal approximate design of the 6-item
/// spring-balance model, as row bit patterns.
inline const std::vector<std::vector<int>>& spring_d_rows() {
  static const std::vector<std::vector<int>> rows = {
      {1, 1, 0, 1, 0, 0}, {0, 0, 1, 1, 1, 0}, {0, 1, 1, 0, 0, 1}, {1, 0, 0, 0, 1, 1},
      {1, 1, 1, 0, 1, 0}, {1, 0, 1, 1, 0, 1}, {0, 1, 0, 1, 1, 1}};
  return rows;
}

/// The balanced 10-point A-optimal approximate design, likewise.
inline const std::vector<std::vector<int>>& spring_a_rows() {
  static const std::vector<std::vector<int>> rows = {
      {1, 1, 0, 1, 0, 0}, {1, 0, 1, 1, 0, 0}, {1, 0, 1, 0, 1, 0}, {0, 1, 1, 0, 1, 0},
      {0, 1, 0, 1, 1, 0}, {1, 1, 0, 0, 0, 1}, {0, 1, 1, 0, 0, 1}, {0, 0, 1, 1, 0, 1},
      {1, 0, 0, 0, 1, 1}, {0, 0, 0, 1, 1, 1}};
  return rows;
}

inline Design design_from_rows(int n, const std::vector<std::vector<int>>& rows,
                               double weight_each, bool integral) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (const auto& row : rows) w(spring_index(row)) += weight_each;
  return Design{w, integral};
}

/// (a I_m + b J_m) in closed form.
inline SymMatrix aI_bJ(int m, double a, double b) {
  Eigen::MatrixXd mm = Eigen::MatrixXd::Constant(m, m, b);
  mm.diagonal().array() += a;
  return SymMatrix(std::move(mm));
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace aqua::testing
