#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "aqua/symlin.hpp"

namespace aqua {

/// A design: non-negative weight per design point.  For exact designs the
/// weights are trial counts and `integral` is set.
struct Design {
  Eigen::VectorXd weights;
  bool integral = false;

  int size() const { return static_cast<int>(weights.size()); }
};

/// The regression model reduced to its elementary information matrices
/// H_1..H_n (PSD, m x m), plus optional point coordinates and labels used
/// only for reporting.
class DesignProblem {
 public:
  DesignProblem(std::vector<SymMatrix> elem,
                Eigen::MatrixXd points = Eigen::MatrixXd(),
                std::vector<std::string> labels = {});

  int n() const { return static_cast<int>(elem_.size()); }
  int m() const { return m_; }
  const SymMatrix& elem(int i) const { return elem_[i]; }
  const std::vector<SymMatrix>& elems() const { return elem_; }

  const Eigen::MatrixXd& points() const { return points_; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// Regressor rows when the problem was built from rank-one H_i = f f^T;
  /// empty otherwise.
  const Eigen::MatrixXd& regressors() const { return regressors_; }

  /// The n x s matrix whose i-th row is vech(H_i); built lazily and cached.
  const Eigen::MatrixXd& vech_rows() const;

 private:
  friend DesignProblem from_regressors(const Eigen::MatrixXd& f);
  friend DesignProblem from_regressors(const Eigen::MatrixXd& f, Eigen::MatrixXd points,
                                       std::vector<std::string> labels);

  std::vector<SymMatrix> elem_;
  int m_ = 0;
  Eigen::MatrixXd points_;
  std::vector<std::string> labels_;
  Eigen::MatrixXd regressors_;
  mutable Eigen::MatrixXd vech_rows_;
};

/// Builds the classical single-response problem with H_i = f_i f_i^T from the
/// n x m matrix of regressor rows.
DesignProblem from_regressors(const Eigen::MatrixXd& f);
DesignProblem from_regressors(const Eigen::MatrixXd& f, Eigen::MatrixXd points,
                              std::vector<std::string> labels);

/// Uniform-measure moment matrix over the problem's own points:
/// L = (1/n) sum_i H_i.  The standard I-optimality region.
SymMatrix default_i_region(const DesignProblem& p);

/// M(xi) = sum_i xi_i H_i.
SymMatrix info_matrix(const DesignProblem& p, const Design& d);

/// Weighted sum L = sum_j eta_j V_j of PSD matrices; the finite-measure
/// realization of a prediction-region moment matrix.
SymMatrix moment_matrix(const std::vector<SymMatrix>& v, const Eigen::VectorXd& eta);

/// Transforms the problem so that I-optimality with moment matrix L becomes
/// A-optimality: H_i -> L^{-1/2} H_i L^{-1/2} with the symmetric square root.
/// Throws SingularL when L is singular beyond tolerance.
DesignProblem i_to_a(const DesignProblem& p, const SymMatrix& l);

}  // namespace aqua
