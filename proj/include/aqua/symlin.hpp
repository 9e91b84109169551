#pragma once

#include <Eigen/Dense>
#include <vector>

#include "aqua/errors.hpp"

namespace aqua {

/// Dense symmetric matrix of small order (m <= ~20).  The storage is a full
/// m x m matrix whose lower triangle is mirrored into the upper one at
/// construction, so entries(i,j) == entries(j,i) holds exactly.
class SymMatrix {
 public:
  SymMatrix() = default;

  /// Builds from a square matrix; the lower triangle wins.
  explicit SymMatrix(Eigen::MatrixXd m);

  /// Builds from a possibly unsymmetric matrix as (a + a^T) / 2.
  static SymMatrix symmetrized(const Eigen::MatrixXd& a);

  static SymMatrix identity(int m);
  static SymMatrix zero(int m);

  int order() const { return static_cast<int>(mat_.rows()); }
  double operator()(int i, int j) const { return mat_(i, j); }
  const Eigen::MatrixXd& mat() const { return mat_; }

  double trace() const { return mat_.trace(); }

  SymMatrix operator+(const SymMatrix& o) const;
  SymMatrix operator-(const SymMatrix& o) const;
  SymMatrix scaled(double c) const;

 private:
  Eigen::MatrixXd mat_;
};

inline SymMatrix operator*(double c, const SymMatrix& m) { return m.scaled(c); }

/// Rank-revealing PSD factorization Q ~= C * C^T.
struct PsdFactor {
  int order = 0;              // s
  int rank = 0;               // t, number of retained pivots
  Eigen::MatrixXd factor;     // s x t
  double residual = 0.0;      // max |Q - C C^T|
};

constexpr double kSingularTolDefault = 1e-12;  // relative eigenvalue threshold
constexpr double kFactorTolDefault = 1e-10;    // relative eigenvalue clipping

/// Half-vectorization: column-stacked lower triangle including the diagonal,
/// ordered (1,1),(2,1),...,(m,1),(2,2),...,(m,m).
Eigen::VectorXd vech(const SymMatrix& m);

/// Column-stacking vectorization of a square matrix.
Eigen::VectorXd vec(const Eigen::MatrixXd& m);

/// Inverse of vech: rebuilds the order-m symmetric matrix.
SymMatrix unvech(const Eigen::VectorXd& v, int m);

/// Flat index of entry (i, j), i >= j, in the vech ordering above.
int vech_index(int m, int i, int j);

/// Length of vech for order m: m (m + 1) / 2.
inline int vech_size(int m) { return m * (m + 1) / 2; }

/// The 0/1 duplication matrix G_m (m^2 x s) with vec(M) = G_m vech(M) for
/// every symmetric M of order m.
Eigen::MatrixXd duplication_matrix(int m);

/// Weights d with tr(A B) = sum_k d_k vech(A)_k vech(B)_k for symmetric A, B:
/// 1 on diagonal positions, 2 elsewhere.  Equals G_m^T G_m's diagonal.
Eigen::VectorXd vech_trace_weights(int m);

/// [M^-1, M^-2, ..., M^-k] from one symmetric eigendecomposition.
/// Throws SingularMatrix when lambda_min <= singular_tol * lambda_max.
std::vector<SymMatrix> neg_powers(const SymMatrix& m, int k,
                                  double singular_tol = kSingularTolDefault);

/// G_m^T (A (x) B) G_m, an s x s symmetric matrix R with
/// vech(M)^T R vech(M) = tr(B M A M) for all symmetric M.
Eigen::MatrixXd kron_sandwich(const SymMatrix& a, const SymMatrix& b);

/// Eigendecomposition-based PSD factorization with relative eigenvalue
/// clipping; eigenvalues below tol * lambda_max are truncated to zero.
/// Throws NotPsd when an eigenvalue lies below -tol * lambda_max.
PsdFactor psd_factor(const SymMatrix& q, double tol = kFactorTolDefault);

}  // namespace aqua
