#include "aqua/symlin.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace aqua {

SymMatrix::SymMatrix(Eigen::MatrixXd m) : mat_(std::move(m)) {
  if (mat_.rows() != mat_.cols()) {
    throw DimensionMismatch("SymMatrix requires a square matrix");
  }
  const int n = order();
  for (int j = 0; j < n; ++j) {
    for (int i = j + 1; i < n; ++i) {
      mat_(j, i) = mat_(i, j);
    }
  }
}

SymMatrix SymMatrix::symmetrized(const Eigen::MatrixXd& a) {
  return SymMatrix(0.5 * (a + a.transpose()));
}

SymMatrix SymMatrix::identity(int m) {
  return SymMatrix(Eigen::MatrixXd::Identity(m, m));
}

SymMatrix SymMatrix::zero(int m) {
  return SymMatrix(Eigen::MatrixXd::Zero(m, m));
}

SymMatrix SymMatrix::operator+(const SymMatrix& o) const {
  if (order() != o.order()) throw DimensionMismatch("SymMatrix sum: order mismatch");
  return SymMatrix(mat_ + o.mat_);
}

SymMatrix SymMatrix::operator-(const SymMatrix& o) const {
  if (order() != o.order()) throw DimensionMismatch("SymMatrix difference: order mismatch");
  return SymMatrix(mat_ - o.mat_);
}

SymMatrix SymMatrix::scaled(double c) const { return SymMatrix(c * mat_); }

int vech_index(int m, int i, int j) {
  if (i < j) std::swap(i, j);
  return j * m - j * (j - 1) / 2 + (i - j);
}

Eigen::VectorXd vech(const SymMatrix& m) {
  const int n = m.order();
  Eigen::VectorXd out(vech_size(n));
  int k = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) {
      out(k++) = m(i, j);
    }
  }
  return out;
}

Eigen::VectorXd vec(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

SymMatrix unvech(const Eigen::VectorXd& v, int m) {
  if (v.size() != vech_size(m)) throw DimensionMismatch("unvech: length != m(m+1)/2");
  Eigen::MatrixXd out(m, m);
  int k = 0;
  for (int j = 0; j < m; ++j) {
    for (int i = j; i < m; ++i) {
      out(i, j) = v(k++);
    }
  }
  return SymMatrix(std::move(out));
}

Eigen::MatrixXd duplication_matrix(int m) {
  const int s = vech_size(m);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m * m, s);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      g(j * m + i, vech_index(m, i, j)) = 1.0;
    }
  }
  return g;
}

Eigen::VectorXd vech_trace_weights(int m) {
  Eigen::VectorXd d(vech_size(m));
  int k = 0;
  for (int j = 0; j < m; ++j) {
    for (int i = j; i < m; ++i) {
      d(k++) = (i == j) ? 1.0 : 2.0;
    }
  }
  return d;
}

std::vector<SymMatrix> neg_powers(const SymMatrix& m, int k, double singular_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.mat());
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double lam_max = lam(lam.size() - 1);
  const double lam_min = lam(0);
  if (!(lam_max > 0.0) || lam_min <= singular_tol * lam_max) {
    const double ratio = lam_max > 0.0 ? lam_min / lam_max : 0.0;
    throw SingularMatrix("neg_powers: matrix numerically singular", ratio);
  }
  std::vector<SymMatrix> out;
  out.reserve(k);
  Eigen::VectorXd inv_pow = Eigen::VectorXd::Ones(lam.size());
  for (int r = 1; r <= k; ++r) {
    inv_pow = inv_pow.cwiseQuotient(lam);
    Eigen::MatrixXd p =
        es.eigenvectors() * inv_pow.asDiagonal() * es.eigenvectors().transpose();
    out.push_back(SymMatrix::symmetrized(p));
  }
  return out;
}

Eigen::MatrixXd kron_sandwich(const SymMatrix& a, const SymMatrix& b) {
  const int m = a.order();
  if (b.order() != m) throw DimensionMismatch("kron_sandwich: order mismatch");
  const int s = vech_size(m);
  // R[(i,j),(k,l)] = sum over the (up to 4) vec positions the duplication
  // matrix maps each vech index to; written out this is
  //   R_pq = A_jl B_ik + A_jk B_il + A_il B_jk + A_ik B_jl
  // restricted to the non-duplicated terms.  Building through explicit loops
  // avoids forming the m^2 x m^2 Kronecker product.
  Eigen::MatrixXd r(s, s);
  int p = 0;
  for (int j = 0; j < m; ++j) {
    for (int i = j; i < m; ++i, ++p) {
      int q = 0;
      for (int l = 0; l < m; ++l) {
        for (int k = l; k < m; ++k, ++q) {
          double v = a.mat()(j, l) * b.mat()(i, k);
          if (k != l) v += a.mat()(j, k) * b.mat()(i, l);
          if (i != j) {
            v += a.mat()(i, l) * b.mat()(j, k);
            if (k != l) v += a.mat()(i, k) * b.mat()(j, l);
          }
          r(p, q) = v;
        }
      }
    }
  }
  return 0.5 * (r + r.transpose());
}

PsdFactor psd_factor(const SymMatrix& q, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q.mat());
  const Eigen::VectorXd& lam = es.eigenvalues();
  const int s = static_cast<int>(lam.size());
  const double lam_max = std::max(lam(s - 1), 0.0);
  const double cutoff = tol * lam_max;
  if (lam(0) < -cutoff && lam(0) < -tol) {
    throw NotPsd("psd_factor: matrix has a significantly negative eigenvalue", lam(0));
  }
  int t = 0;
  for (int i = 0; i < s; ++i) {
    if (lam(i) > cutoff) ++t;
  }
  PsdFactor f;
  f.order = s;
  f.rank = t;
  f.factor.resize(s, t);
  // Columns ordered by decreasing eigenvalue.
  for (int c = 0; c < t; ++c) {
    const int src = s - 1 - c;
    f.factor.col(c) = es.eigenvectors().col(src) * std::sqrt(lam(src));
  }
  f.residual = (q.mat() - f.factor * f.factor.transpose()).cwiseAbs().maxCoeff();
  return f;
}

}  // namespace aqua
