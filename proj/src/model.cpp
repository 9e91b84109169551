#include "aqua/model.hpp"

#include <Eigen/Eigenvalues>

namespace aqua {

namespace {

// Eigenvalues of user-supplied H_i may dip slightly negative; clip to PSD.
constexpr double kElemPsdTol = 1e-9;

SymMatrix clip_to_psd(const SymMatrix& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.mat());
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double lam_max = std::max(lam(lam.size() - 1), 0.0);
  const double scale = std::max(lam_max, 1.0);
  if (lam(0) < -kElemPsdTol * scale) {
    throw Error("DesignProblem: elementary information matrix is not PSD");
  }
  // Reconstruction perturbs exact entries; only clip when the negative part
  // is above roundoff level.
  if (lam(0) >= -1e-14 * scale) return h;
  Eigen::VectorXd clipped = lam.cwiseMax(0.0);
  return SymMatrix::symmetrized(es.eigenvectors() * clipped.asDiagonal() *
                                es.eigenvectors().transpose());
}

}  // namespace

DesignProblem::DesignProblem(std::vector<SymMatrix> elem, Eigen::MatrixXd points,
                             std::vector<std::string> labels)
    : elem_(std::move(elem)), points_(std::move(points)), labels_(std::move(labels)) {
  if (elem_.empty()) throw Error("DesignProblem: needs at least one design point");
  m_ = elem_[0].order();
  for (auto& h : elem_) {
    if (h.order() != m_) {
      throw DimensionMismatch("DesignProblem: elementary matrix orders differ");
    }
    h = clip_to_psd(h);
  }
  if (points_.size() != 0 && points_.rows() != static_cast<Eigen::Index>(elem_.size())) {
    throw DimensionMismatch("DesignProblem: points row count != n");
  }
  if (!labels_.empty() && labels_.size() != elem_.size()) {
    throw DimensionMismatch("DesignProblem: label count != n");
  }
}

const Eigen::MatrixXd& DesignProblem::vech_rows() const {
  if (vech_rows_.size() == 0) {
    const int s = vech_size(m_);
    vech_rows_.resize(n(), s);
    for (int i = 0; i < n(); ++i) {
      vech_rows_.row(i) = vech(elem_[i]).transpose();
    }
  }
  return vech_rows_;
}

DesignProblem from_regressors(const Eigen::MatrixXd& f) {
  if (f.rows() < 1 || f.cols() < 1) {
    throw Error("from_regressors: needs at least one row and one column");
  }
  std::vector<SymMatrix> elem;
  elem.reserve(f.rows());
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    elem.emplace_back(SymMatrix(f.row(i).transpose() * f.row(i)));
  }
  DesignProblem p(std::move(elem));
  p.regressors_ = f;
  return p;
}

DesignProblem from_regressors(const Eigen::MatrixXd& f, Eigen::MatrixXd points,
                              std::vector<std::string> labels) {
  DesignProblem base = from_regressors(f);
  DesignProblem p(base.elems(), std::move(points), std::move(labels));
  p.regressors_ = f;
  return p;
}

SymMatrix default_i_region(const DesignProblem& p) {
  return moment_matrix(p.elems(),
                       Eigen::VectorXd::Constant(p.n(), 1.0 / p.n()));
}

SymMatrix info_matrix(const DesignProblem& p, const Design& d) {
  if (d.size() != p.n()) throw DimensionMismatch("info_matrix: design length != n");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p.m(), p.m());
  for (int i = 0; i < p.n(); ++i) {
    const double w = d.weights(i);
    if (w != 0.0) m += w * p.elem(i).mat();
  }
  return SymMatrix(std::move(m));
}

SymMatrix moment_matrix(const std::vector<SymMatrix>& v, const Eigen::VectorXd& eta) {
  if (v.empty() || static_cast<Eigen::Index>(v.size()) != eta.size()) {
    throw DimensionMismatch("moment_matrix: weight count != matrix count");
  }
  if (eta.minCoeff() < 0.0) throw Error("moment_matrix: negative weight");
  if (eta.maxCoeff() == 0.0) throw EmptyRegion("moment_matrix: all weights zero");
  const int m = v[0].order();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(m, m);
  for (size_t j = 0; j < v.size(); ++j) {
    if (v[j].order() != m) throw DimensionMismatch("moment_matrix: order mismatch");
    if (eta(j) != 0.0) l += eta(j) * v[j].mat();
  }
  return SymMatrix(std::move(l));
}

DesignProblem i_to_a(const DesignProblem& p, const SymMatrix& l) {
  if (l.order() != p.m()) throw DimensionMismatch("i_to_a: L order != m");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l.mat());
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double lam_max = lam(lam.size() - 1);
  if (!(lam_max > 0.0) || lam(0) <= kSingularTolDefault * lam_max) {
    throw SingularL("i_to_a: L is singular; prediction region must span R^m");
  }
  // S = L^{1/2} symmetric square root; transformed H_i = S^-1 H_i S^-1.
  Eigen::VectorXd inv_sqrt = lam.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd s_inv =
      es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
  std::vector<SymMatrix> elem;
  elem.reserve(p.n());
  for (int i = 0; i < p.n(); ++i) {
    elem.emplace_back(SymMatrix::symmetrized(s_inv * p.elem(i).mat() * s_inv));
  }
  return DesignProblem(std::move(elem), p.points(), p.labels());
}

}  // namespace aqua
