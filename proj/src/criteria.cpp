#include "aqua/criteria.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace aqua {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Spectrum {
  Eigen::VectorXd lam;
  Eigen::MatrixXd vec;
  bool singular;
};

Spectrum decompose(const SymMatrix& m, bool need_vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      m.mat(), need_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  Spectrum s;
  s.lam = es.eigenvalues();
  if (need_vectors) s.vec = es.eigenvectors();
  const double lam_max = s.lam(s.lam.size() - 1);
  s.singular = !(lam_max > 0.0) || s.lam(0) <= kSingularTolDefault * lam_max;
  return s;
}

double phi_positive(int p, const Spectrum& s, int m) {
  if (s.singular) return 0.0;
  if (p == 0) {
    // (det M)^(1/m), evaluated through logs for stability.
    return std::exp(s.lam.array().log().sum() / m);
  }
  const double tr = s.lam.array().pow(-p).sum();
  return std::pow(tr / m, -1.0 / p);
}

double phi_negative(int p, const Spectrum& s, int m) {
  if (s.singular) return -kInf;
  if (p == 0) return -std::exp(-s.lam.array().log().sum() / m);
  const double tr = s.lam.array().pow(-p).sum();
  return -std::pow(tr / m, 1.0 / p);
}

void check_criterion(const Criterion& c) {
  if (c.p < 0) throw Error("Criterion: p must be non-negative");
  if (c.family == CriterionFamily::blend && (c.gamma < -1.0 || c.gamma > 1.0)) {
    throw Error("Criterion: gamma must lie in [-1, 1]");
  }
  if (c.family == CriterionFamily::i_opt && !c.region.has_value()) {
    throw Error("Criterion: I-criterion requires a moment matrix L");
  }
}

}  // namespace

Criterion Criterion::positive(int p) { return {CriterionFamily::positive, p, 0.0, {}}; }
Criterion Criterion::negative(int p) { return {CriterionFamily::negative, p, 0.0, {}}; }
Criterion Criterion::blend(int p, double gamma) {
  return {CriterionFamily::blend, p, gamma, {}};
}
Criterion Criterion::logdet() { return {CriterionFamily::logdet, 0, 0.0, {}}; }
Criterion Criterion::i_opt(SymMatrix l) {
  return {CriterionFamily::i_opt, 1, 0.0, std::move(l)};
}

double phi(const Criterion& c, const SymMatrix& m) {
  check_criterion(c);
  const int d = m.order();
  const Spectrum s = decompose(m, c.family == CriterionFamily::i_opt);
  switch (c.family) {
    case CriterionFamily::positive:
      return phi_positive(c.p, s, d);
    case CriterionFamily::negative:
      return phi_negative(c.p, s, d);
    case CriterionFamily::blend: {
      // 0 * inf = 0: the infinite branch is dropped at gamma = +-1.
      const double wp = 0.5 * (1.0 + c.gamma);
      const double wm = 0.5 * (1.0 - c.gamma);
      double v = 0.0;
      if (wp != 0.0) v += wp * phi_positive(c.p, s, d);
      if (wm != 0.0) {
        const double neg = phi_negative(c.p, s, d);
        if (neg == -kInf) return -kInf;
        v += wm * neg;
      }
      return v;
    }
    case CriterionFamily::logdet:
      if (s.singular) return -kInf;
      return s.lam.array().log().sum();
    case CriterionFamily::i_opt: {
      if (s.singular) return -kInf;
      if (c.region->order() != d) throw DimensionMismatch("phi: L order != m");
      Eigen::MatrixXd minv = s.vec * s.lam.cwiseInverse().asDiagonal() * s.vec.transpose();
      return -(minv * c.region->mat()).trace();
    }
  }
  return 0.0;
}

SymMatrix phi_gradient(const Criterion& c, const SymMatrix& m) {
  check_criterion(c);
  const int d = m.order();
  const Spectrum s = decompose(m, true);
  if (s.singular) {
    throw SingularMatrix("phi_gradient: singular information matrix",
                         s.lam(0) / std::max(s.lam(d - 1), 1e-300));
  }
  auto power = [&](double e) {
    return Eigen::MatrixXd(s.vec * s.lam.array().pow(e).matrix().asDiagonal() *
                           s.vec.transpose());
  };
  switch (c.family) {
    case CriterionFamily::positive:
    case CriterionFamily::negative:
    case CriterionFamily::blend: {
      const double trp = s.lam.array().pow(-c.p).sum();
      Eigen::MatrixXd mp1 = power(-(c.p + 1.0));
      double coef = 0.0;
      const double wp = c.family == CriterionFamily::negative ? 0.0
                        : c.family == CriterionFamily::positive
                            ? 1.0
                            : 0.5 * (1.0 + c.gamma);
      const double wm = c.family == CriterionFamily::positive ? 0.0
                        : c.family == CriterionFamily::negative
                            ? 1.0
                            : 0.5 * (1.0 - c.gamma);
      if (wp != 0.0) coef += wp * phi_positive(c.p, s, d) / trp;
      if (wm != 0.0) coef -= wm * phi_negative(c.p, s, d) / trp;
      return SymMatrix::symmetrized(coef * mp1);
    }
    case CriterionFamily::logdet:
      return SymMatrix::symmetrized(power(-1.0));
    case CriterionFamily::i_opt: {
      if (c.region->order() != d) throw DimensionMismatch("phi_gradient: L order != m");
      Eigen::MatrixXd minv = power(-1.0);
      return SymMatrix::symmetrized(minv * c.region->mat() * minv);
    }
  }
  return SymMatrix::zero(d);
}

double positive_scale_value(const Criterion& c, const SymMatrix& m) {
  check_criterion(c);
  switch (c.family) {
    case CriterionFamily::positive:
    case CriterionFamily::negative:
    case CriterionFamily::blend:
      return phi(Criterion::positive(c.p), m);
    case CriterionFamily::logdet:
      return phi(Criterion::positive(0), m);
    case CriterionFamily::i_opt: {
      const double v = phi(c, m);  // -tr(M^-1 L), or -inf
      return v == -kInf ? 0.0 : -1.0 / v;
    }
  }
  return 0.0;
}

double efficiency(const Criterion& c, const SymMatrix& m, const SymMatrix& mstar) {
  const double ref = positive_scale_value(c, mstar);
  if (!(ref > 0.0) || !std::isfinite(ref)) {
    throw UndefinedEfficiency("efficiency: reference criterion value is 0 or -inf");
  }
  return positive_scale_value(c, m) / ref;
}

}  // namespace aqua
