#include "aqua/quadmodel.hpp"

#include <cmath>

namespace aqua {

namespace {

// Per-version pieces of the vech-space quadratic representation (section
// notation: a, c, and the coefficients of h~ h~^T / tr and of the Kronecker
// sum inside Q~).
struct VersionCoefs {
  double a;          // positive scale
  double c;          // constant offset
  double outer;      // coefficient of h~ h~^T / tr(M*^-p)
  double kron;       // coefficient of sum_r kron_sandwich(...)
};

VersionCoefs positive_coefs(int p, double phi_plus, double trp) {
  return {phi_plus / trp, 0.0, -(1.0 + p) / 2.0, 0.5};
}

VersionCoefs negative_coefs(int p, double phi_minus, double trp) {
  return {-3.0 * phi_minus / trp, 3.0 * phi_minus, (1.0 - p) / 6.0, 1.0 / 6.0};
}

struct VechModel {
  double a;
  double c;
  Eigen::VectorXd h_tilde;   // s
  Eigen::MatrixXd q_tilde;   // s x s
};

// Builds (a, c, h~, Q~) for the positive / negative / blend / logdet
// families around mstar.  The blend combines the two versions at the
// a-scaled quadratic-form level, so the gamma identity holds exactly.
VechModel build_vech_model(const Criterion& c, const SymMatrix& mstar) {
  const int m = mstar.order();
  int p = c.p;
  double gamma;
  switch (c.family) {
    case CriterionFamily::positive:
      gamma = 1.0;
      break;
    case CriterionFamily::negative:
      gamma = -1.0;
      break;
    case CriterionFamily::blend:
      gamma = c.gamma;
      break;
    case CriterionFamily::logdet:
      p = 0;
      gamma = gamma_d(mstar);
      break;
    default:
      throw Error("build_vech_model: unsupported family");
  }

  const auto powers = neg_powers(mstar, p + 1);
  const double trp =
      p == 0 ? static_cast<double>(m) : powers[p - 1].trace();
  const Eigen::VectorXd d = vech_trace_weights(m);
  // h~ = G^T vec(M*^-(p+1)) = d .* vech(M*^-(p+1)).
  const Eigen::VectorXd h_tilde = d.cwiseProduct(vech(powers[p]));

  Eigen::MatrixXd kron_sum = Eigen::MatrixXd::Zero(h_tilde.size(), h_tilde.size());
  for (int r = 1; r <= p + 1; ++r) {
    kron_sum += kron_sandwich(powers[p + 1 - r], powers[r - 1]);
  }
  const Eigen::MatrixXd outer = h_tilde * h_tilde.transpose() / trp;

  const double wp = 0.5 * (1.0 + gamma);
  const double wm = 0.5 * (1.0 - gamma);

  VechModel vm;
  vm.h_tilde = h_tilde;
  Eigen::MatrixXd q_scaled = Eigen::MatrixXd::Zero(h_tilde.size(), h_tilde.size());
  double a = 0.0;
  double offs = 0.0;
  if (wp != 0.0) {
    const double phi_plus = phi(Criterion::positive(p), mstar);
    const VersionCoefs vc = positive_coefs(p, phi_plus, trp);
    a += wp * vc.a;
    offs += wp * vc.c;
    q_scaled += (wp * vc.a) * (vc.outer * outer + vc.kron * kron_sum);
  }
  if (wm != 0.0) {
    const double phi_minus = phi(Criterion::negative(p), mstar);
    const VersionCoefs vc = negative_coefs(p, phi_minus, trp);
    a += wm * vc.a;
    offs += wm * vc.c;
    q_scaled += (wm * vc.a) * (vc.outer * outer + vc.kron * kron_sum);
  }
  vm.a = a;
  vm.c = offs;
  vm.q_tilde = q_scaled / a;

  if (c.family == CriterionFamily::logdet) {
    // Same h~ and Q~ as the gamma_d blend, rescaled so that
    // a phi + c reproduces the log-det Taylor polynomial.
    vm.a = 2.0;
    vm.c = phi(Criterion::logdet(), mstar) - 1.5 * m;
  }
  return vm;
}

}  // namespace

double f_pair(const SymMatrix& mstar, const SymMatrix& hi, const SymMatrix& hj, int p,
              double singular_tol) {
  if (hi.order() != mstar.order() || hj.order() != mstar.order()) {
    throw DimensionMismatch("f_pair: order mismatch");
  }
  const auto powers = neg_powers(mstar, p + 1, singular_tol);
  double sum = 0.0;
  for (int r = 1; r <= p + 1; ++r) {
    sum += (powers[r - 1].mat() * hi.mat() * powers[p + 1 - r].mat() * hj.mat()).trace();
  }
  return sum;
}

double gamma_d(const SymMatrix& mstar) {
  const double d = phi(Criterion::positive(0), mstar);
  if (d <= 0.0) {
    throw SingularMatrix("gamma_d: anchor matrix is singular", 0.0);
  }
  return (1.0 - d * d) / (1.0 + d * d);
}

QuadModel build_quad_model(const DesignProblem& p, const Criterion& c,
                           const SymMatrix& mstar, double tol) {
  if (mstar.order() != p.m()) throw DimensionMismatch("build_quad_model: anchor order != m");
  if (c.family == CriterionFamily::i_opt) {
    // I-optimal designs are A-optimal in the transformed model; build the
    // negative-family p=1 surrogate there and lift (a, c) by m so the
    // reported values approximate Phi_I = m Phi_1^-(transformed).
    DesignProblem tp = i_to_a(p, *c.region);
    // Transformed anchor: L^-1/2 M* L^-1/2 with the same symmetric root
    // i_to_a uses.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.region->mat());
    Eigen::MatrixXd s_inv = es.eigenvectors() *
                            es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                            es.eigenvectors().transpose();
    SymMatrix mstar_t = SymMatrix::symmetrized(s_inv * mstar.mat() * s_inv);
    QuadModel q = build_quad_model(tp, Criterion::negative(1), mstar_t, tol);
    q.scale *= p.m();
    q.offset *= p.m();
    q.criterion = c;
    q.anchor = mstar;
    return q;
  }

  const VechModel vm = build_vech_model(c, mstar);
  const Eigen::MatrixXd& hmat = p.vech_rows();  // n x s

  QuadModel q;
  q.anchor = mstar;
  q.criterion = c;
  q.scale = vm.a;
  q.offset = vm.c;
  q.h = hmat * vm.h_tilde;

  const PsdFactor pf = psd_factor(SymMatrix::symmetrized(vm.q_tilde), tol);
  q.rank = pf.rank;
  q.s = hmat * pf.factor;  // n x t
  return q;
}

double q_entry(const DesignProblem& p, const Criterion& c, const SymMatrix& mstar,
               int i, int j) {
  if (i < 0 || i >= p.n() || j < 0 || j >= p.n()) {
    throw IndexOutOfRange("q_entry: index out of range");
  }
  if (c.family == CriterionFamily::i_opt) {
    DesignProblem tp = i_to_a(p, *c.region);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.region->mat());
    Eigen::MatrixXd s_inv = es.eigenvectors() *
                            es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                            es.eigenvectors().transpose();
    SymMatrix mstar_t = SymMatrix::symmetrized(s_inv * mstar.mat() * s_inv);
    return q_entry(tp, Criterion::negative(1), mstar_t, i, j);
  }

  int pp = c.p;
  double gamma;
  switch (c.family) {
    case CriterionFamily::positive:
      gamma = 1.0;
      break;
    case CriterionFamily::negative:
      gamma = -1.0;
      break;
    case CriterionFamily::blend:
      gamma = c.gamma;
      break;
    case CriterionFamily::logdet:
      pp = 0;
      gamma = gamma_d(mstar);
      break;
    default:
      throw Error("q_entry: unsupported family");
  }
  const int m = mstar.order();
  const auto powers = neg_powers(mstar, pp + 1);
  const double trp = pp == 0 ? static_cast<double>(m) : powers[pp - 1].trace();
  const double hi = (powers[pp].mat() * p.elem(i).mat()).trace();
  const double hj = (powers[pp].mat() * p.elem(j).mat()).trace();
  // Canonical argument order keeps Q_ij == Q_ji exact in floating point.
  const int lo = std::min(i, j), hi_idx = std::max(i, j);
  const double fp = f_pair(mstar, p.elem(lo), p.elem(hi_idx), pp);

  const double wp = 0.5 * (1.0 + gamma);
  const double wm = 0.5 * (1.0 - gamma);
  const double hprod = hi * hj;
  double a = 0.0;
  double q_scaled = 0.0;
  if (wp != 0.0) {
    const VersionCoefs vc = positive_coefs(pp, phi(Criterion::positive(pp), mstar), trp);
    a += wp * vc.a;
    // Q+_ij = (1/2) F_p - ((p+1)/2) h_i h_j / tr
    q_scaled += (wp * vc.a) * (vc.kron * fp + vc.outer * hprod / trp);
  }
  if (wm != 0.0) {
    const VersionCoefs vc = negative_coefs(pp, phi(Criterion::negative(pp), mstar), trp);
    a += wm * vc.a;
    q_scaled += (wm * vc.a) * (vc.kron * fp + vc.outer * hprod / trp);
  }
  return q_scaled / a;
}

double phi_quad(const QuadModel& q, const Design& xi) {
  if (xi.size() != q.n()) throw DimensionMismatch("phi_quad: design length != n");
  const double lin = q.h.dot(xi.weights);
  if (q.rank == 0) return lin;
  return lin - (q.s.transpose() * xi.weights).squaredNorm();
}

double phi_quad_report(const QuadModel& q, const Design& xi) {
  return q.scale * phi_quad(q, xi) + q.offset;
}

ExchangeState make_exchange_state(const QuadModel& q, const Design& start) {
  if (start.size() != q.n()) {
    throw DimensionMismatch("make_exchange_state: design length != n");
  }
  ExchangeState st;
  st.model = &q;
  st.xi = start.weights;
  st.v = q.s.transpose() * st.xi;
  st.row_norms = q.s.rowwise().squaredNorm();
  st.phi = q.h.dot(st.xi) - st.v.squaredNorm();
  return st;
}

double exchange_gain(const ExchangeState& st, int l, int k) {
  const QuadModel& q = *st.model;
  if (l == k) return 0.0;
  const double cross = q.s.row(l).dot(q.s.row(k));
  return q.h(l) - q.h(k) - 2.0 * (st.v.dot(q.s.row(l)) - st.v.dot(q.s.row(k))) -
         st.row_norms(l) + 2.0 * cross - st.row_norms(k);
}

void apply_exchange(ExchangeState& st, int l, int k) {
  if (st.xi(k) < 1.0) {
    throw EmptyPoint("apply_exchange: removal point has weight < 1");
  }
  st.phi += exchange_gain(st, l, k);
  if (l != k) {
    st.v += st.model->s.row(l) - st.model->s.row(k);
    st.xi(l) += 1.0;
    st.xi(k) -= 1.0;
  }
}

double exchange_delta(ExchangeState& st, int l, int k) {
  const double delta = st.xi(k) >= 1.0 ? exchange_gain(st, l, k) : 0.0;
  apply_exchange(st, l, k);
  return delta;
}

double addition_gain(const ExchangeState& st, int l) {
  const QuadModel& q = *st.model;
  return q.h(l) - 2.0 * st.v.dot(q.s.row(l)) - st.row_norms(l);
}

void apply_addition(ExchangeState& st, int l) {
  st.phi += addition_gain(st, l);
  st.v += st.model->s.row(l);
  st.xi(l) += 1.0;
}

double removal_gain(const ExchangeState& st, int k) {
  const QuadModel& q = *st.model;
  return -q.h(k) + 2.0 * st.v.dot(q.s.row(k)) - st.row_norms(k);
}

void apply_removal(ExchangeState& st, int k) {
  if (st.xi(k) < 1.0) throw EmptyPoint("apply_removal: point has weight < 1");
  st.phi += removal_gain(st, k);
  st.v -= st.model->s.row(k);
  st.xi(k) -= 1.0;
}

}  // namespace aqua
