#pragma once

#include "aqua/criteria.hpp"
#include "aqua/model.hpp"
#include "aqua/symlin.hpp"

namespace aqua {

/// The quadratic surrogate of a criterion around an anchor matrix, in
/// low-rank form:
///
///   phi(xi) = h^T xi - |S^T xi|^2,
///
/// with the reported criterion approximation scale * phi + offset.  Solvers
/// maximize phi alone; scale and offset never change the argmax.
struct QuadModel {
  SymMatrix anchor;        // M*, positive definite (in the solver model space)
  double scale = 1.0;      // a > 0
  double offset = 0.0;     // c
  Eigen::VectorXd h;       // length n
  Eigen::MatrixXd s;       // n x t, Q = S S^T
  Criterion criterion;
  int rank = 0;            // t <= m (m + 1) / 2

  int n() const { return static_cast<int>(h.size()); }
};

/// F_p(M*, H_i, H_j) = sum_{r=1}^{p+1} tr(M*^-r H_i M*^-(p+2-r) H_j);
/// symmetric in (H_i, H_j).
double f_pair(const SymMatrix& mstar, const SymMatrix& hi, const SymMatrix& hj, int p,
              double singular_tol = kSingularTolDefault);

/// Blend parameter at which the log-det quadratic model coincides with the
/// gamma-blend of the positive and negative D models:
/// gamma_d = (1 - d^2) / (1 + d^2), d = (det M*)^(1/m).  Always in (-1, 1).
double gamma_d(const SymMatrix& mstar);

/// Builds the quadratic surrogate of `c` around `mstar`.  I-criteria are
/// first transformed through i_to_a and built as the negative family with
/// p = 1; log-det is built as the gamma_d blend.
QuadModel build_quad_model(const DesignProblem& p, const Criterion& c,
                           const SymMatrix& mstar, double tol = kFactorTolDefault);

/// Elementwise Q oracle: the (i, j) entry of the dense quadratic-form matrix
/// the low-rank factor represents, computed through F_p instead of the
/// vech/duplication route.  Small-instance test oracle, never used by
/// solvers.
double q_entry(const DesignProblem& p, const Criterion& c, const SymMatrix& mstar,
               int i, int j);

/// phi(xi) = h^T xi - |S^T xi|^2 in O(n t).
double phi_quad(const QuadModel& q, const Design& xi);

/// scale * phi(xi) + offset: the approximate criterion value for reporting.
double phi_quad_report(const QuadModel& q, const Design& xi);

/// Incrementally updatable evaluation state for exchange heuristics: caches
/// v = S^T xi, the row norms |S_k.|^2, and the current phi value.
struct ExchangeState {
  const QuadModel* model = nullptr;
  Eigen::VectorXd xi;
  Eigen::VectorXd v;          // S^T xi, length t
  Eigen::VectorXd row_norms;  // |S_k.|^2, length n
  double phi = 0.0;
};

ExchangeState make_exchange_state(const QuadModel& q, const Design& start);

/// phi(xi + e_l - e_k) - phi(xi) from the cached state; pure, O(t).
double exchange_gain(const ExchangeState& st, int l, int k);

/// Applies the exchange xi <- xi + e_l - e_k, updating the cache with 2t+2
/// multiplications.  Throws EmptyPoint when xi_k < 1.
void apply_exchange(ExchangeState& st, int l, int k);

/// Spec-shaped combination of the two: returns the gain and updates st.
double exchange_delta(ExchangeState& st, int l, int k);

/// Gain of the pure addition xi + e_l (no removal).
double addition_gain(const ExchangeState& st, int l);
void apply_addition(ExchangeState& st, int l);

/// Gain of the pure removal xi - e_k.  Throws EmptyPoint when xi_k < 1 on
/// apply.
double removal_gain(const ExchangeState& st, int k);
void apply_removal(ExchangeState& st, int k);

}  // namespace aqua
