#pragma once

#include <cstdint>
#include <optional>

#include "aqua/criteria.hpp"
#include "aqua/polytope.hpp"
#include "aqua/quadmodel.hpp"

namespace aqua {

struct AdOptions {
  double gap_tol = 1e-6;     // stop when gap / |phi| <= gap_tol
  int max_iter = 5000;
  int start_attempts = 25;
  std::uint64_t seed = 1;
  bool away_steps = true;
  int line_search_iters = 40;
};

/// Optimal approximate design: the anchor supplier.
struct AdSolution {
  Design design;             // non-integral weights
  SymMatrix info;            // M(design)
  double value = 0.0;        // criterion value
  double gap = 0.0;          // Frank-Wolfe duality gap at the final iterate
  int iterations = 0;
  bool converged = false;
};

/// Maximizes the criterion over the continuous relaxation of C by
/// Frank-Wolfe with optional away steps and golden-section line search.
/// Throws SingularStart when no nonsingular feasible start is found.
AdSolution solve_ad(const DesignProblem& p, const Criterion& c,
                    const ConstraintSet& cs, const AdOptions& opts = {});

struct QpOptions {
  double gap_tol = 1e-7;     // relative to |phi|
  int max_iter = 20000;
  bool away_steps = true;
  /// Optional warm start; used when feasible for the effective bounds.
  std::optional<Eigen::VectorXd> start;
};

struct QpSolution {
  Design design;             // relaxed maximizer of phi
  double value = 0.0;        // phi at the design
  double upper_bound = 0.0;  // value + final gap: certified bound on the
                             // integer optimum
  int iterations = 0;
  bool converged = false;
};

/// Maximizes phi(xi) = h^T xi - |S^T xi|^2 over the relaxation of C with the
/// given box bounds, by Frank-Wolfe with closed-form exact line search.
QpSolution solve_relaxed_qp(const QuadModel& q, const ConstraintSet& cs,
                            const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                            const QpOptions& opts = {});

QpSolution solve_relaxed_qp(const QuadModel& q, const ConstraintSet& cs,
                            const QpOptions& opts = {});

/// Frank-Wolfe duality gap of the criterion at xi: zero iff xi maximizes the
/// relaxed problem.  Throws SingularMatrix when M(xi) is singular.
double equivalence_gap(const DesignProblem& p, const Criterion& c, const Design& xi,
                       const ConstraintSet& cs);

}  // namespace aqua
