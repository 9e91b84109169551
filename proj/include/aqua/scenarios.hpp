#pragma once

#include <cstdint>

#include "aqua/model.hpp"
#include "aqua/polytope.hpp"

namespace aqua {

/// First-degree weighing model on the 2^m vertices of the unit cube:
/// f(x) = x, no intercept.  m <= 20.
DesignProblem spring_balance_problem(int m);

/// Quadratic Scheffe mixture model for three components on the simplex grid
/// with the given step (step must divide 1): regressors
/// (x1, x2, x3, x1 x2, x1 x3, x2 x3), m = 6.
DesignProblem scheffe_problem(double step);

/// Orbits of the cyclic coordinate rotation (x1,x2,x3) -> (x2,x3,x1) on the
/// Scheffe grid, as index groups.
std::vector<std::vector<int>> scheffe_orbits(const DesignProblem& p);

/// Marginal non-collapsibility rows (each level of each factor at most once)
/// for the Scheffe grid, optionally with the cyclic symmetry equalities.
/// Variables are binary (upper bound 1, integral).
ConstraintSet scheffe_constraints(const DesignProblem& p, double step, bool symmetry);

struct SyntheticTallParams {
  int n = 20000;
  int m = 3;            // intercept, quality, log-price, then noise columns
  int strata = 40;      // one selection per stratum (equality rows)
  double budget_per_stratum = 30.0;
  double quality_min = 90.0;
  std::uint64_t seed = 1;
};

struct SyntheticTall {
  DesignProblem problem;
  ConstraintSet constraints;
};

/// Constrained-subsampling analogue: random covariates with strata equality
/// rows, one budget row, one average-quality row (stored negated as <=), and
/// binary upper bounds.
SyntheticTall synthetic_tall(const SyntheticTallParams& params);

/// Appends a size row 1^T xi = total to an existing constraint set.
ConstraintSet with_size_row(const ConstraintSet& cs, double total);

/// The neighbor-vertex approximate design for the spring-balance model:
/// xi_s mixes the two adjacent j-vertex designs; s in [0, m].
Design neighbor_vertex_design(int m, double s, double total);

/// The information matrix of the j-vertex design of size N (closed form).
SymMatrix j_vertex_info(int m, int j, double total);

}  // namespace aqua
