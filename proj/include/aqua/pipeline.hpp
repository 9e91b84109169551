#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aqua/integer.hpp"

#include <json.hpp>

namespace aqua {

struct AquaOptions {
  std::optional<SymMatrix> anchor;  // supplied anchor; else solve_ad runs
  AdOptions ad;                     // anchor solver options
  BnbOptions bnb;                   // integer solver options
  double factor_tol = kFactorTolDefault;
};

struct AquaIterate {
  Design design;
  double criterion_value = 0.0;
  bool integral = false;
};

struct AquaResult {
  Design design;                  // exact design found
  double criterion_value = 0.0;   // true criterion at the design
  double surrogate_value = 0.0;   // scale * phi + offset at the design
  double anchor_value = 0.0;      // criterion at the anchor matrix
  double efficiency_bound = 0.0;  // positive-scale ratio vs the anchor
  SolveReport report;
  std::vector<AquaIterate> history;  // iterative mode only
  int iterations = 1;
  /// Single solve: the gap target was certified.  Iterative mode: the
  /// anchor/design stabilized before the iteration cap.
  bool converged = false;
};

/// The full pipeline: anchor (given or solved), quadratic surrogate at the
/// anchor, branch-and-bound on the surrogate, re-score with the true
/// criterion, efficiency bound against the anchor value.
AquaResult aqua_solve(const DesignProblem& p, const Criterion& c,
                      const ConstraintSet& cs, const AquaOptions& opts = {});

/// Budgeted inner-solve options for the iterative scheme: successive solves
/// are meant to be cheap, so the integer stage runs with modest caps.
AquaOptions default_iter_inner();

struct IterOptions {
  int subsample_size = 1500;   // step-1 rough anchor sample
  int max_iter = 10;
  bool relax_intermediate = true;  // intermediate steps solve the continuous
                                   // surrogate only
  std::uint64_t seed = 1;
  std::optional<SymMatrix> initial_anchor;  // skips the subsample step
  AquaOptions inner = default_iter_inner();  // final integer solve
  QpOptions relaxed;           // options for intermediate relaxed solves
};

/// The heuristic iterative scheme: rough anchor from a random point
/// subsample, repeated surrogate solves with the previous iterate's
/// information matrix as the next anchor, stopping on design repetition,
/// anchor stabilization, or max_iter.  Non-convergence is not an error: the
/// best iterate is returned with the full history.
AquaResult iterative_aqua(const DesignProblem& p, const Criterion& c,
                          const ConstraintSet& cs, const IterOptions& opts = {});

/// Pukelsheim-Rieder efficient rounding of positive weights to N trials:
/// start n_i = ceil((N - s/2) w_i / sum w), then adjust by the quotient
/// rules until the total is N.  Every output entry is >= 1.  Throws
/// TooFewTrials when N < s.
Eigen::VectorXi efficient_rounding(const Eigen::VectorXd& w, int n_trials);

/// Writes the mixed integer conic quadratic formulation of the surrogate
/// problem as a self-contained JSON document; with rank 0 the cone block is
/// omitted and the document is a pure integer LP.
nlohmann::json micqp_document(const QuadModel& q, const ConstraintSet& cs);

/// Serializes micqp_document to a file.  Throws IoError.
void export_micqp(const QuadModel& q, const ConstraintSet& cs, const std::string& path);

}  // namespace aqua
