#pragma once

#include <limits>
#include <optional>
#include <string>

#include "aqua/approx.hpp"
#include "aqua/polytope.hpp"
#include "aqua/quadmodel.hpp"

namespace aqua {

enum class Termination { optimal, gap_reached, node_cap, time_cap };

struct SolveReport {
  std::optional<Design> incumbent;
  /// Every incumbent accepted during the search, in order, with its phi.
  std::vector<std::pair<Design, double>> incumbent_history;
  double incumbent_phi = -std::numeric_limits<double>::infinity();
  double upper_bound = std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();  // relative
  long nodes_expanded = 0;
  long heuristic_improvements = 0;
  double wall_seconds = 0.0;
  Termination termination = Termination::optimal;
};

struct BnbOptions {
  double gap = 1e-6;           // relative gap target
  long node_cap = 100000;
  double time_cap_seconds = 0.0;  // 0 = off
  int threads = 1;             // parallel node expansion; determinism only at 1
  QpOptions relaxation;        // root relaxation options
  int node_iter_cap = 250;     // Frank-Wolfe iteration budget per non-root
                               // node; the bound stays valid at any cutoff
  int exchange_k = 16;         // KL candidate list sizes
  int exchange_l = 16;
};

/// Maximizes phi(xi) = h^T xi - |S^T xi|^2 over the integer points of C by
/// best-first branch-and-bound on the concave-QP relaxation.  Throws
/// Infeasible when no integer feasible point exists; resource caps return the
/// best incumbent with a valid bound instead of throwing.
SolveReport branch_and_bound(const QuadModel& q, const ConstraintSet& cs,
                             const BnbOptions& opts = {});

struct ExchangeOptions {
  int k = 16;           // best increase candidates
  int l = 16;           // best decrease candidates
  long move_cap = 100000;
  std::vector<double>* phi_trace = nullptr;  // collects phi after each move
};

/// Feasibility-respecting exchange heuristic: greedy best improving move
/// among gradient-ranked single-point exchanges, additions, and removals.
/// Starts from a feasible integral design and returns a local optimum.
Design kl_exchange(const QuadModel& q, const ConstraintSet& cs, const Design& start,
                   const ExchangeOptions& opts = {});

/// Floors a relaxation point and repairs it toward feasibility with unit
/// steps guided by the fractional parts.  Returns nullopt on failure; the
/// caller then relies on branching alone.
std::optional<Design> round_incumbent(const Design& relaxed, const ConstraintSet& cs);

}  // namespace aqua
