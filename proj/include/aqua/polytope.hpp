#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "aqua/model.hpp"

namespace aqua {

/// The design polytope {A xi <= b (or = for flagged rows), lower <= xi <=
/// upper} with per-variable integrality flags.  Lower bounds must be finite
/// (default 0); upper bounds may be +inf.  Construction validates bounds and
/// runs one LP feasibility solve on the continuous relaxation.
class ConstraintSet {
 public:
  ConstraintSet(Eigen::MatrixXd a, Eigen::VectorXd b, std::vector<bool> equality,
                Eigen::VectorXd lower, Eigen::VectorXd upper,
                std::vector<bool> integral);

  /// {1^T xi = total, xi >= 0}, all variables integral.
  static ConstraintSet simplex(int n, double total);

  /// {lower <= xi <= upper} only, all variables integral if requested.
  static ConstraintSet box(Eigen::VectorXd lower, Eigen::VectorXd upper,
                           bool integral);

  int n() const { return static_cast<int>(lower_.size()); }
  int rows() const { return static_cast<int>(b_.size()); }
  const Eigen::MatrixXd& a() const { return a_; }
  const Eigen::VectorXd& b() const { return b_; }
  bool row_equality(int i) const { return equality_[i]; }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  bool integral(int j) const { return integral_[j]; }
  const std::vector<bool>& integrality() const { return integral_; }
  bool any_integral() const;

 private:
  Eigen::MatrixXd a_;  // k x n
  Eigen::VectorXd b_;
  std::vector<bool> equality_;
  Eigen::VectorXd lower_, upper_;
  std::vector<bool> integral_;
};

struct LpResult {
  Eigen::VectorXd x;
  double value = 0.0;
};

namespace detail {
class Simplex;
}

/// Reusable LP handle over one polytope: phase I runs once at construction
/// (throws Infeasible), and each maximize() warm-starts from the previous
/// optimal basis.  Intended for oracles called with many objectives.
class LpSolver {
 public:
  LpSolver(const ConstraintSet& cs, Eigen::VectorXd lower, Eigen::VectorXd upper);
  explicit LpSolver(const ConstraintSet& cs);
  ~LpSolver();
  LpSolver(LpSolver&&) noexcept;
  LpSolver& operator=(LpSolver&&) noexcept;

  /// Throws Unbounded when the objective is unbounded over the relaxation.
  LpResult maximize(const Eigen::VectorXd& c);

 private:
  std::unique_ptr<detail::Simplex> impl_;
};

/// Maximizes c^T xi over the continuous relaxation of C and returns an
/// optimal vertex.  Deterministic: Dantzig pricing with lowest-index ties and
/// a Bland fallback against cycling.  Throws Infeasible / Unbounded.
LpResult lp_max(const Eigen::VectorXd& c, const ConstraintSet& cs);

/// Same with the box bounds replaced (used by branch-and-bound nodes).
LpResult lp_max(const Eigen::VectorXd& c, const ConstraintSet& cs,
                const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

/// True when the relaxation {A xi <=/= b, lower <= xi <= upper} is nonempty.
bool lp_feasible(const ConstraintSet& cs, const Eigen::VectorXd& lower,
                 const Eigen::VectorXd& upper);

struct Violation {
  enum class Kind { row, bound, integrality };
  Kind kind;
  int index;
  double amount;
  std::string message;
};

struct FeasibilityReport {
  bool ok = true;
  std::vector<Violation> violations;
};

/// Checks A xi <= b + tol (equalities within tol), bounds, and — when the
/// design is flagged integral — integrality of the C-flagged variables.
FeasibilityReport feasible(const Design& d, const ConstraintSet& cs, double tol);

/// Adds the q-1 equality rows xi_{i1} = xi_{i2} = ... for each orbit.
ConstraintSet add_symmetry_orbits(const ConstraintSet& cs,
                                  const std::vector<std::vector<int>>& orbits);

}  // namespace aqua
