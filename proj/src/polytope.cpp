#include "aqua/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace aqua {

namespace detail {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-11;
constexpr double kDualTol = 1e-9;
constexpr int kRefactorPeriod = 100;
constexpr int kDegenerateLimit = 400;  // consecutive zero-step pivots before Bland

// Dense bounded-variable primal simplex, two phases with artificials.
// Variable layout: [0, n) structural, [n, n+k) logical, [n+2k) artificial.
// The constraint data is referenced, not copied; the owning ConstraintSet
// must outlive the solver.  run() is re-entrant, so successive objectives
// warm-start from the current basis.
class Simplex {
 public:
  Simplex(const ConstraintSet& cs, Eigen::VectorXd lower, Eigen::VectorXd upper)
      : a_(cs.a()), b_(cs.b()), n_(cs.n()), k_(cs.rows()) {
    eq_.resize(k_);
    for (int i = 0; i < k_; ++i) eq_[i] = cs.row_equality(i);
    lo_.resize(n_ + 2 * k_);
    up_.resize(n_ + 2 * k_);
    lo_.head(n_) = lower;
    up_.head(n_) = upper;
    for (int i = 0; i < k_; ++i) {
      lo_(n_ + i) = 0.0;
      up_(n_ + i) = eq_[i] ? 0.0 : kInf;  // logical
      lo_(n_ + k_ + i) = 0.0;
      up_(n_ + k_ + i) = kInf;            // artificial (pinned after phase I)
    }
    for (int j = 0; j < n_; ++j) {
      if (!std::isfinite(lo_(j))) {
        throw Error("lp: lower bounds must be finite");
      }
      if (lo_(j) > up_(j)) throw Infeasible("lp: crossing bounds");
    }
  }

  // Returns false when the relaxation is infeasible.
  bool phase_one() {
    at_upper_.assign(n_ + 2 * k_, false);
    basic_.assign(n_ + 2 * k_, false);
    basis_.resize(k_);
    art_sign_.assign(k_, 1.0);

    Eigen::VectorXd r = b_ - a_ * lo_.head(n_);
    basic_vals_.resize(k_);
    binv_ = Eigen::MatrixXd::Identity(k_, k_);
    bool any_artificial = false;
    for (int i = 0; i < k_; ++i) {
      if (!eq_[i] && r(i) >= 0.0) {
        basis_[i] = n_ + i;  // logical carries the slack
        basic_vals_(i) = r(i);
        up_(n_ + k_ + i) = 0.0;  // artificial never needed
      } else {
        art_sign_[i] = r(i) >= 0.0 ? 1.0 : -1.0;
        basis_[i] = n_ + k_ + i;
        basic_vals_(i) = std::abs(r(i));
        binv_(i, i) = art_sign_[i];
        any_artificial = true;
      }
    }
    for (int i = 0; i < k_; ++i) basic_[basis_[i]] = true;

    if (any_artificial) {
      Eigen::VectorXd cost = Eigen::VectorXd::Zero(n_ + 2 * k_);
      for (int i = 0; i < k_; ++i) {
        if (up_(n_ + k_ + i) > 0.0) cost(n_ + k_ + i) = -1.0;
      }
      run(cost);
      double infeas = 0.0;
      for (int i = 0; i < k_; ++i) {
        const int v = basis_[i];
        if (v >= n_ + k_) infeas += basic_vals_(i);
      }
      if (infeas > 1e-7 * (1.0 + (k_ > 0 ? b_.cwiseAbs().maxCoeff() : 0.0))) {
        return false;
      }
    }
    // Pin every artificial at zero for phase II.
    for (int i = 0; i < k_; ++i) up_(n_ + k_ + i) = 0.0;
    phase_one_done_ = true;
    return true;
  }

  bool ready() const { return phase_one_done_; }

  void phase_two(const Eigen::VectorXd& c) {
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(n_ + 2 * k_);
    cost.head(n_) = c;
    run(cost);
  }

  Eigen::VectorXd solution() const {
    Eigen::VectorXd x(n_);
    for (int j = 0; j < n_; ++j) {
      x(j) = at_upper_[j] ? up_(j) : lo_(j);
    }
    for (int i = 0; i < k_; ++i) {
      if (basis_[i] < n_) x(basis_[i]) = basic_vals_(i);
    }
    return x;
  }

 private:
  Eigen::VectorXd column(int j) const {
    if (j < n_) return a_.col(j);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(k_);
    if (j < n_ + k_) {
      e(j - n_) = 1.0;
    } else {
      e(j - n_ - k_) = art_sign_[j - n_ - k_];
    }
    return e;
  }

  double nonbasic_value(int j) const { return at_upper_[j] ? up_(j) : lo_(j); }

  void refactorize() {
    Eigen::MatrixXd basis_cols(k_, k_);
    for (int i = 0; i < k_; ++i) basis_cols.col(i) = column(basis_[i]);
    binv_ = basis_cols.fullPivLu().inverse();
    Eigen::VectorXd residual = b_;
    for (int j = 0; j < n_ + 2 * k_; ++j) {
      if (basic_[j]) continue;
      const double v = nonbasic_value(j);
      if (v != 0.0) residual -= v * column(j);
    }
    basic_vals_ = binv_ * residual;
  }

  void run(const Eigen::VectorXd& cost) {
    const double dual_tol = kDualTol * (1.0 + cost.cwiseAbs().maxCoeff());
    int degenerate_streak = 0;
    const long max_iter = 2000L * (n_ + 2L * k_) + 10000L;
    for (long iter = 0; iter < max_iter; ++iter) {
      if (pivots_ > 0 && pivots_ % kRefactorPeriod == 0) refactorize();
      ++pivots_;

      Eigen::VectorXd y(k_);
      {
        Eigen::VectorXd cb(k_);
        for (int i = 0; i < k_; ++i) cb(i) = cost(basis_[i]);
        y = binv_.transpose() * cb;
      }
      // Price: structural columns in one pass, then logicals/artificials.
      Eigen::VectorXd d_struct = cost.head(n_) - a_.transpose() * y;
      const bool bland = degenerate_streak >= kDegenerateLimit;
      int enter = -1;
      double best = dual_tol;
      auto consider = [&](int j, double dj) {
        if (basic_[j] || lo_(j) == up_(j)) return;
        const double improvement = at_upper_[j] ? -dj : dj;
        if (improvement <= dual_tol) return;
        if (bland) {
          if (enter == -1) enter = j;
        } else if (improvement > best) {
          best = improvement;
          enter = j;
        }
      };
      for (int j = 0; j < n_ && !(bland && enter != -1); ++j) consider(j, d_struct(j));
      for (int i = 0; i < k_ && !(bland && enter != -1); ++i) {
        consider(n_ + i, cost(n_ + i) - y(i));
      }
      for (int i = 0; i < k_ && !(bland && enter != -1); ++i) {
        const int j = n_ + k_ + i;
        consider(j, cost(j) - art_sign_[i] * y(i));
      }
      if (enter == -1) return;  // optimal

      const double dir = at_upper_[enter] ? -1.0 : 1.0;
      Eigen::VectorXd w = binv_ * column(enter);

      // Ratio test: smallest step at which a basic variable or the entering
      // variable itself hits a bound.
      double step = up_(enter) - lo_(enter);  // may be inf
      int leave_row = -1;
      bool leave_to_upper = false;
      for (int i = 0; i < k_; ++i) {
        const double coef = dir * w(i);
        const int v = basis_[i];
        double ratio;
        bool to_upper;
        if (coef > kPivotTol) {
          ratio = (basic_vals_(i) - lo_(v)) / coef;
          to_upper = false;
        } else if (coef < -kPivotTol && std::isfinite(up_(v))) {
          ratio = (basic_vals_(i) - up_(v)) / coef;
          to_upper = true;
        } else {
          continue;
        }
        if (ratio < -1e-9) ratio = 0.0;
        if (ratio < step - kPivotTol ||
            (leave_row >= 0 && ratio < step + kPivotTol && basis_[i] < basis_[leave_row])) {
          step = std::max(ratio, 0.0);
          leave_row = i;
          leave_to_upper = to_upper;
        }
      }

      if (!std::isfinite(step)) {
        std::vector<double> ray(n_, 0.0);
        if (enter < n_) ray[enter] = dir;
        for (int i = 0; i < k_; ++i) {
          if (basis_[i] < n_) ray[basis_[i]] = -dir * w(i);
        }
        throw Unbounded("lp: objective unbounded over the relaxation", std::move(ray));
      }

      degenerate_streak = step <= kPivotTol ? degenerate_streak + 1 : 0;

      basic_vals_ -= (step * dir) * w;
      if (leave_row == -1) {
        // Bound flip: entering moves across its whole range.
        at_upper_[enter] = !at_upper_[enter];
        continue;
      }
      const int leave = basis_[leave_row];
      basic_[leave] = false;
      at_upper_[leave] = leave_to_upper;
      basis_[leave_row] = enter;
      basic_[enter] = true;
      basic_vals_(leave_row) = nonbasic_value(enter) + dir * step;
      at_upper_[enter] = false;  // basic now; flag unused until it leaves

      // Elementary update of Binv: eliminate column `enter` from other rows.
      const double pivot = w(leave_row);
      binv_.row(leave_row) /= pivot;
      for (int i = 0; i < k_; ++i) {
        if (i == leave_row) continue;
        const double f = w(i);
        if (f != 0.0) binv_.row(i) -= f * binv_.row(leave_row);
      }
    }
    throw Error("lp: iteration limit exceeded");
  }

  const Eigen::MatrixXd& a_;
  const Eigen::VectorXd& b_;
  std::vector<bool> eq_;
  int n_, k_;
  Eigen::VectorXd lo_, up_;
  std::vector<double> art_sign_;
  std::vector<int> basis_;
  std::vector<bool> basic_;
  std::vector<bool> at_upper_;
  Eigen::VectorXd basic_vals_;
  Eigen::MatrixXd binv_;
  long pivots_ = 0;
  bool phase_one_done_ = false;
};

}  // namespace detail

ConstraintSet::ConstraintSet(Eigen::MatrixXd a, Eigen::VectorXd b,
                             std::vector<bool> equality, Eigen::VectorXd lower,
                             Eigen::VectorXd upper, std::vector<bool> integral)
    : a_(std::move(a)), b_(std::move(b)), equality_(std::move(equality)),
      lower_(std::move(lower)), upper_(std::move(upper)),
      integral_(std::move(integral)) {
  const int n = static_cast<int>(lower_.size());
  if (upper_.size() != n || static_cast<int>(integral_.size()) != n) {
    throw DimensionMismatch("ConstraintSet: bound/integrality length mismatch");
  }
  if (b_.size() != a_.rows() || (a_.size() != 0 && a_.cols() != n)) {
    throw DimensionMismatch("ConstraintSet: row dimensions mismatch");
  }
  if (static_cast<Eigen::Index>(equality_.size()) != b_.size()) {
    throw DimensionMismatch("ConstraintSet: equality flag count != k");
  }
  if (a_.size() == 0) a_.resize(static_cast<Eigen::Index>(b_.size()), n);
  for (int j = 0; j < n; ++j) {
    if (lower_(j) > upper_(j)) throw Infeasible("ConstraintSet: lower > upper");
  }
  if (!lp_feasible(*this, lower_, upper_)) {
    throw Infeasible("ConstraintSet: empty feasible region");
  }
}

ConstraintSet ConstraintSet::simplex(int n, double total) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Ones(1, n);
  Eigen::VectorXd b(1);
  b << total;
  return ConstraintSet(std::move(a), std::move(b), {true}, Eigen::VectorXd::Zero(n),
                       Eigen::VectorXd::Constant(n, detail::kInf),
                       std::vector<bool>(n, true));
}

ConstraintSet ConstraintSet::box(Eigen::VectorXd lower, Eigen::VectorXd upper,
                                 bool integral) {
  const int n = static_cast<int>(lower.size());
  return ConstraintSet(Eigen::MatrixXd(0, n), Eigen::VectorXd(0), {},
                       std::move(lower), std::move(upper),
                       std::vector<bool>(n, integral));
}

bool ConstraintSet::any_integral() const {
  return std::any_of(integral_.begin(), integral_.end(), [](bool f) { return f; });
}

LpSolver::LpSolver(const ConstraintSet& cs, Eigen::VectorXd lower,
                   Eigen::VectorXd upper)
    : impl_(std::make_unique<detail::Simplex>(cs, std::move(lower), std::move(upper))) {
  if (!impl_->phase_one()) {
    throw Infeasible("lp: infeasible constraint set");
  }
}

LpSolver::LpSolver(const ConstraintSet& cs) : LpSolver(cs, cs.lower(), cs.upper()) {}

LpSolver::~LpSolver() = default;
LpSolver::LpSolver(LpSolver&&) noexcept = default;
LpSolver& LpSolver::operator=(LpSolver&&) noexcept = default;

LpResult LpSolver::maximize(const Eigen::VectorXd& c) {
  impl_->phase_two(c);
  LpResult r;
  r.x = impl_->solution();
  r.value = c.dot(r.x);
  return r;
}

LpResult lp_max(const Eigen::VectorXd& c, const ConstraintSet& cs) {
  return lp_max(c, cs, cs.lower(), cs.upper());
}

LpResult lp_max(const Eigen::VectorXd& c, const ConstraintSet& cs,
                const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  if (c.size() != cs.n()) throw DimensionMismatch("lp_max: cost length != n");
  LpSolver solver(cs, lower, upper);
  return solver.maximize(c);
}

bool lp_feasible(const ConstraintSet& cs, const Eigen::VectorXd& lower,
                 const Eigen::VectorXd& upper) {
  for (int j = 0; j < cs.n(); ++j) {
    if (lower(j) > upper(j)) return false;
  }
  try {
    detail::Simplex s(cs, lower, upper);
    return s.phase_one();
  } catch (const Infeasible&) {
    return false;
  }
}

FeasibilityReport feasible(const Design& d, const ConstraintSet& cs, double tol) {
  FeasibilityReport rep;
  if (d.size() != cs.n()) throw DimensionMismatch("feasible: design length != n");
  const Eigen::VectorXd ax = cs.a() * d.weights;
  for (int i = 0; i < cs.rows(); ++i) {
    const double excess = ax(i) - cs.b()(i);
    const bool bad = cs.row_equality(i) ? std::abs(excess) > tol : excess > tol;
    if (bad) {
      std::ostringstream msg;
      msg << "row " << i << (cs.row_equality(i) ? " equality off by " : " exceeded by ")
          << excess;
      rep.violations.push_back({Violation::Kind::row, i, excess, msg.str()});
    }
  }
  for (int j = 0; j < cs.n(); ++j) {
    const double w = d.weights(j);
    if (w < cs.lower()(j) - tol || w > cs.upper()(j) + tol) {
      std::ostringstream msg;
      msg << "variable " << j << " = " << w << " outside [" << cs.lower()(j) << ", "
          << cs.upper()(j) << "]";
      rep.violations.push_back({Violation::Kind::bound, j, w, msg.str()});
    }
    if (d.integral && cs.integral(j)) {
      const double frac = std::abs(w - std::round(w));
      if (frac > tol) {
        std::ostringstream msg;
        msg << "variable " << j << " = " << w << " violates integrality";
        rep.violations.push_back({Violation::Kind::integrality, j, frac, msg.str()});
      }
    }
  }
  rep.ok = rep.violations.empty();
  return rep;
}

ConstraintSet add_symmetry_orbits(const ConstraintSet& cs,
                                  const std::vector<std::vector<int>>& orbits) {
  int extra = 0;
  for (const auto& orbit : orbits) {
    for (int idx : orbit) {
      if (idx < 0 || idx >= cs.n()) {
        throw IndexOutOfRange("add_symmetry_orbits: orbit index out of range");
      }
    }
    for (size_t i = 0; i < orbit.size(); ++i) {
      for (size_t j = i + 1; j < orbit.size(); ++j) {
        if (orbit[i] == orbit[j]) {
          throw Error("add_symmetry_orbits: repeated index within an orbit");
        }
      }
    }
    if (!orbit.empty()) extra += static_cast<int>(orbit.size()) - 1;
  }
  const int k = cs.rows();
  Eigen::MatrixXd a(k + extra, cs.n());
  a.topRows(k) = cs.a();
  Eigen::VectorXd b(k + extra);
  b.head(k) = cs.b();
  std::vector<bool> eq;
  eq.reserve(k + extra);
  for (int i = 0; i < k; ++i) eq.push_back(cs.row_equality(i));
  int r = k;
  for (const auto& orbit : orbits) {
    for (size_t j = 1; j < orbit.size(); ++j) {
      a.row(r).setZero();
      a(r, orbit[0]) = 1.0;
      a(r, orbit[j]) = -1.0;
      b(r) = 0.0;
      eq.push_back(true);
      ++r;
    }
  }
  return ConstraintSet(std::move(a), std::move(b), std::move(eq), cs.lower(),
                       cs.upper(), cs.integrality());
}

}  // namespace aqua
