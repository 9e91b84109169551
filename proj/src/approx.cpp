#include "aqua/approx.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <utility>

namespace aqua {

namespace {

// Active-set atom for away steps: a sparse feasible point with its weight in
// the convex decomposition of the iterate.
struct Atom {
  std::vector<std::pair<int, double>> nz;
  double weight;
};

std::vector<std::pair<int, double>> compress(const Eigen::VectorXd& x) {
  std::vector<std::pair<int, double>> nz;
  for (int i = 0; i < x.size(); ++i) {
    if (x(i) != 0.0) nz.emplace_back(i, x(i));
  }
  return nz;
}

double sparse_dot(const Eigen::VectorXd& g, const std::vector<std::pair<int, double>>& nz) {
  double s = 0.0;
  for (const auto& [i, v] : nz) s += g(i) * v;
  return s;
}

struct FwCallbacks {
  // value and gradient at xi
  std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd&)> eval;
  // step in [0, gmax] approximately maximizing value(xi + step * d)
  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&, double)>
      line_search;
};

struct FwResult {
  Eigen::VectorXd xi;
  double value = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
};

FwResult run_frank_wolfe(const FwCallbacks& cb, const ConstraintSet& cs,
                         const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                         std::vector<Atom> active, double gap_tol, int max_iter,
                         bool away_steps) {
  const int n = cs.n();
  LpSolver lp(cs, lower, upper);  // one phase I; objectives warm-start
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(n);
  for (const auto& a : active) {
    for (const auto& [i, v] : a.nz) xi(i) += a.weight * v;
  }

  FwResult out;
  int stalls = 0;
  double gap = std::numeric_limits<double>::infinity();
  double value = 0.0;
  int iter = 0;
  bool gap_current = false;  // gap certified at the current xi

  for (; iter < max_iter; ++iter) {
    auto [f, g] = cb.eval(xi);
    value = f;

    LpResult fw = lp.maximize(g);
    gap = fw.value - g.dot(xi);
    gap_current = true;
    if (gap <= gap_tol * std::max(std::abs(f), 1e-12)) {
      out.converged = true;
      break;
    }

    // Away atom: the active point the gradient likes least.
    int away_idx = -1;
    double away_score = std::numeric_limits<double>::infinity();
    if (away_steps && active.size() > 1) {
      for (size_t a = 0; a < active.size(); ++a) {
        const double s = sparse_dot(g, active[a].nz);
        if (s < away_score) {
          away_score = s;
          away_idx = static_cast<int>(a);
        }
      }
    }
    const double gap_away =
        away_idx >= 0 ? g.dot(xi) - away_score : -std::numeric_limits<double>::infinity();

    bool stepped = false;
    if (away_idx >= 0 && gap_away > gap) {
      const Atom& va = active[away_idx];
      const double lam = va.weight;
      if (lam < 1.0) {
        Eigen::VectorXd d = xi;
        for (const auto& [i, v] : va.nz) d(i) -= v;  // d = xi - v_a
        const double gmax = std::min(lam / (1.0 - lam), 1e10);
        const double step = cb.line_search(xi, d, gmax);
        if (step > 0.0) {
          xi += step * d;
          for (auto& a : active) a.weight *= (1.0 + step);
          active[away_idx].weight -= step;
          if (active[away_idx].weight <= 1e-14) {
            active.erase(active.begin() + away_idx);
          }
          stepped = true;
        }
      }
    }
    if (!stepped) {
      Eigen::VectorXd d = fw.x - xi;
      const double step = cb.line_search(xi, d, 1.0);
      if (step > 0.0) {
        if (step >= 1.0 - 1e-12) {
          active.clear();
          active.push_back({compress(fw.x), 1.0});
          xi = fw.x;
        } else {
          for (auto& a : active) a.weight *= (1.0 - step);
          auto nz = compress(fw.x);
          bool merged = false;
          for (auto& a : active) {
            if (a.nz == nz) {
              a.weight += step;
              merged = true;
              break;
            }
          }
          if (!merged) active.push_back({std::move(nz), step});
          xi += step * d;
        }
        stepped = true;
      }
    }

    if (!stepped) {
      if (++stalls > 30) break;
    } else {
      stalls = 0;
      gap_current = false;
    }

    // Periodic exact resynchronization of the iterate with its atoms.
    if ((iter + 1) % 64 == 0 && !active.empty()) {
      double total = 0.0;
      for (const auto& a : active) total += a.weight;
      xi.setZero();
      for (auto& a : active) {
        a.weight /= total;
        for (const auto& [i, v] : a.nz) xi(i) += a.weight * v;
      }
    }
  }

  if (!gap_current) {
    auto [f, g] = cb.eval(xi);
    value = f;
    LpResult fw = lp.maximize(g);
    gap = fw.value - g.dot(xi);
    out.converged = gap <= gap_tol * std::max(std::abs(f), 1e-12);
  }
  out.xi = std::move(xi);
  out.value = value;
  out.gap = std::max(gap, 0.0);
  out.iterations = iter;
  return out;
}

double golden_section_max(const std::function<double(double)>& f, double hi, int iters) {
  const double inv_phi = 0.6180339887498949;
  double a = 0.0, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

// Shared evaluation plumbing for criterion objectives: everything flows
// through the n x s vech-row matrix so one eigendecomposition per iterate
// yields both the value and the design-space gradient.
struct CriterionOracle {
  const DesignProblem& p;
  const Criterion& c;
  Eigen::MatrixXd hmat;      // n x s
  Eigen::VectorXd dw;        // trace weights
  int ls_iters;

  CriterionOracle(const DesignProblem& p, const Criterion& c, int ls_iters)
      : p(p), c(c), hmat(p.vech_rows()), dw(vech_trace_weights(p.m())),
        ls_iters(ls_iters) {}

  SymMatrix info_of(const Eigen::VectorXd& xi) const {
    return unvech(hmat.transpose() * xi, p.m());
  }

  std::pair<double, Eigen::VectorXd> eval(const Eigen::VectorXd& xi) const {
    const SymMatrix m = info_of(xi);
    const double f = phi(c, m);
    const SymMatrix grad = phi_gradient(c, m);
    Eigen::VectorXd g = hmat * dw.cwiseProduct(vech(grad));
    return {f, std::move(g)};
  }

  double line_search(const Eigen::VectorXd& xi, const Eigen::VectorXd& d,
                     double gmax) const {
    const Eigen::MatrixXd m0 = info_of(xi).mat();
    const Eigen::MatrixXd md = info_of(d).mat();
    auto f = [&](double t) { return phi(c, SymMatrix(m0 + t * md)); };
    const double hi = std::min(gmax, 1e10);
    const double t = golden_section_max(f, hi, ls_iters);
    return f(t) > f(0.0) ? t : 0.0;
  }
};

struct QuadOracle {
  const QuadModel& q;

  std::pair<double, Eigen::VectorXd> eval(const Eigen::VectorXd& xi) const {
    if (q.rank == 0) {
      return {q.h.dot(xi), q.h};
    }
    Eigen::VectorXd v = q.s.transpose() * xi;
    const double f = q.h.dot(xi) - v.squaredNorm();
    Eigen::VectorXd g = q.h - 2.0 * (q.s * v);
    return {f, std::move(g)};
  }

  double line_search(const Eigen::VectorXd& xi, const Eigen::VectorXd& d,
                     double gmax) const {
    double slope = q.h.dot(d);
    double curv = 0.0;
    if (q.rank > 0) {
      Eigen::VectorXd sd = q.s.transpose() * d;
      slope -= 2.0 * (q.s.transpose() * xi).dot(sd);
      curv = sd.squaredNorm();
    }
    if (curv <= 0.0) return slope > 0.0 ? gmax : 0.0;
    return std::clamp(slope / (2.0 * curv), 0.0, gmax);
  }
};

}  // namespace

AdSolution solve_ad(const DesignProblem& p, const Criterion& c,
                    const ConstraintSet& cs, const AdOptions& opts) {
  if (p.n() != cs.n()) throw DimensionMismatch("solve_ad: problem/constraint n mismatch");
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Start: barycentric mix of random LP vertices, grown until the mixed
  // information matrix is nonsingular.  The constraint count alone can be
  // too small to span R^m, so the vertex count also scales with m.
  std::vector<Atom> start_atoms;
  bool found = false;
  int count = std::max(cs.rows() + 1, 2 * p.m());
  LpSolver start_lp(cs);
  for (int attempt = 0; attempt < opts.start_attempts && !found; ++attempt) {
    std::vector<Atom> atoms;
    Eigen::VectorXd mix = Eigen::VectorXd::Zero(p.n());
    for (int v = 0; v < count; ++v) {
      Eigen::VectorXd dir(p.n());
      for (int i = 0; i < p.n(); ++i) dir(i) = gauss(rng);
      LpResult vert = start_lp.maximize(dir);
      atoms.push_back({compress(vert.x), 1.0 / count});
      mix += vert.x / count;
    }
    const SymMatrix m = info_matrix(p, Design{mix, false});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.mat(), Eigen::EigenvaluesOnly);
    const double lam_max = es.eigenvalues()(p.m() - 1);
    if (lam_max > 0.0 &&
        es.eigenvalues()(0) > 1e-10 * lam_max) {
      start_atoms = std::move(atoms);
      found = true;
    }
    count += p.m();
  }
  if (!found) {
    throw SingularStart("solve_ad: no nonsingular feasible start found");
  }

  CriterionOracle oracle(p, c, opts.line_search_iters);
  FwCallbacks cb;
  cb.eval = [&](const Eigen::VectorXd& xi) { return oracle.eval(xi); };
  cb.line_search = [&](const Eigen::VectorXd& xi, const Eigen::VectorXd& d,
                       double gmax) { return oracle.line_search(xi, d, gmax); };

  FwResult fw = run_frank_wolfe(cb, cs, cs.lower(), cs.upper(), std::move(start_atoms),
                                opts.gap_tol, opts.max_iter, opts.away_steps);
  AdSolution sol;
  sol.design = Design{fw.xi, false};
  sol.info = info_matrix(p, sol.design);
  sol.value = fw.value;
  sol.gap = fw.gap;
  sol.iterations = fw.iterations;
  sol.converged = fw.converged;
  return sol;
}

QpSolution solve_relaxed_qp(const QuadModel& q, const ConstraintSet& cs,
                            const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                            const QpOptions& opts) {
  if (q.n() != cs.n()) throw DimensionMismatch("solve_relaxed_qp: n mismatch");
  std::vector<Atom> atoms;
  if (opts.start.has_value() && opts.start->size() == cs.n()) {
    Design d{*opts.start, false};
    bool in_box = true;
    for (int j = 0; j < cs.n(); ++j) {
      if ((*opts.start)(j) < lower(j) - 1e-9 || (*opts.start)(j) > upper(j) + 1e-9) {
        in_box = false;
        break;
      }
    }
    if (in_box && feasible(d, cs, 1e-9).ok) {
      atoms.push_back({compress(*opts.start), 1.0});
    }
  }
  if (atoms.empty()) {
    LpResult v = lp_max(q.h, cs, lower, upper);
    atoms.push_back({compress(v.x), 1.0});
  }

  QuadOracle oracle{q};
  FwCallbacks cb;
  cb.eval = [&](const Eigen::VectorXd& xi) { return oracle.eval(xi); };
  cb.line_search = [&](const Eigen::VectorXd& xi, const Eigen::VectorXd& d,
                       double gmax) { return oracle.line_search(xi, d, gmax); };

  FwResult fw = run_frank_wolfe(cb, cs, lower, upper, std::move(atoms), opts.gap_tol,
                                opts.max_iter, opts.away_steps);
  QpSolution sol;
  sol.design = Design{fw.xi, false};
  sol.value = fw.value;
  sol.upper_bound = fw.value + fw.gap;
  sol.iterations = fw.iterations;
  sol.converged = fw.converged;
  return sol;
}

QpSolution solve_relaxed_qp(const QuadModel& q, const ConstraintSet& cs,
                            const QpOptions& opts) {
  return solve_relaxed_qp(q, cs, cs.lower(), cs.upper(), opts);
}

double equivalence_gap(const DesignProblem& p, const Criterion& c, const Design& xi,
                       const ConstraintSet& cs) {
  const SymMatrix m = info_matrix(p, xi);
  const SymMatrix grad = phi_gradient(c, m);  // throws SingularMatrix if singular
  const Eigen::VectorXd dw = vech_trace_weights(p.m());
  Eigen::VectorXd g = p.vech_rows() * dw.cwiseProduct(vech(grad));
  LpResult best = lp_max(g, cs);
  return best.value - g.dot(xi.weights);
}

}  // namespace aqua
