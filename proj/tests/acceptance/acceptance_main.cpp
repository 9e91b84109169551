// Acceptance suite: runs the numbered criteria end to end and prints one
// pass/fail line per criterion.  `--only N` restricts to one criterion,
// `--slow` additionally runs the large mixture instance inside criterion 8.

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "aqua/cli.hpp"
#include "aqua/io.hpp"
#include "aqua/pipeline.hpp"
#include "aqua/scenarios.hpp"

using namespace aqua;

namespace {

struct Check {
  bool ok = true;
  std::vector<std::string> failures;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      failures.push_back(what);
    }
  }
};

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) m(i, j) = g(rng);
  }
  return m;
}

SymMatrix random_spd(std::mt19937_64& rng, int m) {
  Eigen::MatrixXd r = random_matrix(rng, m, m);
  return SymMatrix(r * r.transpose() + 0.5 * Eigen::MatrixXd::Identity(m, m));
}

SymMatrix spring_anchor_d(double n_trials) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(6, 6, 2.0 * n_trials / 7.0);
  m.diagonal().setConstant(4.0 * n_trials / 7.0);
  return SymMatrix(std::move(m));
}

SymMatrix spring_anchor_a(double n_trials) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(6, 6, 0.2 * n_trials);
  m.diagonal().setConstant(0.5 * n_trials);
  return SymMatrix(std::move(m));
}

void enumerate_simplex(int n, int total,
                       const std::function<void(const Eigen::VectorXd&)>& visit) {
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(n);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == n - 1) {
      xi(pos) = left;
      visit(xi);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      xi(pos) = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, total);
}

BnbOptions fast_bnb() {
  BnbOptions opts;
  opts.gap = 1e-6;
  opts.node_cap = 4000;
  opts.time_cap_seconds = 50.0;
  return opts;
}

// aqua_solve with a fixed anchor; reports true-criterion efficiency against
// the exact optimal matrix, which is the paper's measuring stick.
double spring_efficiency(const DesignProblem& p, const Criterion& c, double n_trials,
                         const SymMatrix& anchor, const SymMatrix& exact) {
  AquaOptions opts;
  opts.anchor = anchor;
  opts.bnb = fast_bnb();
  AquaResult res = aqua_solve(p, c, ConstraintSet::simplex(64, n_trials), opts);
  return efficiency(c, info_matrix(p, res.design), exact);
}

// --- criterion 1 ---------------------------------------------------------
void criterion_1(Check& out) {
  DesignProblem p = spring_balance_problem(6);
  {
    const double t0 = now_seconds();
    AdSolution sol =
        solve_ad(p, Criterion::positive(0), ConstraintSet::simplex(64, 7.0), {});
    const double dt = now_seconds() - t0;
    const SymMatrix want = spring_anchor_d(7.0);
    const double rel = (sol.info.mat() - want.mat()).norm() / want.mat().norm();
    out.require(rel < 1e-3, "D anchor off by " + std::to_string(rel));
    out.require(dt <= 10.0, "D anchor took " + std::to_string(dt) + " s");
  }
  {
    const double t0 = now_seconds();
    AdSolution sol =
        solve_ad(p, Criterion::positive(1), ConstraintSet::simplex(64, 10.0), {});
    const double dt = now_seconds() - t0;
    const SymMatrix want = spring_anchor_a(10.0);
    const double rel = (sol.info.mat() - want.mat()).norm() / want.mat().norm();
    out.require(rel < 1e-3, "A anchor off by " + std::to_string(rel));
    out.require(dt <= 10.0, "A anchor took " + std::to_string(dt) + " s");
  }
}

// --- criterion 2 ---------------------------------------------------------
void criterion_2(Check& out) {
  DesignProblem p = spring_balance_problem(6);
  for (double n_trials : {7.0, 14.0, 21.0, 28.0}) {
    const double t0 = now_seconds();
    const double eff = spring_efficiency(p, Criterion::positive(0), n_trials,
                                         spring_anchor_d(n_trials),
                                         spring_anchor_d(n_trials));
    const double dt = now_seconds() - t0;
    std::ostringstream what;
    what << "D N=" << n_trials << " efficiency " << eff << " (" << dt << " s)";
    out.require(std::abs(eff - 1.0) <= 1e-6, what.str());
    out.require(dt <= 60.0, what.str() + " over 60 s");
  }
  for (double n_trials : {10.0, 20.0, 30.0}) {
    const double t0 = now_seconds();
    const double eff = spring_efficiency(p, Criterion::positive(1), n_trials,
                                         spring_anchor_a(n_trials),
                                         spring_anchor_a(n_trials));
    const double dt = now_seconds() - t0;
    std::ostringstream what;
    what << "A N=" << n_trials << " efficiency " << eff << " (" << dt << " s)";
    out.require(std::abs(eff - 1.0) <= 1e-6, what.str());
    out.require(dt <= 60.0, what.str() + " over 60 s");
  }
}

// --- criteria 3 and 4 ----------------------------------------------------
// Efficiency here follows the paper's benchmark: the found design's
// criterion value relative to the best exact design, with the reference
// produced by an independent multistart exchange search on the true
// criterion (the derived KL cross-check).
double best_ed_value(const DesignProblem& p, const Criterion& c, int n_trials,
                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, p.n() - 1);
  double best = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 80; ++trial) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(p.n());
    for (int t = 0; t < n_trials; ++t) w(pick(rng)) += 1.0;
    double cur = phi(c, info_matrix(p, Design{w, false}));
    bool improved = true;
    while (improved) {
      improved = false;
      for (int l = 0; l < p.n(); ++l) {
        for (int k = 0; k < p.n(); ++k) {
          if (l == k || w(k) < 1.0) continue;
          w(l) += 1.0;
          w(k) -= 1.0;
          const double f = phi(c, info_matrix(p, Design{w, false}));
          if (f > cur + 1e-12) {
            cur = f;
            improved = true;
          } else {
            w(l) -= 1.0;
            w(k) += 1.0;
          }
        }
      }
    }
    best = std::max(best, cur);
  }
  return best;
}

struct SpringSweep {
  // Ratio of the aqua design's criterion value to the exchange benchmark,
  // plus the benchmark itself (anchor-relative), indexed by N - 8.
  std::vector<double> d_ratio, a_ratio;
  std::vector<double> d_best, a_best;
};

SpringSweep& spring_sweep() {
  static SpringSweep sweep = [] {
    SpringSweep s;
    DesignProblem p = spring_balance_problem(6);
    for (int n_trials = 8; n_trials <= 30; ++n_trials) {
      const double d_aqua =
          spring_efficiency(p, Criterion::positive(0), n_trials,
                            spring_anchor_d(n_trials), spring_anchor_d(n_trials));
      const double d_best =
          best_ed_value(p, Criterion::positive(0), n_trials, 300 + n_trials) /
          phi(Criterion::positive(0), spring_anchor_d(n_trials));
      s.d_ratio.push_back(d_aqua / d_best);
      s.d_best.push_back(d_best);
      const double a_aqua =
          spring_efficiency(p, Criterion::positive(1), n_trials,
                            spring_anchor_a(n_trials), spring_anchor_a(n_trials));
      const double a_best =
          best_ed_value(p, Criterion::positive(1), n_trials, 600 + n_trials) /
          phi(Criterion::positive(1), spring_anchor_a(n_trials));
      s.a_ratio.push_back(a_aqua / a_best);
      s.a_best.push_back(a_best);
    }
    return s;
  }();
  return sweep;
}

void criterion_3(Check& out) {
  const SpringSweep& s = spring_sweep();
  for (int n_trials = 8; n_trials <= 30; ++n_trials) {
    std::ostringstream what;
    what << "D N=" << n_trials << " efficiency " << s.d_ratio[n_trials - 8];
    out.require(s.d_ratio[n_trials - 8] >= 0.98, what.str());
    std::ostringstream what2;
    what2 << "A N=" << n_trials << " efficiency " << s.a_ratio[n_trials - 8];
    out.require(s.a_ratio[n_trials - 8] >= 0.98, what2.str());
  }
}

// A perturbed anchor with AD-efficiency 0.95 +- 0.005, built by mixing the
// exact matrix toward a random feasible design's matrix.
SymMatrix perturbed_anchor(const DesignProblem& p, const Criterion& c,
                           const SymMatrix& exact, double n_trials,
                           std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 50; ++attempt) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(p.n());
    std::uniform_int_distribution<int> pick(0, p.n() - 1);
    for (int t = 0; t < static_cast<int>(n_trials); ++t) w(pick(rng)) += 1.0;
    const SymMatrix m_rand = info_matrix(p, Design{w, true});
    auto mixed_at = [&](double alpha) {
      return SymMatrix(
          Eigen::MatrixXd((1.0 - alpha) * exact.mat() + alpha * m_rand.mat()));
    };
    auto eff_at = [&](double alpha) { return efficiency(c, mixed_at(alpha), exact); };
    if (eff_at(1.0) > 0.945) continue;  // not poor enough to bracket 0.95
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (eff_at(mid) > 0.95) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double alpha = 0.5 * (lo + hi);
    if (std::abs(eff_at(alpha) - 0.95) <= 0.005) return mixed_at(alpha);
  }
  throw Error("perturbed_anchor: bracketing failed");
}

void criterion_4(Check& out) {
  const SpringSweep& s = spring_sweep();
  DesignProblem p = spring_balance_problem(6);
  std::mt19937_64 rng(404);
  for (int n_trials = 8; n_trials <= 30; ++n_trials) {
    {
      const SymMatrix exact = spring_anchor_d(n_trials);
      const SymMatrix tilde =
          perturbed_anchor(p, Criterion::positive(0), exact, n_trials, rng);
      const double eff_ad =
          spring_efficiency(p, Criterion::positive(0), n_trials, tilde, exact);
      const double ratio = eff_ad / s.d_best[n_trials - 8];
      std::ostringstream what;
      what << "D N=" << n_trials << " perturbed efficiency " << ratio << " vs "
           << s.d_ratio[n_trials - 8];
      out.require(ratio >= s.d_ratio[n_trials - 8] - 0.02, what.str());
    }
    {
      const SymMatrix exact = spring_anchor_a(n_trials);
      const SymMatrix tilde =
          perturbed_anchor(p, Criterion::positive(1), exact, n_trials, rng);
      const double eff_ad =
          spring_efficiency(p, Criterion::positive(1), n_trials, tilde, exact);
      const double ratio = eff_ad / s.a_best[n_trials - 8];
      std::ostringstream what;
      what << "A N=" << n_trials << " perturbed efficiency " << ratio << " vs "
           << s.a_ratio[n_trials - 8];
      out.require(ratio >= s.a_ratio[n_trials - 8] - 0.02, what.str());
    }
  }
}

// --- criterion 5 ---------------------------------------------------------
void criterion_5(Check& out) {
  std::mt19937_64 rng(505);
  std::uniform_int_distribution<int> mdist(1, 4), ndist(2, 30), pdist(0, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = mdist(rng);
    const int n = std::max(ndist(rng), m);
    const int pp = pdist(rng);
    DesignProblem prob = from_regressors(random_matrix(rng, n, m));
    SymMatrix mstar = random_spd(rng, m);
    const Criterion c =
        trial % 2 == 0 ? Criterion::positive(pp) : Criterion::negative(pp);
    QuadModel q = build_quad_model(prob, c, mstar);

    Eigen::MatrixXd qm(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) qm(i, j) = q_entry(prob, c, mstar, i, j);
    }
    const double hmax = q.h.cwiseAbs().maxCoeff();
    for (int probe = 0; probe < 20; ++probe) {
      Eigen::VectorXd xi = random_matrix(rng, n, 1).cwiseAbs();
      const double dense = xi.dot(qm * xi);
      const double lowrank = (q.s.transpose() * xi).squaredNorm();
      // The entry formulas cancel O(h^2)-sized terms; a zero quadratic part
      // legitimately carries roundoff of that magnitude.
      const double term_scale = xi.lpNorm<1>() * hmax;
      const double tol = 1e-8 * std::max(std::abs(dense), std::abs(lowrank)) +
                         1e-12 * term_scale * term_scale;
      out.require(std::abs(dense - lowrank) <= tol,
                  "quadratic-form mismatch " + std::to_string(std::abs(dense - lowrank)));
    }

    // Exchange deltas against recomputation over a thousand moves.
    if (trial == 0) {
      ExchangeState st =
          make_exchange_state(q, Design{Eigen::VectorXd::Constant(n, 2.0), true});
      std::uniform_int_distribution<int> pick(0, n - 1);
      for (int move = 0; move < 1000; ++move) {
        const int l = pick(rng);
        int k = pick(rng);
        while (st.xi(k) < 1.0) k = pick(rng);
        const double before = phi_quad(q, Design{st.xi, false});
        const double delta = exchange_delta(st, l, k);
        const double after = phi_quad(q, Design{st.xi, false});
        out.require(std::abs(delta - (after - before)) <=
                        1e-10 * std::max(1.0, std::abs(after)),
                    "exchange delta mismatch");
      }
    }
  }
}

// --- criterion 6 ---------------------------------------------------------
void criterion_6(Check& out) {
  std::mt19937_64 rng(606);
  std::vector<Criterion> crits;
  for (int pp = 0; pp <= 3; ++pp) {
    crits.push_back(Criterion::positive(pp));
    crits.push_back(Criterion::negative(pp));
    for (double gamma : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
      crits.push_back(Criterion::blend(pp, gamma));
    }
  }
  const double eps = 1e-3;
  for (const auto& c : crits) {
    DesignProblem p = from_regressors(random_matrix(rng, 10, 3));
    Eigen::VectorXd w = Eigen::VectorXd::Ones(10);
    const SymMatrix mstar = info_matrix(p, Design{w, false});
    QuadModel q = build_quad_model(p, c, mstar);

    const double value = phi_quad_report(q, Design{w, false});
    const double exact = phi(c, mstar);
    out.require(std::abs(value - exact) <= 1e-9 * std::max(1.0, std::abs(exact)),
                "anchor value mismatch");

    const SymMatrix grad = phi_gradient(c, mstar);
    const Eigen::VectorXd sv = q.s.transpose() * w;
    for (int i = 0; i < p.n(); ++i) {
      const double model_grad =
          q.scale * (q.h(i) - 2.0 * (q.rank > 0 ? q.s.row(i).dot(sv) : 0.0));
      const double true_grad = (grad.mat() * p.elem(i).mat()).trace();
      out.require(std::abs(model_grad - true_grad) <=
                      1e-7 * std::max(1.0, std::abs(true_grad)),
                  "anchor gradient mismatch");
    }

    for (int trial = 0; trial < 4; ++trial) {
      Eigen::VectorXd delta = random_matrix(rng, 10, 1);
      const SymMatrix mdelta = info_matrix(p, Design{delta, false});
      const double second_diff =
          (phi(c, SymMatrix(mstar.mat() + eps * mdelta.mat())) - 2.0 * phi(c, mstar) +
           phi(c, SymMatrix(mstar.mat() - eps * mdelta.mat()))) /
          (eps * eps);
      const double model_curv =
          -2.0 * q.scale * (q.s.transpose() * delta).squaredNorm();
      if (std::abs(second_diff) > 1e-7) {
        out.require(std::abs(model_curv - second_diff) <= 5e-4 * std::abs(second_diff),
                    "curvature mismatch");
      }
    }
  }
}

// --- criterion 7 ---------------------------------------------------------
void criterion_7(Check& out) {
  const double t0 = now_seconds();
  std::mt19937_64 rng(707);
  std::uniform_int_distribution<int> ndist(3, 6), totdist(2, 4), pdist(0, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = ndist(rng);
    const int m = 2;
    const int total = totdist(rng);
    DesignProblem p = from_regressors(random_matrix(rng, n, m));
    SymMatrix mstar = random_spd(rng, m);
    const Criterion c = trial % 2 == 0 ? Criterion::positive(pdist(rng))
                                       : Criterion::negative(pdist(rng));
    QuadModel q = build_quad_model(p, c, mstar);

    if (trial == 19) {
      // The binary-box variant.
      Eigen::MatrixXd a = Eigen::MatrixXd::Ones(1, n);
      ConstraintSet cs(a, Eigen::VectorXd::Constant(1, static_cast<double>(total)),
                       {false}, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n),
                       std::vector<bool>(n, true));
      SolveReport rep = branch_and_bound(q, cs, {});
      double best = -1e300;
      std::function<void(int, Eigen::VectorXd&)> rec =
          [&](int pos, Eigen::VectorXd& xi) {
            if (pos == n) {
              if (xi.sum() <= total + 1e-9) {
                best = std::max(best, phi_quad(q, Design{xi, false}));
              }
              return;
            }
            for (int v = 0; v <= 1; ++v) {
              xi(pos) = v;
              rec(pos + 1, xi);
            }
          };
      Eigen::VectorXd xi = Eigen::VectorXd::Zero(n);
      rec(0, xi);
      out.require(rep.incumbent.has_value() &&
                      std::abs(rep.incumbent_phi - best) <=
                          1e-9 * std::max(1.0, std::abs(best)),
                  "binary-box incumbent not the exhaustive maximum");
    } else {
      ConstraintSet cs = ConstraintSet::simplex(n, total);
      SolveReport rep = branch_and_bound(q, cs, {});
      double best = -1e300;
      enumerate_simplex(n, total, [&](const Eigen::VectorXd& xi) {
        best = std::max(best, phi_quad(q, Design{xi, false}));
      });
      out.require(rep.incumbent.has_value() &&
                      std::abs(rep.incumbent_phi - best) <=
                          1e-9 * std::max(1.0, std::abs(best)),
                  "incumbent not the exhaustive maximum");
    }
  }
  const double dt = now_seconds() - t0;
  out.require(dt <= 60.0, "criterion 7 suite took " + std::to_string(dt) + " s");
}

// --- criterion 8 ---------------------------------------------------------
void run_scheffe_case(Check& out, double step, double total, bool i_criterion,
                      double time_budget) {
  const double t0 = now_seconds();
  DesignProblem p = scheffe_problem(step);
  ConstraintSet cs = with_size_row(scheffe_constraints(p, step, true), total);
  const Criterion c =
      i_criterion ? Criterion::i_opt(default_i_region(p)) : Criterion::positive(0);
  AquaOptions opts;
  opts.bnb = fast_bnb();
  opts.bnb.gap = 1e-4;
  opts.bnb.time_cap_seconds = 0.7 * time_budget;
  AquaResult res = aqua_solve(p, c, cs, opts);
  const double dt = now_seconds() - t0;

  std::ostringstream tag;
  tag << "scheffe(" << step << ") " << (i_criterion ? "I" : "D");
  out.require(feasible(res.design, cs, 1e-6).ok, tag.str() + ": infeasible output");
  out.require(res.design.integral, tag.str() + ": non-integral output");
  for (const auto& orbit : scheffe_orbits(p)) {
    for (size_t j = 1; j < orbit.size(); ++j) {
      out.require(
          std::abs(res.design.weights(orbit[0]) - res.design.weights(orbit[j])) < 1e-9,
          tag.str() + ": output not orbit-symmetric");
    }
  }
  out.require(res.report.gap <= 0.02,
              tag.str() + ": surrogate gap " + std::to_string(res.report.gap));
  out.require(dt <= time_budget,
              tag.str() + " took " + std::to_string(dt) + " s");
}

void criterion_8(Check& out, bool slow) {
  run_scheffe_case(out, 0.1, 6.0, false, 300.0);
  run_scheffe_case(out, 0.1, 6.0, true, 300.0);
  if (slow) {
    run_scheffe_case(out, 0.025, 15.0, false, 1500.0);
    run_scheffe_case(out, 0.025, 15.0, true, 1500.0);
  }
}

// --- criterion 9 ---------------------------------------------------------
void criterion_9(Check& out) {
  std::mt19937_64 rng(909);
  std::uniform_int_distribution<int> ndist(8, 16), mdist(2, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = ndist(rng);
    const int m = mdist(rng);
    DesignProblem p = from_regressors(random_matrix(rng, n, m));
    SymMatrix l = random_spd(rng, m);
    DesignProblem tp = i_to_a(p, l);

    Eigen::VectorXd w = Eigen::VectorXd::Ones(n) + random_matrix(rng, n, 1).cwiseAbs();
    const SymMatrix mm = info_matrix(p, Design{w, false});
    const SymMatrix mt = info_matrix(tp, Design{w, false});
    const double phi_i = phi(Criterion::i_opt(l), mm);
    const double phi_a = m * phi(Criterion::negative(1), mt);
    out.require(std::abs(phi_i - phi_a) <= 1e-9 * std::abs(phi_i),
                "transform identity violated");

    if (trial < 5) {
      ConstraintSet cs = ConstraintSet::simplex(n, 6.0);
      AdOptions ad;
      ad.gap_tol = 1e-9;
      ad.max_iter = 20000;
      ad.seed = trial + 1;
      AdSolution sol = solve_ad(tp, Criterion::positive(1), cs, ad);
      const double gap = equivalence_gap(p, Criterion::i_opt(l), sol.design, cs);
      out.require(gap <= 1e-5, "I-gap " + std::to_string(gap) + " above 1e-5");
    }
  }
}

// --- criterion 10 --------------------------------------------------------
void criterion_10(Check& out) {
  SyntheticTallParams params;
  params.n = 20000;
  params.m = 3;
  params.strata = 40;
  params.seed = 17;
  SyntheticTall st = synthetic_tall(params);

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double t0 = now_seconds();
    IterOptions opts;
    opts.seed = seed;
    opts.subsample_size = 1500;
    opts.max_iter = 10;
    opts.relax_intermediate = true;
    opts.relaxed.gap_tol = 1e-7;
    opts.inner.bnb.gap = 1e-5;
    opts.inner.bnb.node_cap = 60;
    opts.inner.bnb.time_cap_seconds = 60.0;
    AquaResult res =
        iterative_aqua(st.problem, Criterion::positive(0), st.constraints, opts);
    const double dt = now_seconds() - t0;

    std::ostringstream tag;
    tag << "seed " << seed;
    out.require(res.iterations <= 6,
                tag.str() + ": " + std::to_string(res.iterations) + " iterations");
    out.require(res.design.integral, tag.str() + ": non-integral design");
    FeasibilityReport rep = feasible(res.design, st.constraints, 1e-6);
    out.require(rep.ok, tag.str() + ": constraint violation");
    out.require(dt <= 120.0, tag.str() + " took " + std::to_string(dt) + " s");
  }
}

// --- criterion 11 --------------------------------------------------------
void criterion_11(Check& out) {
  std::mt19937_64 rng(1111);
  DesignProblem p = from_regressors(random_matrix(rng, 12, 3));
  SymMatrix mstar = random_spd(rng, 3);
  QuadModel q = build_quad_model(p, Criterion::negative(1), mstar);
  ConstraintSet cs = ConstraintSet::simplex(12, 5.0);

  const std::string path = "/tmp/aqua_acceptance_micqp.json";
  export_micqp(q, cs, path);
  std::ifstream in(path);
  nlohmann::json doc;
  in >> doc;

  // Schema validation.
  out.require(doc.value("schema", "") == "aqua/1", "schema tag missing");
  out.require(doc.at("n") == 12, "n mismatch");
  out.require(doc.at("t") == q.rank, "t mismatch");
  out.require(doc.at("objective").at("linear").size() == 12, "objective length");
  out.require(doc.at("objective").at("aux_r") == (q.rank > 0), "aux_r flag");
  out.require(doc.at("rows").is_array() && doc.at("rows").size() == 1, "rows block");
  out.require(doc.at("rows")[0].at("sense") == "=", "size row sense");
  out.require(doc.at("bounds").size() == 12, "bounds length");
  out.require(doc.at("integrality").size() == 12, "integrality length");
  out.require(doc.at("cone").at("type") == "second_order", "cone type");
  out.require(doc.at("cone").at("order") == q.rank + 2, "cone order");
  out.require(
      doc.at("cone").at("links").at("v_rows").size() == static_cast<size_t>(q.rank),
      "v_rows count");
  out.require(doc.at("metadata").contains("V_matrix"), "V matrix metadata");
  out.require(doc.at("metadata").at("a_scale").get<double>() == q.scale, "a_scale");

  // Round trip: the document alone reproduces phi on random integer designs.
  const auto h = doc.at("objective").at("linear").get<std::vector<double>>();
  const auto& links = doc.at("cone").at("links");
  std::uniform_int_distribution<int> wdist(0, 3);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd xi(12);
    for (int j = 0; j < 12; ++j) xi(j) = wdist(rng);
    Eigen::VectorXd v(q.rank);
    for (int col = 0; col < q.rank; ++col) {
      const auto coeffs =
          links.at("v_rows")[col].at("xi_coeffs").get<std::vector<double>>();
      double s = 0.0;
      for (int j = 0; j < 12; ++j) s += coeffs[j] * xi(j);
      v(col) = s;
    }
    const double r = v.squaredNorm();
    const double a_val = (links.at("a_row").at("rhs").get<double>() -
                          links.at("a_row").at("r_coeff").get<double>() * r) /
                         links.at("a_row").at("a_coeff").get<double>();
    const double b_val = (links.at("b_row").at("rhs").get<double>() -
                          links.at("b_row").at("r_coeff").get<double>() * r) /
                         links.at("b_row").at("b_coeff").get<double>();
    const double cone_resid = a_val * a_val - b_val * b_val - v.squaredNorm();
    out.require(std::abs(cone_resid) <= 1e-9 * std::max(1.0, r), "cone residual");
    out.require(a_val >= 0.0, "cone apex sign");
    double lin = 0.0;
    for (int j = 0; j < 12; ++j) lin += h[j] * xi(j);
    const double phi_val = phi_quad(q, Design{xi, false});
    out.require(std::abs(lin - r - phi_val) <= 1e-9 * std::max(1.0, std::abs(phi_val)),
                "objective mismatch");
  }
  std::remove(path.c_str());
}

// --- criterion 12 --------------------------------------------------------
void criterion_12(Check& out) {
  std::mt19937_64 rng(1212);
  std::uniform_int_distribution<int> sdist(1, 15);
  std::uniform_real_distribution<double> wdist(0.01, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int s = sdist(rng);
    Eigen::VectorXd w(s);
    for (int i = 0; i < s; ++i) w(i) = wdist(rng);
    const int total = s + static_cast<int>(rng() % 50);
    Eigen::VectorXi n = efficient_rounding(w, total);
    out.require(n.sum() == total, "ER sum violated");
    out.require(n.minCoeff() >= 1, "ER minimum violated");
  }

  // Table-1 AD at N = 35: support 7, succeeds and splits evenly.
  Eigen::VectorXd table1 = Eigen::VectorXd::Constant(7, 5.0);
  Eigen::VectorXi r35 = efficient_rounding(table1, 35);
  out.require(r35.sum() == 35 && r35.minCoeff() == 5 && r35.maxCoeff() == 5,
              "Table-1 rounding at N=35");

  // The D-optimal neighbor-vertex AD has 35 support points: ER fails below 35.
  Design nv = neighbor_vertex_design(6, 24.0 / 7.0, 30.0);
  std::vector<double> support;
  for (int i = 0; i < nv.size(); ++i) {
    if (nv.weights(i) > 0.0) support.push_back(nv.weights(i));
  }
  out.require(support.size() == 35, "neighbor-vertex support size");
  Eigen::VectorXd w = Eigen::Map<Eigen::VectorXd>(support.data(), support.size());
  for (int total : {7, 20, 34}) {
    bool threw = false;
    try {
      efficient_rounding(w, total);
    } catch (const TooFewTrials&) {
      threw = true;
    }
    out.require(threw, "ER accepted N=" + std::to_string(total) + " < 35");
  }
  Eigen::VectorXi ok = efficient_rounding(w, 35);
  out.require(ok.sum() == 35 && ok.minCoeff() == 1, "ER at N=35 on support 35");
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  bool slow = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (std::strcmp(argv[i], "--slow") == 0) {
      slow = true;
    } else {
      std::cerr << "usage: acceptance_tests [--only N] [--slow]\n";
      return 64;
    }
  }

  std::vector<std::pair<int, std::function<void(Check&)>>> criteria = {
      {1, criterion_1},
      {2, criterion_2},
      {3, criterion_3},
      {4, criterion_4},
      {5, criterion_5},
      {6, criterion_6},
      {7, criterion_7},
      {8, [&](Check& c) { criterion_8(c, slow); }},
      {9, criterion_9},
      {10, criterion_10},
      {11, criterion_11},
      {12, criterion_12},
  };

  int failures = 0;
  for (const auto& [num, fn] : criteria) {
    if (only != 0 && num != only) continue;
    Check check;
    const double t0 = now_seconds();
    try {
      fn(check);
    } catch (const std::exception& e) {
      check.require(false, std::string("exception: ") + e.what());
    }
    const double dt = now_seconds() - t0;
    std::printf("[%s] criterion %2d  (%.1f s)\n", check.ok ? "PASS" : "FAIL", num, dt);
    if (!check.ok) {
      ++failures;
      for (const auto& f : check.failures) {
        std::printf("       - %s\n", f.c_str());
      }
    }
    std::fflush(stdout);
  }
  return failures;
}
