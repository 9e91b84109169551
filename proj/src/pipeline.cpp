#include "aqua/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

namespace aqua {

namespace {

using nlohmann::json;

double true_criterion(const DesignProblem& p, const Criterion& c, const Design& d) {
  return phi(c, info_matrix(p, d));
}

}  // namespace

AquaOptions default_iter_inner() {
  AquaOptions opts;
  opts.bnb.gap = 1e-5;
  opts.bnb.node_cap = 100;
  opts.bnb.time_cap_seconds = 120.0;
  return opts;
}

AquaResult aqua_solve(const DesignProblem& p, const Criterion& c,
                      const ConstraintSet& cs, const AquaOptions& opts) {
  SymMatrix anchor;
  if (opts.anchor.has_value()) {
    anchor = *opts.anchor;
  } else {
    AdSolution ad = solve_ad(p, c, cs, opts.ad);
    anchor = ad.info;
  }

  QuadModel model = build_quad_model(p, c, anchor, opts.factor_tol);
  SolveReport rep = branch_and_bound(model, cs, opts.bnb);
  if (!rep.incumbent.has_value()) {
    throw Infeasible("aqua_solve: solver returned no integer feasible design");
  }

  AquaResult res;
  res.design = *rep.incumbent;
  res.criterion_value = true_criterion(p, c, res.design);
  res.surrogate_value = phi_quad_report(model, res.design);
  res.anchor_value = phi(c, anchor);
  res.efficiency_bound = efficiency(c, info_matrix(p, res.design), anchor);
  res.converged = rep.termination == Termination::optimal ||
                  rep.termination == Termination::gap_reached;
  res.report = std::move(rep);
  return res;
}

namespace {

// Step 1 of the iterative scheme: a rough anchor from a random point
// subsample.  Equality rows are relaxed to inequalities (the subsample may
// be unable to meet them) and their total mass is kept as one aggregate
// size row so the anchor has the right scale.
SymMatrix rough_anchor(const DesignProblem& p, const Criterion& c,
                       const ConstraintSet& cs, const IterOptions& opts,
                       std::mt19937_64& rng) {
  const int sample = std::min(opts.subsample_size, p.n());
  std::vector<int> idx(p.n());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(sample);
  std::sort(idx.begin(), idx.end());

  std::vector<SymMatrix> elem;
  elem.reserve(sample);
  for (int i : idx) elem.push_back(p.elem(i));
  DesignProblem sub(std::move(elem));

  double equality_mass = 0.0;
  for (int r = 0; r < cs.rows(); ++r) {
    if (cs.row_equality(r)) equality_mass += cs.b()(r);
  }
  const int extra = equality_mass > 0.0 ? 1 : 0;

  Eigen::MatrixXd a(cs.rows() + extra, sample);
  Eigen::VectorXd b(cs.rows() + extra);
  std::vector<bool> eq(cs.rows() + extra, false);
  Eigen::VectorXd lower(sample), upper(sample);
  for (int jj = 0; jj < sample; ++jj) {
    lower(jj) = cs.lower()(idx[jj]);
    upper(jj) = cs.upper()(idx[jj]);
  }
  for (int r = 0; r < cs.rows(); ++r) {
    for (int jj = 0; jj < sample; ++jj) a(r, jj) = cs.a()(r, idx[jj]);
    b(r) = cs.b()(r);
  }
  if (extra) {
    a.row(cs.rows()).setOnes();
    b(cs.rows()) = equality_mass;
    eq[cs.rows()] = true;
  }
  ConstraintSet sub_cs(std::move(a), std::move(b), std::move(eq), std::move(lower),
                       std::move(upper), std::vector<bool>(sample, false));
  AdOptions ad = opts.inner.ad;
  ad.seed = rng();
  return solve_ad(sub, c, sub_cs, ad).info;
}

SymMatrix guard_nonsingular(const SymMatrix& candidate, const SymMatrix& fallback) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(candidate.mat(),
                                                    Eigen::EigenvaluesOnly);
  const int m = candidate.order();
  const double lam_max = es.eigenvalues()(m - 1);
  if (!(lam_max > 0.0) || es.eigenvalues()(0) <= 1e-10 * lam_max) {
    return SymMatrix(0.5 * (candidate.mat() + fallback.mat()));
  }
  return candidate;
}

}  // namespace

AquaResult iterative_aqua(const DesignProblem& p, const Criterion& c,
                          const ConstraintSet& cs, const IterOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  SymMatrix anchor = opts.initial_anchor.has_value()
                         ? *opts.initial_anchor
                         : rough_anchor(p, c, cs, opts, rng);

  AquaResult best;
  bool have_best = false;
  std::vector<AquaIterate> history;

  auto closing_solve = [&](const SymMatrix& at) {
    AquaOptions inner = opts.inner;
    inner.anchor = at;
    AquaResult r = aqua_solve(p, c, cs, inner);
    history.push_back({r.design, r.criterion_value, true});
    if (!have_best || r.criterion_value > best.criterion_value) {
      best = std::move(r);
      have_best = true;
    }
  };

  bool stabilized = false;
  if (opts.relax_intermediate) {
    // Continuous surrogate iterations until the anchor stabilizes, then one
    // closing integer solve.
    Eigen::VectorXd prev;
    for (int round = 1; round < opts.max_iter; ++round) {
      QuadModel model = build_quad_model(p, c, anchor, opts.inner.factor_tol);
      QpOptions qp = opts.relaxed;
      if (prev.size() == p.n()) qp.start = prev;
      QpSolution rel = solve_relaxed_qp(model, cs, qp);
      history.push_back({rel.design, true_criterion(p, c, rel.design), false});

      const bool repeated =
          prev.size() == rel.design.weights.size() &&
          (prev - rel.design.weights).lpNorm<Eigen::Infinity>() < 1e-9;
      prev = rel.design.weights;

      SymMatrix next = guard_nonsingular(info_matrix(p, rel.design), anchor);
      const double change =
          (next.mat() - anchor.mat()).norm() / std::max(anchor.mat().norm(), 1e-300);
      anchor = next;
      if (repeated || change < 1e-9) {
        stabilized = true;
        break;
      }
    }
    closing_solve(anchor);
  } else {
    // Full integer AQuA at every step, stopping when the design repeats or
    // the anchor stabilizes.
    Eigen::VectorXd prev;
    for (int round = 1; round <= opts.max_iter; ++round) {
      AquaOptions inner = opts.inner;
      inner.anchor = anchor;
      AquaResult r = aqua_solve(p, c, cs, inner);
      history.push_back({r.design, r.criterion_value, true});
      const bool repeated =
          prev.size() == r.design.weights.size() &&
          (prev - r.design.weights).lpNorm<Eigen::Infinity>() < 0.5;
      prev = r.design.weights;
      SymMatrix next = guard_nonsingular(info_matrix(p, r.design), anchor);
      const double change =
          (next.mat() - anchor.mat()).norm() / std::max(anchor.mat().norm(), 1e-300);
      if (!have_best || r.criterion_value > best.criterion_value) {
        best = std::move(r);
        have_best = true;
      }
      anchor = next;
      if (repeated || change < 1e-9) {
        stabilized = true;
        break;
      }
    }
  }

  best.history = std::move(history);
  best.iterations = static_cast<int>(best.history.size());
  best.converged = stabilized;
  return best;
}

Eigen::VectorXi efficient_rounding(const Eigen::VectorXd& w, int n_trials) {
  const int s = static_cast<int>(w.size());
  if (s == 0) throw BadParams("efficient_rounding: empty weight vector");
  if (w.minCoeff() <= 0.0) throw BadParams("efficient_rounding: weights must be positive");
  if (n_trials < s) {
    throw TooFewTrials("efficient_rounding: N < support size s");
  }
  const double total = w.sum();
  Eigen::VectorXi n(s);
  for (int i = 0; i < s; ++i) {
    n(i) = static_cast<int>(std::ceil((n_trials - 0.5 * s) * w(i) / total - 1e-12));
    n(i) = std::max(n(i), 1);
  }
  int sum = n.sum();
  while (sum < n_trials) {
    int arg = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < s; ++i) {
      const double ratio = n(i) / w(i);
      if (ratio < best) {
        best = ratio;
        arg = i;
      }
    }
    ++n(arg);
    ++sum;
  }
  while (sum > n_trials) {
    int arg = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < s; ++i) {
      if (n(i) <= 1) continue;  // never drop a support point below one trial
      const double ratio = (n(i) - 1) / w(i);
      if (ratio > best) {
        best = ratio;
        arg = i;
      }
    }
    if (arg < 0) break;  // all at one trial; cannot shrink further
    --n(arg);
    --sum;
  }
  return n;
}

json micqp_document(const QuadModel& q, const ConstraintSet& cs) {
  if (q.n() != cs.n()) throw DimensionMismatch("micqp_document: n mismatch");
  const int n = q.n();
  const int t = q.rank;
  json doc;
  doc["schema"] = "aqua/1";
  doc["n"] = n;
  doc["t"] = t;
  doc["objective"] = {{"linear", std::vector<double>(q.h.data(), q.h.data() + n)},
                      {"aux_r", t > 0}};

  json rows = json::array();
  for (int i = 0; i < cs.rows(); ++i) {
    json row;
    row["coeffs"] = std::vector<double>(cs.a().row(i).begin(), cs.a().row(i).end());
    row["sense"] = cs.row_equality(i) ? "=" : "<=";
    row["rhs"] = cs.b()(i);
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);

  json bounds = json::array();
  for (int jv = 0; jv < n; ++jv) {
    json b;
    b["lower"] = cs.lower()(jv);
    if (std::isfinite(cs.upper()(jv))) {
      b["upper"] = cs.upper()(jv);
    } else {
      b["upper"] = nullptr;
    }
    bounds.push_back(std::move(b));
  }
  doc["bounds"] = std::move(bounds);

  std::vector<bool> integrality(n);
  for (int jv = 0; jv < n; ++jv) integrality[jv] = cs.integral(jv);
  doc["integrality"] = integrality;

  if (t > 0) {
    const double root8 = 2.0 * std::sqrt(2.0);
    json cone;
    cone["type"] = "second_order";
    cone["order"] = t + 2;
    json links;
    // 2 sqrt(2) a - 2 r = 1  and  2 sqrt(2) b + 2 r = 1.
    links["a_row"] = {{"a_coeff", root8}, {"r_coeff", -2.0}, {"rhs", 1.0}};
    links["b_row"] = {{"b_coeff", root8}, {"r_coeff", 2.0}, {"rhs", 1.0}};
    json v_rows = json::array();
    for (int col = 0; col < t; ++col) {
      // S^T xi - v = 0, one row per cone coordinate.
      json vr;
      vr["xi_coeffs"] =
          std::vector<double>(q.s.col(col).data(), q.s.col(col).data() + n);
      vr["v_index"] = col;
      vr["rhs"] = 0.0;
      v_rows.push_back(std::move(vr));
    }
    links["v_rows"] = std::move(v_rows);
    cone["links"] = std::move(links);
    doc["cone"] = std::move(cone);
  }

  json meta;
  switch (q.criterion.family) {
    case CriterionFamily::positive:
      meta["anchor_criterion"] = "positive";
      break;
    case CriterionFamily::negative:
      meta["anchor_criterion"] = "negative";
      break;
    case CriterionFamily::blend:
      meta["anchor_criterion"] = "blend";
      break;
    case CriterionFamily::logdet:
      meta["anchor_criterion"] = "logdet";
      break;
    case CriterionFamily::i_opt:
      meta["anchor_criterion"] = "I";
      break;
  }
  meta["p"] = q.criterion.p;
  if (q.criterion.family == CriterionFamily::blend) {
    meta["gamma"] = q.criterion.gamma;
  } else {
    meta["gamma"] = nullptr;
  }
  meta["a_scale"] = q.scale;
  meta["c_offset"] = q.offset;
  // The orthogonal rotation between the auxiliary-variable form and the
  // cone form, recorded as documentation.
  {
    const int d = t + 2;
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(d, d);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    v(0, 0) = inv_sqrt2;
    v(0, 1) = inv_sqrt2;
    v(1, 0) = inv_sqrt2;
    v(1, 1) = -inv_sqrt2;
    json vm = json::array();
    for (int r = 0; r < d; ++r) {
      vm.push_back(std::vector<double>(v.row(r).begin(), v.row(r).end()));
    }
    meta["V_matrix"] = std::move(vm);
  }
  doc["metadata"] = std::move(meta);
  return doc;
}

void export_micqp(const QuadModel& q, const ConstraintSet& cs, const std::string& path) {
  json doc = micqp_document(q, cs);
  std::ofstream out(path);
  if (!out) throw IoError("export_micqp: cannot open " + path);
  out << doc.dump(2) << "\n";
  if (!out) throw IoError("export_micqp: write failed for " + path);
}

}  // namespace aqua
