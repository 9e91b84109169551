#include "aqua/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "aqua/io.hpp"
#include "aqua/pipeline.hpp"
#include "aqua/scenarios.hpp"

namespace aqua {

namespace {

using nlohmann::json;

struct CommonArgs {
  std::string model;
  std::string constraints;
  std::string criterion = "D";
  int p = -1;  // -1: derive from the criterion letter
  double gamma = 0.0;
  std::string version = "pos";
  double size_n = -1.0;  // --N sugar
  double gap = 1e-6;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out;
  std::string points_csv;
  std::string anchor;
  long node_cap = 100000;
  double time_cap = 0.0;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool needs_model) {
  auto* model = cmd->add_option("--model", a.model, "model CSV path");
  if (needs_model) model->required();
  cmd->add_option("--constraints", a.constraints, "constraint JSON path");
  cmd->add_option("--criterion", a.criterion, "criterion letter {D|A|I}")
      ->check(CLI::IsMember({"D", "A", "I"}));
  cmd->add_option("--p", a.p, "Kiefer parameter p (overrides the letter)");
  cmd->add_option("--gamma", a.gamma, "blend parameter in [-1, 1]");
  cmd->add_option("--version", a.version, "criterion version {pos|neg|blend|logdet}")
      ->check(CLI::IsMember({"pos", "neg", "blend", "logdet"}));
  cmd->add_option("--N", a.size_n, "adds the size row 1'xi = N");
  cmd->add_option("--gap", a.gap, "relative optimality gap");
  cmd->add_option("--seed", a.seed, "random seed");
  cmd->add_option("--threads", a.threads, "solver threads");
  cmd->add_option("--out", a.out, "output JSON path");
  cmd->add_option("--points-csv", a.points_csv, "CSV of selected points");
  cmd->add_option("--anchor", a.anchor, "anchor JSON (matrix or design document)");
  cmd->add_option("--node-cap", a.node_cap, "branch-and-bound node cap");
  cmd->add_option("--time-cap", a.time_cap, "branch-and-bound time cap, seconds");
}

Criterion resolve_criterion(const CommonArgs& a, const DesignProblem& p) {
  if (a.criterion == "I") {
    return Criterion::i_opt(default_i_region(p));
  }
  int pp = a.criterion == "A" ? 1 : 0;
  if (a.p >= 0) pp = a.p;
  if (a.version == "pos") return Criterion::positive(pp);
  if (a.version == "neg") return Criterion::negative(pp);
  if (a.version == "blend") return Criterion::blend(pp, a.gamma);
  return Criterion::logdet();
}

ConstraintSet resolve_constraints(const CommonArgs& a, int n) {
  std::optional<ConstraintSet> cs;
  if (!a.constraints.empty()) {
    cs = read_constraints_json(a.constraints);
    if (cs->n() != n) {
      throw ParseError("constraint file dimension " + std::to_string(cs->n()) +
                       " != model size " + std::to_string(n));
    }
  }
  if (a.size_n >= 0.0) {
    if (!cs.has_value()) {
      cs = ConstraintSet::simplex(n, a.size_n);
    } else {
      cs = with_size_row(*cs, a.size_n);
    }
  }
  if (!cs.has_value()) {
    throw BadParams("no constraints: pass --constraints and/or --N");
  }
  return std::move(*cs);
}

void emit_design(const CommonArgs& a, const DesignProblem& p, const DesignDocument& doc) {
  if (!a.out.empty()) {
    write_design_json(a.out, doc);
  } else {
    json j;
    j["weights"] = std::vector<double>(doc.design.weights.begin(), doc.design.weights.end());
    if (doc.criterion_value) j["criterion_value"] = *doc.criterion_value;
    if (doc.efficiency_bound) j["efficiency_bound"] = *doc.efficiency_bound;
    std::cout << j.dump(2) << "\n";
  }
  if (!a.points_csv.empty()) write_points_csv(a.points_csv, p, doc.design);
}

int cmd_approx(const CommonArgs& a) {
  DesignProblem p = read_model_csv(a.model);
  Criterion c = resolve_criterion(a, p);
  ConstraintSet cs = resolve_constraints(a, p.n());
  AdOptions opts;
  opts.seed = a.seed;
  opts.gap_tol = a.gap;
  AdSolution sol = solve_ad(p, c, cs, opts);
  DesignDocument doc;
  doc.design = sol.design;
  doc.labels = p.labels();
  doc.criterion_value = sol.value;
  doc.report = {{"gap", sol.gap},
                {"iterations", sol.iterations},
                {"converged", sol.converged}};
  emit_design(a, p, doc);
  return 0;
}

struct IterFlagSet {
  bool gap = false;
  bool node_cap = false;
  bool time_cap = false;
};

int cmd_exact(const CommonArgs& a, bool iterative, int subsample, int max_iter,
              bool relax_intermediate, const IterFlagSet& set = {}) {
  DesignProblem p = read_model_csv(a.model);
  Criterion c = resolve_criterion(a, p);
  ConstraintSet cs = resolve_constraints(a, p.n());
  if (a.size_n >= 0.0 && a.size_n <= p.m()) {
    std::cerr << "warning: N <= m; the surrogate can be significantly suboptimal "
                 "for such small sizes\n";
  }

  AquaOptions opts;
  opts.ad.seed = a.seed;
  opts.bnb.gap = a.gap;
  opts.bnb.node_cap = a.node_cap;
  opts.bnb.time_cap_seconds = a.time_cap;
  opts.bnb.threads = a.threads;
  if (!a.anchor.empty()) opts.anchor = read_anchor_json(a.anchor, p);

  AquaResult res;
  if (iterative) {
    IterOptions it;
    it.subsample_size = subsample;
    it.max_iter = max_iter;
    it.relax_intermediate = relax_intermediate;
    it.seed = a.seed;
    // Inner solves keep their budgeted defaults unless the caps were set
    // explicitly; full-rigor caps would dominate the iteration loop.
    it.inner.ad.seed = a.seed;
    it.inner.anchor = opts.anchor;
    it.inner.bnb.threads = a.threads;
    if (set.gap) it.inner.bnb.gap = a.gap;
    if (set.node_cap) it.inner.bnb.node_cap = a.node_cap;
    if (set.time_cap) it.inner.bnb.time_cap_seconds = a.time_cap;
    res = iterative_aqua(p, c, cs, it);
  } else {
    res = aqua_solve(p, c, cs, opts);
  }

  DesignDocument doc;
  doc.design = res.design;
  doc.labels = p.labels();
  doc.criterion_value = res.criterion_value;
  doc.efficiency_bound = res.efficiency_bound;
  doc.report = report_to_json(res.report);
  doc.report["surrogate_value"] = res.surrogate_value;
  doc.report["anchor_value"] = res.anchor_value;
  if (iterative) {
    doc.report["iterations"] = res.iterations;
    json hist = json::array();
    for (const auto& it : res.history) {
      hist.push_back({{"criterion_value", it.criterion_value},
                      {"integral", it.integral}});
    }
    doc.report["history"] = std::move(hist);
  }
  emit_design(a, p, doc);
  // Iterative runs budget their inner solves; only a failure to stabilize
  // counts as a cap.  Single solves report their own termination.
  const bool capped = iterative ? !res.converged
                                : (res.report.termination == Termination::node_cap ||
                                   res.report.termination == Termination::time_cap);
  return capped ? 3 : 0;
}

int cmd_round(const CommonArgs& a, const std::string& design_path, int trials) {
  DesignDocument in = read_design_json(design_path);
  std::vector<int> support;
  for (int i = 0; i < in.design.size(); ++i) {
    if (in.design.weights(i) > 0.0) support.push_back(i);
  }
  Eigen::VectorXd w(support.size());
  for (size_t i = 0; i < support.size(); ++i) w(i) = in.design.weights(support[i]);
  Eigen::VectorXi rounded = efficient_rounding(w, trials);
  DesignDocument out;
  out.design.weights = Eigen::VectorXd::Zero(in.design.size());
  for (size_t i = 0; i < support.size(); ++i) {
    out.design.weights(support[i]) = rounded(static_cast<int>(i));
  }
  out.design.integral = true;
  out.labels = in.labels;
  if (!a.out.empty()) {
    write_design_json(a.out, out);
  } else {
    json j;
    j["weights"] =
        std::vector<double>(out.design.weights.begin(), out.design.weights.end());
    std::cout << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_export(const CommonArgs& a) {
  DesignProblem p = read_model_csv(a.model);
  Criterion c = resolve_criterion(a, p);
  ConstraintSet cs = resolve_constraints(a, p.n());
  SymMatrix anchor;
  if (!a.anchor.empty()) {
    anchor = read_anchor_json(a.anchor, p);
  } else {
    AdOptions opts;
    opts.seed = a.seed;
    anchor = solve_ad(p, c, cs, opts).info;
  }
  QuadModel q = build_quad_model(p, c, anchor);
  if (a.out.empty()) throw BadParams("export needs --out");
  export_micqp(q, cs, a.out);
  return 0;
}

int cmd_eval(const CommonArgs& a, const std::string& design_path) {
  DesignProblem p = read_model_csv(a.model);
  Criterion c = resolve_criterion(a, p);
  DesignDocument in = read_design_json(design_path);
  if (in.design.size() != p.n()) {
    throw ParseError("design length != model size");
  }
  json out;
  const SymMatrix m = info_matrix(p, in.design);
  out["criterion_value"] = phi(c, m);
  if (!a.anchor.empty()) {
    out["efficiency"] = efficiency(c, m, read_anchor_json(a.anchor, p));
  }
  if (!a.constraints.empty() || a.size_n >= 0.0) {
    ConstraintSet cs = resolve_constraints(a, p.n());
    out["equivalence_gap"] = equivalence_gap(p, c, in.design, cs);
  }
  if (!a.out.empty()) {
    std::ofstream f(a.out);
    if (!f) throw IoError("cannot open " + a.out);
    f << out.dump(2) << "\n";
  } else {
    std::cout << out.dump(2) << "\n";
  }
  return 0;
}

int cmd_scenario(const std::string& name, int m, double step, bool symmetry, int n,
                 int strata, double budget, double quality_min, std::uint64_t seed,
                 const std::string& out_model, const std::string& out_constraints) {
  if (name == "spring-balance") {
    DesignProblem p = spring_balance_problem(m);
    // x_ columns only; the linear formula reconstructs the regressors.
    write_model_csv(out_model, p, /*write_regressors=*/false);
    write_formula_sidecar(out_model, "linear");
    ConstraintSet cs = ConstraintSet::box(
        Eigen::VectorXd::Zero(p.n()),
        Eigen::VectorXd::Constant(p.n(), std::numeric_limits<double>::infinity()), true);
    write_constraints_json(out_constraints, cs);
    return 0;
  }
  if (name == "scheffe") {
    DesignProblem p = scheffe_problem(step);
    write_model_csv(out_model, p, /*write_regressors=*/false);
    write_formula_sidecar(out_model, "linear + pairwise");
    write_constraints_json(out_constraints, scheffe_constraints(p, step, symmetry));
    return 0;
  }
  if (name == "synthetic-tall") {
    SyntheticTallParams params;
    params.n = n;
    params.m = m;
    params.strata = strata;
    params.budget_per_stratum = budget;
    params.quality_min = quality_min;
    params.seed = seed;
    SyntheticTall st = synthetic_tall(params);
    write_model_csv(out_model, st.problem);
    write_constraints_json(out_constraints, st.constraints);
    return 0;
  }
  throw BadParams("unknown scenario '" + name + "'");
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"exact experimental designs by quadratic approximation"};
  app.require_subcommand(1);

  CommonArgs a;
  std::string design_path;
  int trials = 0;
  int subsample = 1500;
  int max_iter = 10;
  bool relax_intermediate = true;
  std::string scenario_name;
  int sc_m = 6;
  double sc_step = 0.1;
  bool sc_symmetry = true;
  int sc_n = 20000;
  int sc_strata = 40;
  double sc_budget = 30.0;
  double sc_quality = 90.0;
  std::string out_model, out_constraints;

  auto* approx = app.add_subcommand("approx", "optimal approximate design");
  add_common(approx, a, true);

  auto* exact = app.add_subcommand("exact", "exact design via the quadratic surrogate");
  add_common(exact, a, true);

  auto* iter = app.add_subcommand("iter", "iterative anchoring scheme");
  add_common(iter, a, true);
  iter->add_option("--subsample", subsample, "rough-anchor point sample size");
  iter->add_option("--max-iter", max_iter, "iteration cap");
  iter->add_flag("--relax-intermediate,!--no-relax-intermediate", relax_intermediate,
                 "intermediate steps solve only the continuous surrogate");

  auto* round = app.add_subcommand("round", "efficient rounding of a design");
  add_common(round, a, false);
  round->add_option("--design", design_path, "input design JSON")->required();
  round->add_option("--trials", trials, "target number of trials N")->required();

  auto* exp = app.add_subcommand("export", "export the MICQP formulation");
  add_common(exp, a, true);

  auto* eval = app.add_subcommand("eval", "evaluate a design");
  add_common(eval, a, true);
  eval->add_option("--design", design_path, "input design JSON")->required();

  auto* scen = app.add_subcommand("scenario", "generate a benchmark scenario");
  scen->add_option("--name", scenario_name, "spring-balance | scheffe | synthetic-tall")
      ->required();
  scen->add_option("--m", sc_m, "parameter dimension / item count");
  scen->add_option("--step", sc_step, "mixture grid step");
  scen->add_flag("--symmetry,!--no-symmetry", sc_symmetry, "cyclic symmetry rows");
  scen->add_option("--n", sc_n, "point count");
  scen->add_option("--strata", sc_strata, "stratum count");
  scen->add_option("--budget", sc_budget, "budget per selection");
  scen->add_option("--quality-min", sc_quality, "average quality lower bound");
  scen->add_option("--seed", a.seed, "generator seed");
  scen->add_option("--model", out_model, "output model CSV")->required();
  scen->add_option("--constraints", out_constraints, "output constraint JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (approx->parsed()) return cmd_approx(a);
    if (exact->parsed()) return cmd_exact(a, false, 0, 0, false);
    if (iter->parsed()) {
      IterFlagSet set;
      set.gap = iter->count("--gap") > 0;
      set.node_cap = iter->count("--node-cap") > 0;
      set.time_cap = iter->count("--time-cap") > 0;
      return cmd_exact(a, true, subsample, max_iter, relax_intermediate, set);
    }
    if (round->parsed()) return cmd_round(a, design_path, trials);
    if (exp->parsed()) return cmd_export(a);
    if (eval->parsed()) return cmd_eval(a, design_path);
    if (scen->parsed()) {
      return cmd_scenario(scenario_name, sc_m, sc_step, sc_symmetry, sc_n, sc_strata,
                          sc_budget, sc_quality, a.seed, out_model, out_constraints);
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const BadParams& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Unbounded& e) {
    std::cerr << "error: " << e.what() << " (missing a size or budget constraint?)\n";
    return 1;
  } catch (const Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const TooFewTrials& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const SingularStart& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace aqua
