#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "aqua/integer.hpp"
#include "aqua/model.hpp"
#include "aqua/polytope.hpp"

namespace aqua {

/// Model files are CSV with a header row and one design point per row:
/// an optional `label` column, coordinate columns prefixed `x_`, regressor
/// columns prefixed `f_`.  When only `x_` columns are present, a formula
/// sidecar `<stem>.formula.json` expands them; supported terms are
/// `intercept`, `linear`, `pairwise`, and `squares`, joined by `+`.
void write_model_csv(const std::string& path, const DesignProblem& p,
                     bool write_regressors = true);
DesignProblem read_model_csv(const std::string& path);

/// Writes the sidecar formula document next to a model file.
void write_formula_sidecar(const std::string& model_path, const std::string& formula);

/// Expands coordinate rows by a formula string into a regressor matrix.
Eigen::MatrixXd expand_formula(const Eigen::MatrixXd& points, const std::string& formula);

/// Constraint files are JSON: {"schema", "n", "rows": [{"coeffs" | "sparse",
/// "sense": "<="|"="|">=", "rhs"}], "bounds": {"lower", "upper"}, "binary",
/// "integrality", "orbits"}.  ">=" rows are normalized to "<=" by negation
/// at parse time; "orbits" adds symmetry equality rows.  Unknown keys are
/// rejected.
void write_constraints_json(const std::string& path, const ConstraintSet& cs);
ConstraintSet read_constraints_json(const std::string& path);

/// Design documents: {"schema": "aqua/1", "weights", "labels",
/// "criterion_value", "efficiency_bound", "report"}.
struct DesignDocument {
  Design design;
  std::vector<std::string> labels;
  std::optional<double> criterion_value;
  std::optional<double> efficiency_bound;
  nlohmann::json report;  // free-form solver report block
};

void write_design_json(const std::string& path, const DesignDocument& doc);
DesignDocument read_design_json(const std::string& path);

/// CSV of the selected points (weight > 0): label, weight, coordinates.
void write_points_csv(const std::string& path, const DesignProblem& p, const Design& d);

/// Anchor files hold either {"matrix": [[...]]} or a design document whose
/// information matrix (under the given problem) supplies the anchor.
SymMatrix read_anchor_json(const std::string& path, const DesignProblem& p);

nlohmann::json report_to_json(const SolveReport& rep);

}  // namespace aqua
