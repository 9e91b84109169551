#include "aqua/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace aqua {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // Trim to the shortest representation that round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char probe[32];
    std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
    if (std::strtod(probe, nullptr) == v) return probe;
  }
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string formula_sidecar_path(const std::string& model_path) {
  const auto dot = model_path.find_last_of('.');
  const std::string stem = dot == std::string::npos ? model_path : model_path.substr(0, dot);
  return stem + ".formula.json";
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return doc;
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ParseError(where + ": unknown key '" + key + "'");
    }
  }
}

}  // namespace

void write_model_csv(const std::string& path, const DesignProblem& p,
                     bool write_regressors) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  const bool has_labels = !p.labels().empty();
  const int xc = static_cast<int>(p.points().cols());
  const Eigen::MatrixXd& f = p.regressors();
  if (write_regressors && f.size() == 0) {
    throw IoError("write_model_csv: only regressor-built problems are writable");
  }
  if (!write_regressors && xc == 0) {
    throw IoError("write_model_csv: coordinate-only output needs points");
  }
  const int fc = write_regressors ? static_cast<int>(f.cols()) : 0;
  if (has_labels) out << "label" << (xc + fc > 0 ? "," : "");
  for (int j = 0; j < xc; ++j) out << "x_" << (j + 1) << (j + 1 < xc || fc > 0 ? "," : "");
  for (int j = 0; j < fc; ++j) out << "f_" << (j + 1) << (j + 1 < fc ? "," : "");
  out << "\n";
  for (int i = 0; i < p.n(); ++i) {
    if (has_labels) out << p.labels()[i] << (xc + fc > 0 ? "," : "");
    for (int j = 0; j < xc; ++j) {
      out << format_double(p.points()(i, j)) << (j + 1 < xc || fc > 0 ? "," : "");
    }
    for (int j = 0; j < fc; ++j) {
      out << format_double(f(i, j)) << (j + 1 < fc ? "," : "");
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed for " + path);
}

Eigen::MatrixXd expand_formula(const Eigen::MatrixXd& points, const std::string& formula) {
  bool intercept = false, linear = false, pairwise = false, squares = false;
  std::istringstream is(formula);
  std::string term;
  while (std::getline(is, term, '+')) {
    const auto b = term.find_first_not_of(" \t");
    if (b == std::string::npos) throw ParseError("formula: empty term");
    const auto e = term.find_last_not_of(" \t");
    const std::string t = term.substr(b, e - b + 1);
    if (t == "intercept") {
      intercept = true;
    } else if (t == "linear") {
      linear = true;
    } else if (t == "pairwise") {
      pairwise = true;
    } else if (t == "squares") {
      squares = true;
    } else {
      throw ParseError("formula: unsupported term '" + t + "'");
    }
  }
  const int n = static_cast<int>(points.rows());
  const int d = static_cast<int>(points.cols());
  int m = (intercept ? 1 : 0) + (linear ? d : 0) + (pairwise ? d * (d - 1) / 2 : 0) +
          (squares ? d : 0);
  if (m == 0) throw ParseError("formula: no terms");
  Eigen::MatrixXd f(n, m);
  int c = 0;
  if (intercept) f.col(c++).setOnes();
  if (linear) {
    for (int j = 0; j < d; ++j) f.col(c++) = points.col(j);
  }
  if (pairwise) {
    for (int u = 0; u < d; ++u) {
      for (int v = u + 1; v < d; ++v) {
        f.col(c++) = points.col(u).cwiseProduct(points.col(v));
      }
    }
  }
  if (squares) {
    for (int j = 0; j < d; ++j) f.col(c++) = points.col(j).cwiseAbs2();
  }
  return f;
}

void write_formula_sidecar(const std::string& model_path, const std::string& formula) {
  json doc;
  doc["schema"] = "aqua/1";
  doc["formula"] = formula;
  const std::string path = formula_sidecar_path(model_path);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out << doc.dump(2) << "\n";
}

DesignProblem read_model_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty model file");
  const auto header = split_csv_line(line);
  int label_col = -1;
  std::vector<int> x_cols, f_cols;
  for (size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "label") {
      label_col = static_cast<int>(c);
    } else if (header[c].rfind("x_", 0) == 0) {
      x_cols.push_back(static_cast<int>(c));
    } else if (header[c].rfind("f_", 0) == 0) {
      f_cols.push_back(static_cast<int>(c));
    } else {
      throw ParseError(path + ": unknown column '" + header[c] + "'");
    }
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError(path + ": row with wrong field count");
    }
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw ParseError(path + ": no data rows");
  const int n = static_cast<int>(rows.size());

  auto parse_num = [&](const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
      throw ParseError(path + ": bad number '" + s + "'");
    }
    return v;
  };

  Eigen::MatrixXd points(n, static_cast<int>(x_cols.size()));
  Eigen::MatrixXd f(n, static_cast<int>(f_cols.size()));
  std::vector<std::string> labels;
  if (label_col >= 0) labels.resize(n);
  for (int i = 0; i < n; ++i) {
    if (label_col >= 0) labels[i] = rows[i][label_col];
    for (size_t j = 0; j < x_cols.size(); ++j) points(i, j) = parse_num(rows[i][x_cols[j]]);
    for (size_t j = 0; j < f_cols.size(); ++j) f(i, j) = parse_num(rows[i][f_cols[j]]);
  }

  if (f_cols.empty()) {
    if (x_cols.empty()) throw ParseError(path + ": needs x_ or f_ columns");
    const std::string sidecar = formula_sidecar_path(path);
    json doc = load_json(sidecar);
    reject_unknown_keys(doc, {"schema", "formula"}, sidecar);
    if (!doc.contains("formula") || !doc["formula"].is_string()) {
      throw ParseError(sidecar + ": missing formula string");
    }
    f = expand_formula(points, doc["formula"].get<std::string>());
  }
  return from_regressors(f, std::move(points), std::move(labels));
}

void write_constraints_json(const std::string& path, const ConstraintSet& cs) {
  json doc;
  doc["schema"] = "aqua/1";
  doc["n"] = cs.n();
  json rows = json::array();
  for (int i = 0; i < cs.rows(); ++i) {
    json row;
    int nnz = 0;
    for (int j = 0; j < cs.n(); ++j) {
      if (cs.a()(i, j) != 0.0) ++nnz;
    }
    if (nnz * 3 < cs.n()) {
      json sparse = json::array();
      for (int j = 0; j < cs.n(); ++j) {
        if (cs.a()(i, j) != 0.0) sparse.push_back({j, cs.a()(i, j)});
      }
      row["sparse"] = std::move(sparse);
    } else {
      row["coeffs"] = std::vector<double>(cs.a().row(i).begin(), cs.a().row(i).end());
    }
    row["sense"] = cs.row_equality(i) ? "=" : "<=";
    row["rhs"] = cs.b()(i);
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);
  json bounds;
  bounds["lower"] = std::vector<double>(cs.lower().begin(), cs.lower().end());
  json upper = json::array();
  for (int j = 0; j < cs.n(); ++j) {
    if (std::isfinite(cs.upper()(j))) {
      upper.push_back(cs.upper()(j));
    } else {
      upper.push_back(nullptr);
    }
  }
  bounds["upper"] = std::move(upper);
  doc["bounds"] = std::move(bounds);
  std::vector<bool> integ(cs.n());
  for (int j = 0; j < cs.n(); ++j) integ[j] = cs.integral(j);
  doc["integrality"] = integ;

  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out << doc.dump(2) << "\n";
  if (!out) throw IoError("write failed for " + path);
}

ConstraintSet read_constraints_json(const std::string& path) {
  json doc = load_json(path);
  reject_unknown_keys(
      doc, {"schema", "n", "rows", "bounds", "binary", "integrality", "orbits"}, path);
  if (!doc.contains("n") || !doc["n"].is_number_integer()) {
    throw ParseError(path + ": missing integer field 'n'");
  }
  const int n = doc["n"].get<int>();
  if (n < 1) throw ParseError(path + ": n must be positive");

  std::vector<Eigen::VectorXd> row_coeffs;
  std::vector<double> rhs;
  std::vector<bool> eq;
  if (doc.contains("rows")) {
    if (!doc["rows"].is_array()) throw ParseError(path + ": rows must be an array");
    for (const auto& row : doc["rows"]) {
      reject_unknown_keys(row, {"coeffs", "sparse", "sense", "rhs"}, path + ": row");
      Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(n);
      if (row.contains("coeffs")) {
        const auto v = row["coeffs"].get<std::vector<double>>();
        if (static_cast<int>(v.size()) != n) {
          throw ParseError(path + ": row coeffs length != n");
        }
        for (int j = 0; j < n; ++j) coeffs(j) = v[j];
      } else if (row.contains("sparse")) {
        for (const auto& pair : row["sparse"]) {
          if (!pair.is_array() || pair.size() != 2) {
            throw ParseError(path + ": sparse entries are [index, value]");
          }
          const int j = pair[0].get<int>();
          if (j < 0 || j >= n) throw ParseError(path + ": sparse index out of range");
          coeffs(j) = pair[1].get<double>();
        }
      } else {
        throw ParseError(path + ": row needs coeffs or sparse");
      }
      const std::string sense = row.value("sense", "<=");
      double b = row.at("rhs").get<double>();
      if (sense == ">=") {
        coeffs = -coeffs;  // normalized to <=
        b = -b;
        eq.push_back(false);
      } else if (sense == "<=") {
        eq.push_back(false);
      } else if (sense == "=") {
        eq.push_back(true);
      } else {
        throw ParseError(path + ": unknown sense '" + sense + "'");
      }
      row_coeffs.push_back(std::move(coeffs));
      rhs.push_back(b);
    }
  }

  Eigen::VectorXd lower = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd upper = Eigen::VectorXd::Constant(n, kInf);
  if (doc.contains("bounds")) {
    reject_unknown_keys(doc["bounds"], {"lower", "upper"}, path + ": bounds");
    if (doc["bounds"].contains("lower")) {
      const auto v = doc["bounds"]["lower"].get<std::vector<double>>();
      if (static_cast<int>(v.size()) != n) throw ParseError(path + ": lower length != n");
      for (int j = 0; j < n; ++j) lower(j) = v[j];
    }
    if (doc["bounds"].contains("upper")) {
      const auto& arr = doc["bounds"]["upper"];
      if (static_cast<int>(arr.size()) != n) throw ParseError(path + ": upper length != n");
      for (int j = 0; j < n; ++j) {
        if (!arr[j].is_null()) upper(j) = arr[j].get<double>();
      }
    }
  }
  if (doc.value("binary", false)) {
    upper = Eigen::VectorXd::Ones(n);
  }

  std::vector<bool> integral(n, false);
  if (doc.contains("integrality")) {
    const auto& integ = doc["integrality"];
    if (integ.is_boolean()) {
      integral.assign(n, integ.get<bool>());
    } else {
      const auto v = integ.get<std::vector<bool>>();
      if (static_cast<int>(v.size()) != n) {
        throw ParseError(path + ": integrality length != n");
      }
      integral = v;
    }
  }
  if (doc.value("binary", false)) integral.assign(n, true);

  const int k = static_cast<int>(row_coeffs.size());
  Eigen::MatrixXd a(k, n);
  Eigen::VectorXd b(k);
  for (int i = 0; i < k; ++i) {
    a.row(i) = row_coeffs[i].transpose();
    b(i) = rhs[i];
  }
  ConstraintSet cs(std::move(a), std::move(b), std::move(eq), std::move(lower),
                   std::move(upper), std::move(integral));
  if (doc.contains("orbits")) {
    cs = add_symmetry_orbits(cs, doc["orbits"].get<std::vector<std::vector<int>>>());
  }
  return cs;
}

void write_design_json(const std::string& path, const DesignDocument& doc) {
  json j;
  j["schema"] = "aqua/1";
  j["weights"] = std::vector<double>(doc.design.weights.begin(), doc.design.weights.end());
  j["integral"] = doc.design.integral;
  if (!doc.labels.empty()) j["labels"] = doc.labels;
  if (doc.criterion_value.has_value()) j["criterion_value"] = *doc.criterion_value;
  if (doc.efficiency_bound.has_value()) j["efficiency_bound"] = *doc.efficiency_bound;
  if (!doc.report.is_null()) j["report"] = doc.report;
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed for " + path);
}

DesignDocument read_design_json(const std::string& path) {
  json j = load_json(path);
  reject_unknown_keys(j,
                      {"schema", "weights", "integral", "labels", "criterion_value",
                       "efficiency_bound", "report"},
                      path);
  DesignDocument doc;
  const auto w = j.at("weights").get<std::vector<double>>();
  doc.design.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
  doc.design.integral = j.value("integral", false);
  if (j.contains("labels")) doc.labels = j["labels"].get<std::vector<std::string>>();
  if (j.contains("criterion_value")) doc.criterion_value = j["criterion_value"].get<double>();
  if (j.contains("efficiency_bound")) {
    doc.efficiency_bound = j["efficiency_bound"].get<double>();
  }
  if (j.contains("report")) doc.report = j["report"];
  return doc;
}

void write_points_csv(const std::string& path, const DesignProblem& p, const Design& d) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  const int xc = static_cast<int>(p.points().cols());
  out << "index,label,weight";
  for (int j = 0; j < xc; ++j) out << ",x_" << (j + 1);
  out << "\n";
  for (int i = 0; i < p.n(); ++i) {
    if (d.weights(i) <= 0.0) continue;
    out << i << "," << (p.labels().empty() ? "" : p.labels()[i]) << ","
        << format_double(d.weights(i));
    for (int j = 0; j < xc; ++j) out << "," << format_double(p.points()(i, j));
    out << "\n";
  }
}

SymMatrix read_anchor_json(const std::string& path, const DesignProblem& p) {
  json j = load_json(path);
  if (j.contains("matrix")) {
    const auto rows = j["matrix"].get<std::vector<std::vector<double>>>();
    const int m = static_cast<int>(rows.size());
    Eigen::MatrixXd mm(m, m);
    for (int r = 0; r < m; ++r) {
      if (static_cast<int>(rows[r].size()) != m) {
        throw ParseError(path + ": matrix must be square");
      }
      for (int c = 0; c < m; ++c) mm(r, c) = rows[r][c];
    }
    return SymMatrix::symmetrized(mm);
  }
  DesignDocument doc = read_design_json(path);
  if (doc.design.size() != p.n()) {
    throw ParseError(path + ": anchor design length != model size");
  }
  return info_matrix(p, doc.design);
}

nlohmann::json report_to_json(const SolveReport& rep) {
  json j;
  j["incumbent_phi"] = rep.incumbent_phi;
  j["upper_bound"] = rep.upper_bound;
  j["gap"] = rep.gap;
  j["nodes_expanded"] = rep.nodes_expanded;
  j["heuristic_improvements"] = rep.heuristic_improvements;
  j["wall_seconds"] = rep.wall_seconds;
  switch (rep.termination) {
    case Termination::optimal:
      j["termination"] = "optimal";
      break;
    case Termination::gap_reached:
      j["termination"] = "gap_reached";
      break;
    case Termination::node_cap:
      j["termination"] = "node_cap";
      break;
    case Termination::time_cap:
      j["termination"] = "time_cap";
      break;
  }
  return j;
}

}  // namespace aqua
