#include "aqua/scenarios.hpp"

#include <cmath>
#include <map>
#include <random>
#include <sstream>

namespace aqua {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

DesignProblem spring_balance_problem(int m) {
  if (m < 1 || m > 20) throw BadParams("spring-balance: m must be in [1, 20]");
  const int n = 1 << m;
  Eigen::MatrixXd f(n, m);
  std::vector<std::string> labels(n);
  for (int i = 0; i < n; ++i) {
    std::string bits(m, '0');
    for (int j = 0; j < m; ++j) {
      const int bit = (i >> j) & 1;
      f(i, j) = bit;
      bits[j] = bit ? '1' : '0';
    }
    labels[i] = bits;
  }
  return from_regressors(f, f, std::move(labels));
}

DesignProblem scheffe_problem(double step) {
  if (!(step > 0.0) || step > 1.0) throw BadParams("scheffe: step must lie in (0, 1]");
  const double levels_real = 1.0 / step;
  const int levels = static_cast<int>(std::round(levels_real));
  if (std::abs(levels * step - 1.0) > 1e-9) {
    throw BadParams("scheffe: step must divide 1");
  }
  const int n = (levels + 1) * (levels + 2) / 2;
  Eigen::MatrixXd points(n, 3);
  Eigen::MatrixXd f(n, 6);
  std::vector<std::string> labels(n);
  int r = 0;
  for (int i = 0; i <= levels; ++i) {
    for (int j = 0; j <= levels - i; ++j) {
      const int k = levels - i - j;
      const double x1 = i * step;
      const double x2 = j * step;
      const double x3 = k * step;
      points.row(r) << x1, x2, x3;
      f.row(r) << x1, x2, x3, x1 * x2, x1 * x3, x2 * x3;
      std::ostringstream lab;
      lab << x1 << "/" << x2 << "/" << x3;
      labels[r] = lab.str();
      ++r;
    }
  }
  return from_regressors(f, points, std::move(labels));
}

std::vector<std::vector<int>> scheffe_orbits(const DesignProblem& p) {
  const Eigen::MatrixXd& pts = p.points();
  if (pts.cols() != 3) throw BadParams("scheffe_orbits: expected 3 coordinates");
  const int n = p.n();
  auto key = [](double a, double b, double c) {
    std::ostringstream os;
    os.precision(12);
    os << a << "," << b << "," << c;
    return os.str();
  };
  std::map<std::string, int> index;
  for (int i = 0; i < n; ++i) index[key(pts(i, 0), pts(i, 1), pts(i, 2))] = i;

  std::vector<bool> seen(n, false);
  std::vector<std::vector<int>> orbits;
  for (int i = 0; i < n; ++i) {
    if (seen[i]) continue;
    std::vector<int> orbit;
    int cur = i;
    for (int turn = 0; turn < 3; ++turn) {
      if (!seen[cur]) {
        seen[cur] = true;
        orbit.push_back(cur);
      }
      const auto it = index.find(key(pts(cur, 1), pts(cur, 2), pts(cur, 0)));
      if (it == index.end()) throw Error("scheffe_orbits: grid not rotation-closed");
      cur = it->second;
    }
    orbits.push_back(std::move(orbit));
  }
  return orbits;
}

ConstraintSet scheffe_constraints(const DesignProblem& p, double step, bool symmetry) {
  const int levels = static_cast<int>(std::round(1.0 / step));
  const int n = p.n();
  const Eigen::MatrixXd& pts = p.points();
  const int k = 3 * (levels + 1);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, n);
  Eigen::VectorXd b = Eigen::VectorXd::Ones(k);
  std::vector<bool> eq(k, false);
  for (int factor = 0; factor < 3; ++factor) {
    for (int lev = 0; lev <= levels; ++lev) {
      const int row = factor * (levels + 1) + lev;
      for (int i = 0; i < n; ++i) {
        if (std::abs(pts(i, factor) - lev * step) < 1e-9) a(row, i) = 1.0;
      }
    }
  }
  ConstraintSet cs(std::move(a), std::move(b), std::move(eq),
                   Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n),
                   std::vector<bool>(n, true));
  if (symmetry) cs = add_symmetry_orbits(cs, scheffe_orbits(p));
  return cs;
}

SyntheticTall synthetic_tall(const SyntheticTallParams& params) {
  if (params.n < params.strata || params.strata < 1 || params.m < 3) {
    throw BadParams("synthetic-tall: need n >= strata >= 1 and m >= 3");
  }
  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> quality_dist(88.0, 3.0);
  std::normal_distribution<double> logprice_dist(3.0, 0.8);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<int> stratum_dist(0, params.strata - 1);

  const int n = params.n;
  Eigen::MatrixXd f(n, params.m);
  Eigen::MatrixXd points(n, 2);
  std::vector<std::string> labels(n);
  std::vector<int> stratum(n);
  Eigen::VectorXd price(n), quality(n);
  for (int i = 0; i < n; ++i) {
    quality(i) = quality_dist(rng);
    const double logp = logprice_dist(rng);
    price(i) = std::exp(logp);
    stratum[i] = i < params.strata ? i : stratum_dist(rng);  // every stratum occupied
    f(i, 0) = 1.0;
    f(i, 1) = quality(i);
    f(i, 2) = logp;
    for (int c = 3; c < params.m; ++c) f(i, c) = noise(rng);
    points.row(i) << quality(i), price(i);
    std::ostringstream lab;
    lab << "p" << i << "/s" << stratum[i];
    labels[i] = lab.str();
  }

  const int k = params.strata + 2;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, n);
  Eigen::VectorXd b(k);
  std::vector<bool> eq(k, false);
  for (int s = 0; s < params.strata; ++s) {
    b(s) = 1.0;
    eq[s] = true;
  }
  for (int i = 0; i < n; ++i) a(stratum[i], i) = 1.0;
  // Budget row: total price at most budget_per_stratum per selection.
  a.row(params.strata) = price.transpose();
  b(params.strata) = params.budget_per_stratum * params.strata;
  // Average quality at least quality_min, stored as <= of the negation.
  a.row(params.strata + 1) = -quality.transpose();
  b(params.strata + 1) = -params.quality_min * params.strata;

  ConstraintSet cs(std::move(a), std::move(b), std::move(eq),
                   Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n),
                   std::vector<bool>(n, true));
  return {from_regressors(f, points, std::move(labels)), std::move(cs)};
}

ConstraintSet with_size_row(const ConstraintSet& cs, double total) {
  const int k = cs.rows();
  Eigen::MatrixXd a(k + 1, cs.n());
  a.topRows(k) = cs.a();
  a.row(k).setOnes();
  Eigen::VectorXd b(k + 1);
  b.head(k) = cs.b();
  b(k) = total;
  std::vector<bool> eq;
  for (int i = 0; i < k; ++i) eq.push_back(cs.row_equality(i));
  eq.push_back(true);
  return ConstraintSet(std::move(a), std::move(b), std::move(eq), cs.lower(),
                       cs.upper(), cs.integrality());
}

Design neighbor_vertex_design(int m, double s, double total) {
  if (s < 0.0 || s > m) throw BadParams("neighbor_vertex_design: s outside [0, m]");
  const int n = 1 << m;
  const int lo = static_cast<int>(std::floor(s));
  const double frac = s - lo;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    const int ones = __builtin_popcount(static_cast<unsigned>(i));
    if (ones == lo && frac < 1.0) {
      w(i) += (1.0 - frac) * total / binomial(m, lo);
    }
    if (ones == lo + 1 && frac > 0.0) {
      w(i) += frac * total / binomial(m, lo + 1);
    }
  }
  return Design{w, false};
}

SymMatrix j_vertex_info(int m, int j, double total) {
  // diag N j / m, off-diagonal N j (j - 1) / (m (m - 1)).
  const double diag = total * j / m;
  const double off = m > 1 ? total * j * (j - 1.0) / (m * (m - 1.0)) : 0.0;
  Eigen::MatrixXd mm = Eigen::MatrixXd::Constant(m, m, off);
  mm.diagonal().setConstant(diag);
  return SymMatrix(std::move(mm));
}

}  // namespace aqua
