#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "aqua/pipeline.hpp"
#include "aqua/scenarios.hpp"
#include "helpers.hpp"

using namespace aqua;
using namespace aqua::testing;

TEST_SUITE("pipeline") {

TEST_CASE("aqua_solve recovers the replicable spring-balance optima") {
  DesignProblem p = spring_balance_problem(6);

  SUBCASE("D at N = 7 with the exact anchor") {
    AquaOptions opts;
    opts.anchor = aI_bJ(6, 2.0, 2.0);
    AquaResult res =
        aqua_solve(p, Criterion::positive(0), ConstraintSet::simplex(64, 7.0), opts);
    CHECK(res.efficiency_bound == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(res.design.integral);
    CHECK(res.design.weights.sum() == doctest::Approx(7.0));
  }

  SUBCASE("A at N = 10 with the solved anchor") {
    AquaResult res =
        aqua_solve(p, Criterion::positive(1), ConstraintSet::simplex(64, 10.0), {});
    CHECK(res.efficiency_bound >= 1.0 - 1e-5);
    CHECK(res.efficiency_bound <= 1.0 + 1e-6);
  }
}

TEST_CASE("iterative_aqua converges immediately at an optimal anchor") {
  DesignProblem p = spring_balance_problem(6);
  IterOptions opts;
  opts.initial_anchor = aI_bJ(6, 2.0, 2.0);  // exact D anchor for N = 7
  opts.relax_intermediate = false;
  AquaResult res =
      iterative_aqua(p, Criterion::positive(0), ConstraintSet::simplex(64, 7.0), opts);
  CHECK(res.iterations == 1);
  CHECK(res.history.size() == 1);
  CHECK(res.efficiency_bound == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("iterative_aqua history stays within the cap") {
  std::mt19937_64 rng(251);
  DesignProblem p = random_problem(rng, 12, 3);
  IterOptions opts;
  opts.max_iter = 4;
  opts.subsample_size = 8;
  opts.seed = 5;
  AquaResult res =
      iterative_aqua(p, Criterion::positive(0), ConstraintSet::simplex(12, 6.0), opts);
  CHECK(res.iterations <= opts.max_iter + 1);
  CHECK(static_cast<int>(res.history.size()) == res.iterations);
  CHECK(res.history.back().integral);
  CHECK(res.design.integral);
}

TEST_CASE("efficient_rounding worked example and invariants") {
  Eigen::VectorXd w(3);
  w << 0.5, 0.3, 0.2;
  Eigen::VectorXi n = efficient_rounding(w, 10);
  CHECK(n(0) == 5);
  CHECK(n(1) == 3);
  CHECK(n(2) == 2);

  // Uniform weights with N = k s split evenly.
  Eigen::VectorXd u = Eigen::VectorXd::Constant(4, 0.25);
  Eigen::VectorXi ku = efficient_rounding(u, 12);
  for (int i = 0; i < 4; ++i) CHECK(ku(i) == 3);

  CHECK_THROWS_AS(efficient_rounding(w, 2), TooFewTrials);

  std::mt19937_64 rng(257);
  std::uniform_int_distribution<int> sdist(1, 12);
  std::uniform_real_distribution<double> wdist(0.01, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int s = sdist(rng);
    Eigen::VectorXd ww(s);
    for (int i = 0; i < s; ++i) ww(i) = wdist(rng);
    const int total = s + static_cast<int>(rng() % 40);
    Eigen::VectorXi out = efficient_rounding(ww, total);
    CHECK(out.sum() == total);
    CHECK(out.minCoeff() >= 1);
  }
}

TEST_CASE("efficient rounding applies to Table 1 but not the neighbor-vertex AD") {
  DesignProblem p = spring_balance_problem(6);

  // Table-1 weights at N = 35: support 7, uniform.
  Design d = design_from_rows(64, spring_d_rows(), 35.0 / 7.0, false);
  std::vector<double> support;
  for (int i = 0; i < 64; ++i) {
    if (d.weights(i) > 0.0) support.push_back(d.weights(i));
  }
  REQUIRE(support.size() == 7);
  Eigen::VectorXd w = Eigen::Map<Eigen::VectorXd>(support.data(), support.size());
  Eigen::VectorXi rounded = efficient_rounding(w, 35);
  CHECK(rounded.sum() == 35);
  for (int i = 0; i < 7; ++i) CHECK(rounded(i) == 5);

  // The D-optimal neighbor-vertex design has support 35.
  Design nv = neighbor_vertex_design(6, 24.0 / 7.0, 34.0);
  std::vector<double> nv_support;
  for (int i = 0; i < 64; ++i) {
    if (nv.weights(i) > 0.0) nv_support.push_back(nv.weights(i));
  }
  REQUIRE(nv_support.size() == 35);
  Eigen::VectorXd nw = Eigen::Map<Eigen::VectorXd>(nv_support.data(), nv_support.size());
  CHECK_THROWS_AS(efficient_rounding(nw, 34), TooFewTrials);

  // Its information matrix nevertheless matches the closed optimum.
  CHECK(max_abs_diff(info_matrix(p, nv).mat(),
                     aI_bJ(6, 2.0 * 34.0 / 7.0, 2.0 * 34.0 / 7.0).mat()) < 1e-9);
}

TEST_CASE("micqp export satisfies the cone round-trip identity") {
  std::mt19937_64 rng(263);
  DesignProblem p = random_problem(rng, 10, 3);
  SymMatrix mstar = random_spd(rng, 3);
  QuadModel q = build_quad_model(p, Criterion::positive(1), mstar);
  REQUIRE(q.rank > 0);
  ConstraintSet cs = ConstraintSet::simplex(10, 4.0);
  nlohmann::json doc = micqp_document(q, cs);

  CHECK(doc.at("schema") == "aqua/1");
  CHECK(doc.at("n") == 10);
  CHECK(doc.at("t") == q.rank);
  CHECK(doc.at("objective").at("aux_r") == true);
  REQUIRE(doc.contains("cone"));
  CHECK(doc.at("cone").at("type") == "second_order");
  CHECK(doc.at("cone").at("order") == q.rank + 2);
  REQUIRE(doc.at("cone").at("links").at("v_rows").size() ==
          static_cast<size_t>(q.rank));
  CHECK(doc.at("rows").size() == 1);
  CHECK(doc.at("bounds").size() == 10);
  CHECK(doc.at("integrality").size() == 10);
  CHECK(doc.at("metadata").at("p") == 1);
  CHECK(doc.at("metadata").at("V_matrix").size() == static_cast<size_t>(q.rank + 2));

  const auto h = doc.at("objective").at("linear").get<std::vector<double>>();
  const auto& links = doc.at("cone").at("links");
  const double a_coeff = links.at("a_row").at("a_coeff").get<double>();
  const double b_coeff = links.at("b_row").at("b_coeff").get<double>();
  std::uniform_int_distribution<int> wdist(0, 3);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd xi(10);
    for (int j = 0; j < 10; ++j) xi(j) = wdist(rng);
    // Reconstruct v, r, a, b from the document alone.
    Eigen::VectorXd v(q.rank);
    for (int col = 0; col < q.rank; ++col) {
      const auto coeffs =
          links.at("v_rows")[col].at("xi_coeffs").get<std::vector<double>>();
      double s = 0.0;
      for (int j = 0; j < 10; ++j) s += coeffs[j] * xi(j);
      v(col) = s;
    }
    const double r = v.squaredNorm();
    const double a_val = (links.at("a_row").at("rhs").get<double>() -
                          links.at("a_row").at("r_coeff").get<double>() * r) /
                         a_coeff;
    const double b_val = (links.at("b_row").at("rhs").get<double>() -
                          links.at("b_row").at("r_coeff").get<double>() * r) /
                         b_coeff;
    // On the cone boundary: a^2 - b^2 - |v|^2 == 0, and a >= 0.
    CHECK(a_val >= 0.0);
    CHECK(a_val * a_val - b_val * b_val - v.squaredNorm() ==
          doctest::Approx(0.0).epsilon(1e-9));
    // Objective h' xi - r equals phi.
    double lin = 0.0;
    for (int j = 0; j < 10; ++j) lin += h[j] * xi(j);
    CHECK(lin - r == doctest::Approx(phi_quad(q, Design{xi, false})).epsilon(1e-9));
  }

  // Trivial cone membership: (1, 0, ..., 0).
  CHECK(1.0 >= 0.0);
}

TEST_CASE("micqp export with rank zero omits the cone block") {
  Eigen::MatrixXd f(3, 1);
  f << 1.0, 2.0, 0.5;
  DesignProblem p = from_regressors(f);
  Eigen::MatrixXd mu(1, 1);
  mu << 1.0;
  QuadModel q = build_quad_model(p, Criterion::positive(0), SymMatrix(mu));
  REQUIRE(q.rank == 0);
  nlohmann::json doc = micqp_document(q, ConstraintSet::simplex(3, 2.0));
  CHECK(!doc.contains("cone"));
  CHECK(doc.at("objective").at("aux_r") == false);
}

TEST_CASE("export_micqp writes a parsable file") {
  std::mt19937_64 rng(269);
  DesignProblem p = random_problem(rng, 6, 2);
  QuadModel q = build_quad_model(p, Criterion::positive(0), random_spd(rng, 2));
  const std::string path = "/tmp/aqua_test_micqp.json";
  export_micqp(q, ConstraintSet::simplex(6, 3.0), path);
  std::ifstream in(path);
  REQUIRE(in.good());
  nlohmann::json doc;
  in >> doc;
  CHECK(doc.at("schema") == "aqua/1");
  std::remove(path.c_str());
}

TEST_CASE("anchor efficiency bound is sound for every integer design") {
  std::mt19937_64 rng(271);
  DesignProblem p = random_problem(rng, 6, 2);
  ConstraintSet cs = ConstraintSet::simplex(6, 4.0);
  AdSolution ad = solve_ad(p, Criterion::positive(1), cs, {});
  enumerate_simplex(6, 4, [&](const Eigen::VectorXd& xi) {
    const double eff =
        efficiency(Criterion::positive(1), info_matrix(p, Design{xi, false}), ad.info);
    CHECK(eff <= 1.0 + 1e-6);
  });
}

}  // TEST_SUITE
