#pragma once

#include <optional>

#include "aqua/model.hpp"
#include "aqua/symlin.hpp"

namespace aqua {

enum class CriterionFamily { positive, negative, blend, logdet, i_opt };

/// One of Kiefer's Phi_p criteria (positive / negative / gamma-blend
/// version), the log-det version of D-optimality, or the I-criterion with a
/// moment matrix L.  p is a non-negative integer, ignored for logdet and I.
struct Criterion {
  CriterionFamily family = CriterionFamily::positive;
  int p = 0;
  double gamma = 0.0;               // blend only, in [-1, 1]
  std::optional<SymMatrix> region;  // L, i_opt only

  static Criterion positive(int p);
  static Criterion negative(int p);
  static Criterion blend(int p, double gamma);
  static Criterion logdet();
  static Criterion i_opt(SymMatrix l);

  /// Sugar: D-optimality is p = 0, A-optimality is p = 1.
  static Criterion d_optimality() { return positive(0); }
  static Criterion a_optimality() { return positive(1); }
};

/// Criterion value with extended-value semantics: singular M maps to 0 for
/// the positive family and -inf for the others (0 * inf = 0 in the blend).
double phi(const Criterion& c, const SymMatrix& m);

/// Gradient matrix; satisfies the directional-derivative identity
/// d/dt Phi(M + t N)|_0 = tr(grad * N).  Requires M positive definite.
SymMatrix phi_gradient(const Criterion& c, const SymMatrix& m);

/// Phi-efficiency of M relative to Mstar on the positive-version scale, so
/// the number is comparable across criterion versions.  Throws
/// UndefinedEfficiency when the reference value is 0 or -inf.
double efficiency(const Criterion& c, const SymMatrix& m, const SymMatrix& mstar);

/// The positive-homogeneous non-negative equivalent of the criterion value
/// (the quantity whose ratio defines efficiency); 0 for singular M.
double positive_scale_value(const Criterion& c, const SymMatrix& m);

}  // namespace aqua
