#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace aqua {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A matrix required to be (numerically) nonsingular was not.  Carries the
/// offending eigenvalue ratio lambda_min / lambda_max.
class SingularMatrix : public Error {
 public:
  SingularMatrix(const std::string& msg, double eigenvalue_ratio)
      : Error(msg), eigenvalue_ratio(eigenvalue_ratio) {}
  double eigenvalue_ratio;
};

/// psd_factor input had an eigenvalue below the negative tolerance.
class NotPsd : public Error {
 public:
  NotPsd(const std::string& msg, double worst_eigenvalue)
      : Error(msg), worst_eigenvalue(worst_eigenvalue) {}
  double worst_eigenvalue;
};

class EmptyRegion : public Error {
 public:
  using Error::Error;
};

class SingularL : public Error {
 public:
  using Error::Error;
};

class UndefinedEfficiency : public Error {
 public:
  using Error::Error;
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

/// LP relaxation unbounded in the objective direction; carries the ray.
class Unbounded : public Error {
 public:
  Unbounded(const std::string& msg, std::vector<double> ray)
      : Error(msg), ray(std::move(ray)) {}
  std::vector<double> ray;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

/// No nonsingular feasible starting matrix could be found.
class SingularStart : public Error {
 public:
  using Error::Error;
};

/// Exchange removal requested at a point with weight < 1.
class EmptyPoint : public Error {
 public:
  using Error::Error;
};

class InfeasibleStart : public Error {
 public:
  using Error::Error;
};

/// Efficient rounding requires N >= support size.
class TooFewTrials : public Error {
 public:
  using Error::Error;
};

class BadParams : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace aqua
