#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pflow {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The orbit exits the domain box before the requested time.
class TrajectoryLeftDomain : public Error {
 public:
  TrajectoryLeftDomain(const std::string& msg, double exit_time)
      : Error(msg), exit_time(exit_time) {}
  double exit_time;
};

/// Adaptive step size underflowed.
class IntegratorStalled : public Error {
 public:
  using Error::Error;
};

/// Finite differences of a C0 flow failed the two-step convergence check.
class NotDifferentiable : public Error {
 public:
  using Error::Error;
};

/// Operation requires a flow of class C1 or better.
class NotC1 : public Error {
 public:
  using Error::Error;
};

/// Richardson estimates of a Jacobian disagree beyond tolerance.
class FDNonConvergent : public Error {
 public:
  using Error::Error;
};

/// Eigenvalue cluster separation below tolerance; block structure unreliable.
class IllConditioned : public Error {
 public:
  using Error::Error;
};

/// Two neighbors demand different multipliers during the continuity repair.
class InconsistentRepair : public Error {
 public:
  InconsistentRepair(const std::string& msg, std::size_t node_a, std::size_t node_b)
      : Error(msg), node_a(node_a), node_b(node_b) {}
  std::size_t node_a;
  std::size_t node_b;
};

/// Target orbit never enters the field's domain within the horizon.
class NotInSaturation : public Error {
 public:
  using Error::Error;
};

/// A claimed period function vanishes at a non-fixed point.
class FieldVanishesOffFix : public Error {
 public:
  using Error::Error;
};

/// All displacements of the cyclic action are below tolerance.
class TrivialAction : public Error {
 public:
  using Error::Error;
};

/// Doubling the quadrature panel count still changes the result.
class QuadratureNonConverged : public Error {
 public:
  using Error::Error;
};

class UnknownName : public Error {
 public:
  using Error::Error;
};

class InvalidParam : public Error {
 public:
  using Error::Error;
};

}  // namespace pflow
