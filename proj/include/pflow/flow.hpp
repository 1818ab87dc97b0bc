#pragma once

#include <functional>
#include <memory>
#include <string>

#include "pflow/geometry.hpp"
#include "pflow/integrate.hpp"
#include "pflow/vecn.hpp"

namespace pflow {

/// Declared smoothness of the flow. C0 flows are representable only in
/// closed form; the vector-field kind requires C1 or better.
enum class Smoothness { C0, C1, C2, Cinf };

/// A flow Phi: M x R -> M, given either in closed form or as a generating
/// vector field plus integrator configuration.
///
/// Closed-form flows may additionally carry an analytic field and Jacobian;
/// these are hints used by evaluate_field / jacobian_at when present. The
/// spec is immutable after construction and safe to share across threads.
struct FlowSpec {
  enum class Kind { ClosedForm, VectorField };

  Kind kind = Kind::ClosedForm;
  Domain domain;
  Smoothness smoothness = Smoothness::Cinf;

  /// Phi(x, t); required for ClosedForm. Angular outputs need not be wrapped.
  std::function<Point(const Point&, double)> closed_form;

  /// Generating vector field F(x) = dPhi/dt at t=0. Required for
  /// VectorField; optional analytic hint for ClosedForm.
  FieldFn field;

  /// Where the analytic field hint is valid (defaults to everywhere).
  std::function<bool(const Point&)> field_valid;

  /// Analytic Jacobian of the field, row-major dim x dim (optional hint).
  std::function<void(const Point&, double*)> field_jacobian;

  IntegratorConfig integrator;
  std::string name;

  void validate() const;
};

/// Phi(x, t). Closed forms are exact up to floating arithmetic; vector
/// fields are integrated within the configured tolerances. Periodic
/// coordinates of the result are wrapped into [0,1).
/// Throws TrajectoryLeftDomain / IntegratorStalled.
Point evaluate_flow(const FlowSpec& flow, const Point& x, double t);

/// The generator F(x). Uses the analytic field when available, otherwise a
/// central finite difference in t with step h = cbrt(eps) * max(1, |x|).
/// For C0 flows the two-step convergence check may throw NotDifferentiable.
Vec evaluate_field(const FlowSpec& flow, const Point& x);

/// Speed |F(x)| that degrades gracefully where the field is undefined:
/// falls back to a displacement quotient for C0 flows.
double local_speed(const FlowSpec& flow, const Point& x);

/// Samples Phi(x, t) for many non-negative t without re-integrating.
///
/// Closed-form flows evaluate directly (with an endpoint box check); vector
/// fields keep one lazily extended dense trajectory. `sample` fills SoA
/// buffers and returns how many entries were produced before the orbit left
/// the domain or the requested times were exhausted.
class FlowSampler {
 public:
  FlowSampler(const FlowSpec& flow, Point x);

  std::size_t sample(const double* ts, std::size_t n, double* const* soa_out);

  /// Single evaluation at t >= 0 (used by refinement); nullopt past a stop.
  std::optional<Point> at(double t);

  bool left_domain() const { return left_domain_; }
  double covered() const { return covered_; }

 private:
  const FlowSpec& flow_;
  Point x_;
  std::unique_ptr<Trajectory> traj_;
  bool left_domain_ = false;
  double covered_ = 0;
};

}  // namespace pflow
