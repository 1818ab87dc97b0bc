#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "pflow/geometry.hpp"
#include "pflow/vecn.hpp"

namespace pflow {

/// Right-hand side of an autonomous ODE: dxdt = f(x).
using FieldFn = std::function<void(std::span<const double> x, std::span<double> dxdt)>;

struct IntegratorConfig {
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  double max_step = std::numeric_limits<double>::infinity();
  double max_horizon = 1e4;
};

/// Lazily extended dense solution of an IVP, integrated with an adaptive
/// Dormand-Prince 5(4) pair. Query times must be >= 0; the trajectory is
/// extended on demand and every accepted step keeps its fifth-order
/// continuous extension, so evaluation within the integrated range is O(log
/// steps) and refinement never re-integrates.
///
/// Integration stops (without throwing) when the state leaves the domain box
/// or the step size underflows; `stop_reason` and `max_time` report how far
/// the solution reaches. Angular coordinates are integrated unwrapped and
/// wrapped only on emission.
class Trajectory {
 public:
  enum class Stop { None, LeftDomain, Stalled };

  /// direction = +1 integrates forward in time, -1 backward; queries are in
  /// the positive parameter s, representing t = direction * s.
  Trajectory(FieldFn field, const Domain* domain, Point y0,
             IntegratorConfig cfg, double direction = 1.0);

  /// State at parameter s >= 0, or nullopt when s lies past a stop.
  std::optional<Point> at(double s);

  /// Largest parameter the solution currently reaches.
  double max_time() const { return reach_; }
  Stop stop_reason() const { return stop_; }
  /// Parameter at which integration stopped (meaningful when stopped).
  double stop_time() const { return stop_time_; }

  std::size_t steps() const { return steps_.size(); }

 private:
  struct Step {
    double t0, h;
    // Continuous extension coefficients, 5 per component.
    std::vector<double> r;
  };

  bool advance();  // one accepted step; false when stopped
  void eval_step(const Step& s, double t, Point& out) const;

  FieldFn field_;
  const Domain* domain_;
  IntegratorConfig cfg_;
  double direction_;
  std::size_t n_;

  std::vector<Step> steps_;
  double reach_ = 0;
  Stop stop_ = Stop::None;
  double stop_time_ = 0;

  // integrator state
  std::vector<double> y_, k1_;
  double t_ = 0;
  double h_ = 0;
  double facold_ = 1e-4;
  // work arrays
  std::vector<double> work_[8];
  std::vector<double> raw_;
};

/// Single-shot convenience: integrates from y0 to time t (signed).
/// Throws TrajectoryLeftDomain / IntegratorStalled on failure.
Point integrate_to(const FieldFn& field, const Domain& domain, const Point& y0,
                   double t, const IntegratorConfig& cfg);

}  // namespace pflow
