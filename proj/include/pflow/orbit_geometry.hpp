#pragma once

#include <functional>
#include <span>
#include <vector>

#include "pflow/flow.hpp"

namespace pflow {

/// Length, diameter and speed data of one periodic orbit, with the two
/// quantitative inequalities: 2*diameter <= length and
/// length <= period * sup_speed.
struct OrbitGeometry {
  double period = 0;
  double length = 0;
  double diameter = 0;
  double sup_speed = 0;
  double slack_diameter = 0;  // length - 2*diameter
  double slack_speed = 0;     // period*sup_speed - length
  double quad_err = 0;        // |l(2n) - l(n)| / l(2n)
  int quad_n = 0;
};

/// Arc length by composite Simpson quadrature of |F(Phi(x,t))| over one
/// minimal period with quad_n panels; diameter as the max pairwise distance
/// over quad_n sampled orbit points. Throws QuadratureNonConverged when
/// doubling the panel count still moves the length beyond quad_tol
/// (relative), and InvalidParam when period <= 0.
OrbitGeometry orbit_geometry(const FlowSpec& flow, const Point& x,
                             double period, int quad_n = 4096,
                             double quad_tol = 1e-7);

/// A sampled finite cyclic action: generator of order p on a sample of
/// cl(U), with the detected sampled boundary.
struct CyclicActionSample {
  std::function<Point(const Point&)> generator;
  int p = 2;
  std::vector<Point> samples;
  std::vector<std::uint8_t> is_boundary;
};

struct DressReport {
  double D = 0;  // inradius: max over samples of min distance to boundary
  double C = 0;  // max boundary displacement over powers of the generator
  bool holds = false;
};

/// Dress inequality D(U) < C(U) on samples. Throws TrivialAction when every
/// displacement is below verify_tol.
DressReport dress_bound_check(const CyclicActionSample& action,
                              const Domain& metric, double sample_tol,
                              double verify_tol = 1e-9);

struct HoffmanMannReport {
  Point x_star;
  int a_star = 0;
  double ratio = 0;  // d(z,x) / d(x, gen^a(x)) at the witness
  bool holds = false;
  std::string face;  // "sphere" or "flat" (boundary case)
};

/// Searches the sampled sphere dB_{r/2}(z) (interior case, constant 2) or
/// d(B_{2r/3}(z) cap half-space) (boundary case, constant 4) for a witness
/// x, a with d(z,x) <= K * d(x, gen^a(x)). Throws TrivialAction.
HoffmanMannReport hoffman_mann_check(const CyclicActionSample& action,
                                     const Domain& metric, const Point& z,
                                     double r, bool interior,
                                     int sphere_samples = 256,
                                     double verify_tol = 1e-9);

/// Samples cl(U) on a regular lattice; a sample is boundary when one of its
/// lattice neighbors falls outside U (the sampled-closure approximation).
CyclicActionSample cyclic_action_from_grid(
    const std::vector<Interval>& box, const std::vector<std::size_t>& counts,
    const std::function<bool(const Point&)>& mask,
    std::function<Point(const Point&)> generator, int p);

}  // namespace pflow
