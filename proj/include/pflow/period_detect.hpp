#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pflow/flow.hpp"

namespace pflow {

enum class PeriodStatus { Fixed, Periodic, NonPeriodicEvidence, Unknown };

const char* to_string(PeriodStatus s);

/// Classification of one point: the numerical ground truth Per(x).
struct PeriodResult {
  PeriodStatus status = PeriodStatus::Unknown;
  /// Minimal period (Periodic only).
  double minimal_period = 0;
  /// Distance at the detected return (Periodic) or at the closest approach.
  double return_residual = 0;
  /// For non-returns: min over the scanned horizon of dist(Phi(x,t),x) for
  /// t >= t_floor, bounded away from zero.
  double evidence = 0;
  /// Scan length actually covered.
  double horizon = 0;
  /// The orbit exited the domain box during the scan.
  bool left_domain = false;
};

struct DetectorConfig {
  double horizon = 1e4;
  double return_tol = 1e-6;
  double fixed_tol = 1e-7;
  /// Returns below this time are ignored; 0 = auto from local speed
  /// (10 * fixed_tol / max(|F(x)|, 1e-12)).
  double t_floor = 0;
  /// Subdivision depth of the minimality certificate.
  int m_max = 12;
  /// Golden-section bracket width at which refinement stops.
  double refine_bracket = 1e-12;
  /// Samples per octave of the geometric scan.
  int octave_samples = 1024;
  /// First scan window; 0 = auto from the local curvature of the orbit.
  double t_scan_min = 0;
};

/// Scans g(t) = dist(Phi(x,t), x) over geometrically growing windows,
/// refines candidate minima by golden section, and certifies minimality by
/// subdividing the detected period. Fixed takes precedence over Periodic:
/// points with |F(x)| < fixed_tol that stay put over a time grid are Fixed.
///
/// An exhausted horizon yields NonPeriodicEvidence with the observed
/// positive infimum; an orbit that exits the domain box yields Unknown (the
/// evidence and left_domain fields still record what was seen).
PeriodResult classify_point(const FlowSpec& flow, const Point& x,
                            const DetectorConfig& cfg);

/// Samples points at the given distances from z and classifies each;
/// near a non-fixed z the detected minimal periods stay bounded below.
std::vector<std::pair<Point, PeriodResult>> period_lower_bound_probe(
    const FlowSpec& flow, const Point& z, std::span<const double> radii,
    const DetectorConfig& cfg, std::uint64_t seed, int per_radius = 16);

}  // namespace pflow
