#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pflow/period_detect.hpp"

namespace pflow {

/// Regular lattice over a sub-box of the domain, with an optional membership
/// mask carving out the open set V. Non-periodic axes sample `count` points
/// including both endpoints; periodic axes (box exactly [0,1)) sample left
/// edges and wrap.
struct GridSpec {
  std::vector<Interval> box;
  std::vector<std::size_t> counts;
  std::function<bool(const Point&)> mask;  // nullable = whole box
};

/// Grid-sampled candidate period function theta with repair metadata and
/// verification residuals.
///
/// Invariants of a valid field: residual < verify_tol everywhere; at every
/// periodic node theta = multiplier * minimal_period; theta >= 0 with
/// theta > 0 off fixed points when the field is a nonzero generator.
struct PeriodFunctionField {
  std::vector<Interval> box;
  std::vector<std::size_t> counts;
  std::vector<std::vector<double>> axes;
  std::vector<std::uint8_t> axis_wrap;  // lattice adjacency wraps
  std::vector<std::uint8_t> periodic;   // metric wrap per axis
  std::size_t dim = 0;

  std::vector<std::uint8_t> active;
  std::vector<PeriodResult> per;
  std::vector<double> theta;
  std::vector<long> multiplier;  // n with theta = n*Per; 0 flags fixed points
  std::vector<std::uint8_t> dense_mask;
  std::vector<double> residual;

  bool no_periodic_points = false;
  double max_residual = 0;

  std::size_t n_nodes() const;
  Point point_at(std::size_t idx) const;
  std::vector<std::size_t> index_of(std::size_t idx) const;

  /// Multilinear interpolation; nullopt outside the grid or when the
  /// enclosing cell has inactive corners.
  std::optional<double> interpolate(const Point& p) const;

  /// Nearest active node (rounded lattice position, then a ring search).
  std::optional<std::size_t> nearest_active_node(const Point& p) const;

  bool is_zero(double tol = 0.0) const;
};

struct FieldBuildConfig {
  DetectorConfig detector;
  double continuity_tol = 1e-3;  // relative
  double verify_tol = 1e-6;
  long max_multiplier = 64;
  int threads = 0;
};

/// Classifies every node, seeds theta = Per on the largest component where
/// Per is locally continuous, and repairs discontinuities outward choosing
/// the smallest integer multiplier that matches the extrapolated neighbor
/// value. Components containing non-periodic points get the zero function;
/// a grid with no periodic points at all returns the zero field with
/// no_periodic_points set (the trivial-group branch).
/// Throws InconsistentRepair when neighbors demand conflicting multipliers.
PeriodFunctionField build_period_field(const FlowSpec& flow,
                                       const GridSpec& grid,
                                       const FieldBuildConfig& cfg);

/// Wraps a user-supplied mu into a field on the grid: classifies nodes,
/// stores theta = mu(node) with multiplier round(mu/Per), and verifies the
/// defining identity at every node.
PeriodFunctionField field_from_mu(const FlowSpec& flow, const GridSpec& grid,
                                  const std::function<double(const Point&)>& mu,
                                  const FieldBuildConfig& cfg);

struct VerifyReport {
  double max_residual = 0;
  std::vector<double> residuals;
  std::size_t inconclusive = 0;  // trajectory left the domain
  bool pass = false;
};

/// Checks dist(Phi(x, mu(x)), x) < verify_tol at every sample.
VerifyReport verify_p_function(const FlowSpec& flow,
                               std::span<const Point> samples,
                               const std::function<double(const Point&)>& mu,
                               double verify_tol, int threads = 0);

/// Residual check of a field at its own active nodes.
VerifyReport verify_field(const FlowSpec& flow, const PeriodFunctionField& f,
                          double verify_tol, int threads = 0);

struct RegularityWitness {
  Point x;
  double tau;
  double theta_x;
  double theta_at;
};

struct RegularityReport {
  bool regular = false;
  std::vector<RegularityWitness> witnesses;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // orbit left V
};

struct RegularityConfig {
  int samples_per_point = 16;
  int max_points = 200;
  double continuity_tol = 1e-3;
  std::uint64_t seed = 1;
  int threads = 0;
};

/// Samples (x, tau) with tau in [0, 2*theta(x)] and compares theta at x
/// against theta at Phi(x,tau); values that disagree beyond tolerance are
/// returned as witnesses. Off-node values are confirmed by fresh period
/// detection, so a steep but regular theta does not false-positive.
RegularityReport check_regularity(const FlowSpec& flow,
                                  const PeriodFunctionField& field,
                                  const DetectorConfig& detector,
                                  const RegularityConfig& cfg);

struct ZpActionReport {
  int p = 0;
  double max_pth_iterate_displacement = 0;
  double max_generator_displacement = 0;  // of d itself
  bool identity_on_test_set = false;
  bool divisible = false;
  std::size_t samples_used = 0;
};

struct ZpConfig {
  double verify_tol = 1e-6;
  std::size_t max_samples = 20000;
  std::uint64_t seed = 1;
  int threads = 0;
};

/// Constructs d(x) = Phi(x, theta(x)/p), iterates it p times and reports
/// whether d^p is the identity (always, for a verified regular field) and
/// whether d itself is (iff theta/p is again a period function).
ZpActionReport zp_divisibility_test(const FlowSpec& flow,
                                    const PeriodFunctionField& field, int p,
                                    const ZpConfig& cfg);

struct GeneratorResult {
  PeriodFunctionField field;
  std::string group;  // "trivial" or "n*theta"
  std::vector<int> divisions_applied;
  std::vector<int> primes_tested;
};

/// Divides theta by every prime p <= primes_up_to that passes the Z_p test,
/// repeating until none does. The tested range is reported; irreducibility
/// beyond it is never claimed.
GeneratorResult detect_generator(const FlowSpec& flow,
                                 const PeriodFunctionField& field,
                                 int primes_up_to, const ZpConfig& cfg);

struct CircleActionConfig {
  DetectorConfig detector;
  double fixed_tol = 1e-7;
};

/// Reparametrizes the flow to B(x,t) = Phi(x, t*theta(x)). theta at points
/// off the lattice is reconstructed as (nearest-node multiplier) * (freshly
/// detected minimal period), which keeps B(x,1)=x at detector accuracy.
/// Throws FieldVanishesOffFix when theta vanishes at a non-fixed node.
FlowSpec circle_action(const FlowSpec& flow, const PeriodFunctionField& field,
                       const CircleActionConfig& cfg);

/// Max residual of B(x,1) = x over n random points in the field's box.
double circle_action_identity_residual(const FlowSpec& B,
                                       const PeriodFunctionField& field,
                                       std::uint64_t seed, int n);

/// Hausdorff distance between sampled orbits {A(x, T_A j/N)} and
/// {B(x, T_B j/N)}.
double orbit_hausdorff(const FlowSpec& A, double TA, const FlowSpec& B,
                       double TB, const Point& x, int samples);

struct ExtensionEntry {
  Point target;
  double theta = 0;
  long multiplier = 0;
  // in_field | orbit_trace | neighbor | assumed_dense | fixed_avg | failed
  std::string method;
  double residual = 0;
  std::string message;
};

struct ExtensionConfig {
  DetectorConfig detector;
  double verify_tol = 1e-6;
  double trace_horizon = 0;  // 0 = 2 * max theta
  int trace_samples = 256;
  double adjacency_radius = 0;  // 0 = 2 * max grid spacing
  long max_multiplier = 64;
  bool allow_detection_fallback = true;
  int threads = 0;
};

/// Extends theta along the flow saturation of V: traces each target's orbit
/// into the field's region and copies the (orbit-constant) value. Targets
/// whose orbit never meets V are resolved, when the fallback is enabled, by
/// fresh period detection with a multiplier propagated from the nearest
/// resolved reference, or assumed dense (n=1) when isolated; otherwise they
/// fail with NotInSaturation recorded in the entry.
std::vector<ExtensionEntry> extend_period_function(
    const FlowSpec& flow, const PeriodFunctionField& field,
    std::span<const Point> targets, const ExtensionConfig& cfg);

struct ConditionSamples {
  double radius = 0;
  double value = 0;
};

struct FixedPointProbe {
  Point z;
  bool b_regular = false;             // (B) regularity near z
  std::vector<ConditionSamples> c;    // (C) continuity modulus of d_alpha
  bool d_pth_power_identity = false;  // (D)
  double d_max_displacement = 0;
  std::vector<ConditionSamples> e_ratios;  // (E) d(z,x_i)/diam(orb cap W)
  double e_constant = 0;
  bool e_holds = false;  // constant <= 4
};

struct ConditionReport {
  bool a_holds = false;
  double a_bound = 0;
  std::size_t a_unbounded_hits = 0;
  std::vector<FixedPointProbe> fixed_points;
  int alpha_q = 1;
  int alpha_p = 2;
};

struct ProbeConfig {
  DetectorConfig detector;
  double verify_tol = 1e-6;
  double ball_radius = 0.25;  // W around each fixed point
  int radii_levels = 5;
  std::uint64_t seed = 1;
  int threads = 0;
};

/// Probes boundedness of periods (A), regularity near fixed points (B), the
/// continuity modulus of d_alpha (C), its p-th power (D), and the orbit
/// diameter ratios (E) with the constant-4 bound.
ConditionReport probe_conditions(const FlowSpec& flow,
                                 const PeriodFunctionField& field,
                                 std::span<const Point> fixed_points,
                                 int alpha_q, int alpha_p,
                                 const ProbeConfig& cfg);

}  // namespace pflow
