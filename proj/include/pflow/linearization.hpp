#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "pflow/period_detect.hpp"

namespace pflow {

/// One real Jordan block: J_size(lambda) for real eigenvalues, or
/// J_size(re +- i*im) for a complex pair (size counts the pair blocks, so a
/// pair block of size q occupies 2q rows).
struct JordanBlock {
  bool complex_pair = false;
  double re = 0;
  double im = 0;
  int size = 1;
};

/// Linear part A = j^1 F(z) with its spectral data.
struct LinearPart {
  std::size_t n = 0;
  std::vector<double> matrix;  // row-major
  std::vector<std::complex<double>> eigenvalues;
  std::vector<JordanBlock> blocks;
  double fd_error = 0;  // Richardson disagreement when FD was used
  double scale = 0;     // spectral norm used for tolerance decisions
};

enum class FixedPointVerdict {
  HyperbolicPart,   // (a) some eigenvalue with Re != 0
  DegenerateBlock,  // (b) a block J_q(0) or J_q(+-ib) with q >= 2
  ZeroLinearPart,   // (c) A = 0
  PeriodicType,     // the rotation-block shape of a C1 generator
  Indeterminate,
};

const char* to_string(FixedPointVerdict v);

struct FixedPointClass {
  FixedPointVerdict verdict = FixedPointVerdict::Indeterminate;
  std::string details;
  LinearPart linear;
};

/// Jacobian of the generating field at a fixed point z: the analytic hint
/// when the flow carries one, otherwise central differences with Richardson
/// extrapolation (two step sizes; their disagreement is recorded and
/// FDNonConvergent is thrown when it exceeds 10x eig_tol).
/// Throws NotC1 for flows declared C0.
LinearPart jacobian_at(const FlowSpec& flow, const Point& z,
                       double fd_step = 0, double eig_tol = 1e-7);

/// Eigenvalues (QR iteration) clustered within eig_tol * |A|, then block
/// sizes from the rank filtration of (A - lambda I)^j computed by SVD with
/// an explicit singular-value cutoff. Throws IllConditioned when two
/// clusters are closer than the decision radius.
LinearPart real_jordan_classify(std::span<const double> matrix_rowmajor,
                                std::size_t n, double eig_tol = 1e-7);

/// Applies the trichotomy: hyperbolic part / degenerate block / zero linear
/// part, with PeriodicType for the semisimple purely-imaginary remainder
/// (at least one nonzero pair; semisimple zero eigenvalues permitted).
FixedPointClass classify_fixed_point(const FlowSpec& flow, const Point& z,
                                     double eig_tol = 1e-7);

struct GammaEstimate {
  double radius = 0;
  double gamma = 0;       // sup |F(Phi(x,t))| / |x-z|
  double quad_fit_m = 0;  // sup |F(Phi(x,t))| / |x-z|^2 (C2 fit)
};

struct GammaConfig {
  int directions = 16;
  int time_samples = 64;
  std::uint64_t seed = 1;
};

/// Empirical gamma of the Hadamard-style bound |F(Phi(x,t))| <= |x-z| *
/// gamma over t in [-T, T], per radius; the quadratic fit column supports
/// the C2 variant when j^1 F(z) = 0.
std::vector<GammaEstimate> gamma_estimate(const FlowSpec& flow, const Point& z,
                                          double T,
                                          std::span<const double> radii,
                                          const GammaConfig& cfg);

struct BlowupRadius {
  double radius = 0;
  double min_period = 0;  // 0 when no periodic sample
  int n_periodic = 0;
  int n_evidence = 0;  // non-return evidence (incl. escape without return)
  int n_samples = 0;
};

struct BlowupReport {
  std::vector<BlowupRadius> radii;
  bool periods_strictly_increase = false;
  bool blowup_observed = false;
};

struct BlowupConfig {
  DetectorConfig detector;
  int directions = 32;
  std::size_t cone_coord = 0;
  /// Explicit probe directions (unit vectors); overrides cone sampling.
  std::vector<Vec> explicit_dirs;
  std::uint64_t seed = 1;
  int threads = 0;
};

/// Samples the cone {|x_1 - z_1| >= eps * |x - z|} at shrinking radii and
/// classifies each point. Blow-up is reported when the smallest radius
/// shows non-return evidence, or stays periodic with min period beyond
/// threshold_T.
BlowupReport period_blowup_probe(const FlowSpec& flow, const Point& z,
                                 double eps_cone, std::span<const double> radii,
                                 double threshold_T, const BlowupConfig& cfg);

}  // namespace pflow
