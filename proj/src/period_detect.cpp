#include "pflow/period_detect.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pflow/errors.hpp"
#include "pflow/kernels.hpp"

namespace pflow {

const char* to_string(PeriodStatus s) {
  switch (s) {
    case PeriodStatus::Fixed: return "fixed";
    case PeriodStatus::Periodic: return "periodic";
    case PeriodStatus::NonPeriodicEvidence: return "nonperiodic_evidence";
    case PeriodStatus::Unknown: return "unknown";
  }
  return "?";
}

namespace {

constexpr double kGolden = 0.6180339887498949;

struct GoldenResult {
  double t;
  double g;
};

// Golden-section minimum of g(t) = dist(sampler(t), x) on [lo, hi].
GoldenResult golden_min(FlowSampler& sampler, const Domain& dom,
                        const Point& x, double lo, double hi,
                        double bracket_tol) {
  auto g = [&](double t) {
    auto p = sampler.at(t);
    if (!p) return std::numeric_limits<double>::infinity();
    return dom.distance(x, *p);
  };
  double a = lo, b = hi;
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = g(x1), f2 = g(x2);
  const double floor_width = 4 * std::numeric_limits<double>::epsilon();
  for (int it = 0; it < 200; ++it) {
    if (b - a <= std::max(bracket_tol, floor_width * std::max(1.0, b))) break;
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = g(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = g(x2);
    }
  }
  double tm = 0.5 * (a + b);
  return {tm, g(tm)};
}

struct ScanState {
  double evidence2 = std::numeric_limits<double>::infinity();
  double max_g2 = 0;
  double covered = 0;
};

}  // namespace

PeriodResult classify_point(const FlowSpec& flow, const Point& x,
                            const DetectorConfig& cfg) {
  const Domain& dom = flow.domain;
  const std::size_t dim = dom.dim();
  const auto& K = kernels::ops();

  PeriodResult res;
  res.horizon = 0;

  // Local speed; a point whose immediate motion exits the box is Unknown.
  double speed;
  Vec f0(dim);
  bool have_field = true;
  try {
    try {
      f0 = evaluate_field(flow, x);
      speed = f0.norm();
    } catch (const NotDifferentiable&) {
      have_field = false;
      speed = local_speed(flow, x);
    }
  } catch (const Error&) {
    res.status = PeriodStatus::Unknown;
    res.left_domain = true;
    return res;
  }

  // Fixed takes precedence over Periodic.
  if (speed < cfg.fixed_tol) {
    double sup = 0;
    bool stayed = true;
    for (int i = 1; i <= 32 && stayed; ++i) {
      double t = cfg.horizon * i / 32.0;
      try {
        sup = std::max(sup, dom.distance(x, evaluate_flow(flow, x, t)));
      } catch (const Error&) {
        stayed = false;
      }
      if (sup >= cfg.fixed_tol) break;
    }
    if (stayed && sup < cfg.fixed_tol) {
      res.status = PeriodStatus::Fixed;
      res.return_residual = sup;
      res.horizon = cfg.horizon;
      return res;
    }
  }

  const double t_floor =
      cfg.t_floor > 0 ? cfg.t_floor
                      : 10.0 * cfg.fixed_tol / std::max(speed, 1e-12);

  // First scan window from the local curvature of the orbit: for a circular
  // orbit 2*pi*|F| / |dF/dt along the flow| is exactly the period.
  double w0 = cfg.t_scan_min;
  if (w0 <= 0) {
    double t_est = cfg.horizon;
    if (have_field && speed > 1e-12) {
      try {
        double hc = std::min(1e-3 / speed, cfg.horizon * 1e-3);
        Point x1 = evaluate_flow(flow, x, hc);
        Vec f1 = evaluate_field(flow, x1);
        double acc = ((f1 - f0) * (1.0 / hc)).norm();
        if (acc > 1e-12) t_est = 2 * M_PI * speed / acc;
      } catch (const Error&) {
        // fall through with the default estimate
      }
    }
    w0 = std::clamp(t_est / 8.0, cfg.horizon / 1048576.0, cfg.horizon / 4.0);
    w0 = std::max(w0, 8 * t_floor);
  }
  w0 = std::min(w0, cfg.horizon);

  FlowSampler sampler(flow, x);
  ScanState scan;

  const int N = std::max(cfg.octave_samples, 16);
  std::vector<double> ts(N);
  std::vector<std::vector<double>> soa(dim, std::vector<double>(N));
  std::vector<double*> soa_ptr(dim);
  for (std::size_t c = 0; c < dim; ++c) soa_ptr[c] = soa[c].data();
  std::vector<double> g2(N);

  // Carry the last two samples across window boundaries so minima falling on
  // an edge are still bracketed by a full triple.
  double prev_t[2] = {0, 0};
  double prev_g2[2] = {std::numeric_limits<double>::infinity(),
                       std::numeric_limits<double>::infinity()};
  int carried = 0;

  // A candidate return only counts once the orbit has visibly departed;
  // otherwise a numerically-fixed point (tiny orbit diameter) would report
  // junk periods wherever g sits below return_tol for every t.
  auto try_candidate = [&](double lo, double hi) -> std::optional<double> {
    if (scan.max_g2 < cfg.fixed_tol * cfg.fixed_tol) return std::nullopt;
    GoldenResult r = golden_min(sampler, dom, x, std::max(lo, 0.0), hi,
                                cfg.refine_bracket);
    if (r.g < cfg.return_tol && r.t >= t_floor) return r.t;
    return std::nullopt;
  };

  double detected = -1;
  double w_lo = 0, w_hi = w0;
  bool stopped_early = false;

  while (detected < 0) {
    const double step = (w_hi - w_lo) / N;
    for (int i = 0; i < N; ++i) ts[i] = w_lo + step * (i + 1);
    std::size_t got = sampler.sample(ts.data(), N, soa_ptr.data());
    if (got > 0) {
      K.dist2_batch(soa_ptr.data(), x.data(), dom.periodic_mask(), dim, got,
                    g2.data());
      scan.covered = ts[got - 1];

      // Max slope of g over the window scales the dip threshold.
      double max_dg = 0;
      {
        double gp = carried ? std::sqrt(prev_g2[carried - 1]) : 0;
        for (std::size_t i = 0; i < got; ++i) {
          double gi = std::sqrt(g2[i]);
          if (i > 0 || carried) max_dg = std::max(max_dg, std::abs(gi - gp));
          gp = gi;
        }
      }
      const double dip = 4.0 * max_dg + cfg.return_tol;
      const double dip2 = dip * dip;

      // Evidence: min of g past t_floor; also track the overall excursion.
      for (std::size_t i = 0; i < got; ++i) {
        if (ts[i] >= t_floor) scan.evidence2 = std::min(scan.evidence2, g2[i]);
        scan.max_g2 = std::max(scan.max_g2, g2[i]);
      }

      // Local minima (with the carried boundary samples) below the dip
      // threshold, refined in time order.
      auto value = [&](long j) -> double {
        if (j < 0) {
          long k = j + carried;
          return k >= 0 ? prev_g2[k] : std::numeric_limits<double>::infinity();
        }
        return g2[static_cast<std::size_t>(j)];
      };
      auto time_of = [&](long j) -> double {
        if (j < 0) {
          long k = j + carried;
          return k >= 0 ? prev_t[k] : 0.0;
        }
        return ts[static_cast<std::size_t>(j)];
      };
      for (long i = -(carried > 0 ? 1 : 0);
           i < static_cast<long>(got) - 1 && detected < 0; ++i) {
        double gm = value(i);
        if (gm > dip2) continue;
        bool is_min = gm <= value(i + 1) && gm < value(i - 1);
        if (!is_min && gm >= cfg.return_tol * cfg.return_tol) continue;
        double lo = time_of(i - 1), hi = time_of(i + 1);
        if (hi <= lo) continue;
        if (auto t = try_candidate(lo, hi)) detected = *t;
      }

      if (got >= 2) {
        prev_t[0] = ts[got - 2];
        prev_t[1] = ts[got - 1];
        prev_g2[0] = g2[got - 2];
        prev_g2[1] = g2[got - 1];
        carried = 2;
      } else if (got == 1) {
        prev_t[0] = prev_t[1];
        prev_g2[0] = prev_g2[1];
        prev_t[1] = ts[0];
        prev_g2[1] = g2[0];
        carried = std::min(carried + 1, 2);
      }
    }
    if (got < static_cast<std::size_t>(N)) {
      stopped_early = true;
      break;
    }
    if (w_hi >= cfg.horizon) break;
    w_lo = w_hi;
    w_hi = std::min(2 * w_hi, cfg.horizon);
  }

  if (detected < 0) {
    res.evidence = std::isfinite(scan.evidence2) ? std::sqrt(scan.evidence2) : 0;
    res.horizon = scan.covered;
    res.left_domain = sampler.left_domain();
    if (!stopped_early && scan.max_g2 < cfg.fixed_tol * cfg.fixed_tol) {
      // The orbit never left a fixed_tol-ball around x over the whole scan.
      res.status = PeriodStatus::Fixed;
      res.return_residual = std::sqrt(scan.max_g2);
      return res;
    }
    res.status = stopped_early ? PeriodStatus::Unknown
                               : PeriodStatus::NonPeriodicEvidence;
    return res;
  }

  // Minimality: divide the candidate by m = 2..m_max and accept any smaller
  // refined return, repeating until stable.
  double T = detected;
  for (int round = 0; round < 8; ++round) {
    bool improved = false;
    for (int m = 2; m <= cfg.m_max && !improved; ++m) {
      double tm = T / m;
      if (tm <= std::max(t_floor, 64 * cfg.refine_bracket)) continue;
      double d = 0.02 * tm;
      if (auto t = try_candidate(tm - d, tm + d)) {
        T = *t;
        improved = true;
      }
    }
    if (!improved) break;
  }

  auto pT = sampler.at(T);
  res.status = PeriodStatus::Periodic;
  res.minimal_period = T;
  res.return_residual = pT ? dom.distance(x, *pT) : 0.0;
  res.horizon = scan.covered;
  return res;
}

std::vector<std::pair<Point, PeriodResult>> period_lower_bound_probe(
    const FlowSpec& flow, const Point& z, std::span<const double> radii,
    const DetectorConfig& cfg, std::uint64_t seed, int per_radius) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t dim = flow.domain.dim();

  std::vector<std::pair<Point, PeriodResult>> out;
  for (double r : radii) {
    for (int k = 0; k < per_radius; ++k) {
      Vec dir(dim);
      double n2 = 0;
      do {
        for (std::size_t c = 0; c < dim; ++c) dir[c] = gauss(rng);
        n2 = dir.norm2();
      } while (n2 < 1e-12);
      dir *= r / std::sqrt(n2);
      Point p = flow.domain.wrap(z + dir);
      if (!flow.domain.contains(p)) continue;
      out.emplace_back(p, classify_point(flow, p, cfg));
    }
  }
  return out;
}

}  // namespace pflow
