#include "pflow/orbit_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pflow/errors.hpp"
#include "pflow/kernels.hpp"

namespace pflow {

OrbitGeometry orbit_geometry(const FlowSpec& flow, const Point& x,
                             double period, int quad_n, double quad_tol) {
  if (!(period > 0)) throw InvalidParam("orbit_geometry needs a periodic point");
  if (quad_n < 8 || quad_n % 2) throw InvalidParam("quad_n must be even, >= 8");
  const std::size_t dim = flow.domain.dim();
  const auto& K = kernels::ops();

  const int N = 2 * quad_n;  // fine grid; the coarse sum reuses even nodes
  FlowSampler sampler(flow, x);
  std::vector<double> speeds(N + 1);
  std::vector<std::vector<double>> soa(dim, std::vector<double>(quad_n));
  std::vector<const double*> soa_ptr(dim);
  for (std::size_t c = 0; c < dim; ++c) soa_ptr[c] = soa[c].data();

  std::size_t kept = 0;
  for (int j = 0; j <= N; ++j) {
    double t = period * j / N;
    auto p = sampler.at(t);
    if (!p) throw TrajectoryLeftDomain("orbit left the domain mid-quadrature", t);
    speeds[j] = evaluate_field(flow, *p).norm();
    if (j % 2 == 0 && j < N) {
      for (std::size_t c = 0; c < dim; ++c) soa[c][kept] = (*p)[c];
      ++kept;
    }
  }

  auto simpson = [&](int stride) {
    const int panels = N / stride;
    const double h = period * stride / N;
    std::vector<double> w(panels + 1), v(panels + 1);
    for (int j = 0; j <= panels; ++j) {
      w[j] = (j == 0 || j == panels) ? 1.0 : (j % 2 ? 4.0 : 2.0);
      v[j] = speeds[j * stride];
    }
    return K.weighted_sum(w.data(), v.data(), panels + 1) * h / 3.0;
  };

  OrbitGeometry g;
  g.period = period;
  g.quad_n = quad_n;
  const double l_fine = simpson(1);
  const double l_coarse = simpson(2);
  g.length = l_fine;
  g.quad_err = std::abs(l_fine - l_coarse) / std::max(l_fine, 1e-300);
  if (g.quad_err > quad_tol)
    throw QuadratureNonConverged("orbit length quadrature did not converge");

  g.diameter = std::sqrt(K.max_pairwise_dist2(
      soa_ptr.data(), flow.domain.periodic_mask(), dim, kept));
  g.sup_speed = *std::max_element(speeds.begin(), speeds.end());
  g.slack_diameter = g.length - 2.0 * g.diameter;
  g.slack_speed = g.period * g.sup_speed - g.length;
  return g;
}

namespace {

double displacement_max(const CyclicActionSample& action, const Domain& metric,
                        const Point& x, int* a_best) {
  Point y = x;
  double best = 0;
  int arg = 0;
  for (int a = 1; a < action.p; ++a) {
    y = action.generator(y);
    double d = metric.distance(x, y);
    if (d > best) {
      best = d;
      arg = a;
    }
  }
  if (a_best) *a_best = arg;
  return best;
}

}  // namespace

DressReport dress_bound_check(const CyclicActionSample& action,
                              const Domain& metric, double sample_tol,
                              double verify_tol) {
  if (action.samples.empty() ||
      action.is_boundary.size() != action.samples.size())
    throw InvalidParam("dress_bound_check needs samples with boundary flags");

  bool nontrivial = false;
  DressReport rep;
  std::vector<std::size_t> boundary;
  for (std::size_t i = 0; i < action.samples.size(); ++i)
    if (action.is_boundary[i]) boundary.push_back(i);
  if (boundary.empty()) throw InvalidParam("no boundary samples detected");

  for (std::size_t i = 0; i < action.samples.size(); ++i) {
    double disp = displacement_max(action, metric, action.samples[i], nullptr);
    if (disp > verify_tol) nontrivial = true;
    if (action.is_boundary[i]) rep.C = std::max(rep.C, disp);
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t b : boundary)
      dmin = std::min(dmin,
                      metric.distance(action.samples[i], action.samples[b]));
    rep.D = std::max(rep.D, dmin);
  }
  if (!nontrivial)
    throw TrivialAction("generator is the identity on every sample");
  rep.holds = rep.D < rep.C + sample_tol;
  return rep;
}

HoffmanMannReport hoffman_mann_check(const CyclicActionSample& action,
                                     const Domain& metric, const Point& z,
                                     double r, bool interior,
                                     int sphere_samples, double verify_tol) {
  const std::size_t dim = z.size();
  const double K = interior ? 2.0 : 4.0;
  const double rad = interior ? r / 2.0 : 2.0 * r / 3.0;
  const auto bc = metric.boundary_coord();
  if (!interior && !bc)
    throw InvalidParam("boundary case needs a half-space domain");

  // Verify z is fixed by the generator.
  if (metric.distance(z, action.generator(z)) > 1e-7)
    throw InvalidParam("generator does not fix z");

  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> gauss;
  struct Cand {
    Point x;
    const char* face;
  };
  std::vector<Cand> cands;
  int guard = 0;
  while (cands.size() < static_cast<std::size_t>(sphere_samples) &&
         guard++ < sphere_samples * 100) {
    Vec v(dim);
    double n2 = 0;
    for (std::size_t c = 0; c < dim; ++c) v[c] = gauss(rng);
    n2 = v.norm2();
    if (n2 < 1e-12) continue;
    v *= rad / std::sqrt(n2);
    if (interior) {
      cands.push_back({z + v, "sphere"});
      continue;
    }
    // Boundary case: hemisphere x_bc >= 0, plus points of the flat face.
    if (v[*bc] < 0) v[*bc] = -v[*bc];
    cands.push_back({z + v, "sphere"});
    Vec w = v;
    w[*bc] = 0;
    double wn = w.norm();
    if (wn > 1e-12) {
      std::uniform_real_distribution<double> ur(0.1, 1.0);
      w *= rad * ur(rng) / wn;
      cands.push_back({z + w, "flat"});
    }
  }

  HoffmanMannReport rep;
  rep.ratio = std::numeric_limits<double>::infinity();
  bool nontrivial = false;
  for (const auto& cand : cands) {
    int a = 0;
    double disp = displacement_max(action, metric, cand.x, &a);
    if (disp > verify_tol) nontrivial = true;
    if (disp <= 0) continue;
    double ratio = metric.distance(z, cand.x) / disp;
    if (ratio < rep.ratio) {
      rep.ratio = ratio;
      rep.x_star = cand.x;
      rep.a_star = a;
      rep.face = cand.face;
    }
  }
  if (!nontrivial)
    throw TrivialAction("generator is the identity near z");
  rep.holds = rep.ratio <= K + 1e-9;
  return rep;
}

CyclicActionSample cyclic_action_from_grid(
    const std::vector<Interval>& box, const std::vector<std::size_t>& counts,
    const std::function<bool(const Point&)>& mask,
    std::function<Point(const Point&)> generator, int p) {
  const std::size_t dim = box.size();
  std::vector<std::size_t> strides(dim);
  std::size_t total = 1;
  for (std::size_t c = dim; c-- > 0;) {
    strides[c] = total;
    total *= counts[c];
  }
  auto point_at = [&](std::size_t idx) {
    Point pt(dim);
    for (std::size_t c = dim; c-- > 0;) {
      std::size_t i = idx % counts[c];
      idx /= counts[c];
      pt[c] = counts[c] == 1 ? box[c].lo
                             : box[c].lo + (box[c].hi - box[c].lo) *
                                               static_cast<double>(i) /
                                               static_cast<double>(counts[c] - 1);
    }
    return pt;
  };
  std::vector<std::uint8_t> inside(total, 0);
  for (std::size_t i = 0; i < total; ++i)
    inside[i] = (!mask || mask(point_at(i))) ? 1 : 0;

  CyclicActionSample act;
  act.generator = std::move(generator);
  act.p = p;
  for (std::size_t i = 0; i < total; ++i) {
    if (!inside[i]) continue;
    bool boundary = false;
    std::size_t rest = i;
    for (std::size_t c = 0; c < dim && !boundary; ++c) {
      std::size_t ic = (rest / strides[c]) % counts[c];
      if (ic == 0 || ic + 1 == counts[c]) {
        boundary = true;
        break;
      }
      if (!inside[i - strides[c]] || !inside[i + strides[c]]) boundary = true;
    }
    act.samples.push_back(point_at(i));
    act.is_boundary.push_back(boundary ? 1 : 0);
  }
  return act;
}

}  // namespace pflow
