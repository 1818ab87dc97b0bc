#include "pflow/period_function.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <mutex>
#include <numeric>
#include <random>

#include "pflow/errors.hpp"
#include "pflow/kernels.hpp"
#include "pflow/parallel.hpp"

namespace pflow {

namespace {

enum NodeStatus : std::uint8_t {
  kInactive = 0,
  kPeriodic = 1,
  kFixed = 2,
  kNonPeriodic = 3,
};

NodeStatus status_of(const PeriodResult& r) {
  switch (r.status) {
    case PeriodStatus::Fixed: return kFixed;
    case PeriodStatus::Periodic: return kPeriodic;
    default: return kNonPeriodic;
  }
}

std::vector<std::size_t> strides_of(const std::vector<std::size_t>& counts) {
  std::vector<std::size_t> s(counts.size());
  std::size_t acc = 1;
  for (std::size_t c = counts.size(); c-- > 0;) {
    s[c] = acc;
    acc *= counts[c];
  }
  return s;
}

}  // namespace

std::size_t PeriodFunctionField::n_nodes() const {
  std::size_t n = 1;
  for (auto c : counts) n *= c;
  return n;
}

std::vector<std::size_t> PeriodFunctionField::index_of(std::size_t idx) const {
  std::vector<std::size_t> mi(dim);
  for (std::size_t c = dim; c-- > 0;) {
    mi[c] = idx % counts[c];
    idx /= counts[c];
  }
  return mi;
}

Point PeriodFunctionField::point_at(std::size_t idx) const {
  Point p(dim);
  for (std::size_t c = dim; c-- > 0;) {
    p[c] = axes[c][idx % counts[c]];
    idx /= counts[c];
  }
  return p;
}

std::optional<double> PeriodFunctionField::interpolate(const Point& p) const {
  std::size_t i0[Vec::kMaxDim];
  double frac[Vec::kMaxDim];
  for (std::size_t c = 0; c < dim; ++c) {
    const auto& ax = axes[c];
    const std::size_t n = counts[c];
    if (axis_wrap[c]) {
      double u = wrap_unit(p[c]) * static_cast<double>(n);
      std::size_t k = static_cast<std::size_t>(u) % n;
      i0[c] = k;
      frac[c] = u - std::floor(u);
    } else {
      if (n == 1) {
        if (std::abs(p[c] - ax[0]) > 1e-9) return std::nullopt;
        i0[c] = 0;
        frac[c] = 0;
        continue;
      }
      double h = ax[1] - ax[0];
      double u = (p[c] - ax[0]) / h;
      if (u < -1e-9 || u > static_cast<double>(n - 1) + 1e-9)
        return std::nullopt;
      u = std::clamp(u, 0.0, static_cast<double>(n - 1));
      std::size_t k = std::min(static_cast<std::size_t>(u), n - 2);
      i0[c] = k;
      frac[c] = u - static_cast<double>(k);
    }
  }
  const auto strides = strides_of(counts);
  double acc = 0;
  const std::size_t corners = std::size_t{1} << dim;
  for (std::size_t m = 0; m < corners; ++m) {
    double w = 1;
    std::size_t idx = 0;
    for (std::size_t c = 0; c < dim; ++c) {
      bool hi = (m >> c) & 1u;
      std::size_t ic = i0[c] + (hi ? 1 : 0);
      if (axis_wrap[c]) ic %= counts[c];
      idx += ic * strides[c];
      w *= hi ? frac[c] : 1.0 - frac[c];
    }
    if (!active[idx]) return std::nullopt;
    acc += w * theta[idx];
  }
  return acc;
}

std::optional<std::size_t> PeriodFunctionField::nearest_active_node(
    const Point& p) const {
  const auto strides = strides_of(counts);
  std::size_t start = 0;
  for (std::size_t c = 0; c < dim; ++c) {
    const auto& ax = axes[c];
    const std::size_t n = counts[c];
    std::size_t k;
    if (axis_wrap[c]) {
      k = static_cast<std::size_t>(
              std::llround(wrap_unit(p[c]) * static_cast<double>(n))) %
          n;
    } else if (n == 1) {
      k = 0;
    } else {
      double h = ax[1] - ax[0];
      long r = std::lround((p[c] - ax[0]) / h);
      k = static_cast<std::size_t>(std::clamp<long>(r, 0, long(n) - 1));
    }
    start += k * strides[c];
  }
  if (active[start]) return start;
  // Ring search by lattice BFS.
  std::vector<std::uint8_t> seen(n_nodes(), 0);
  std::deque<std::size_t> q{start};
  seen[start] = 1;
  while (!q.empty()) {
    std::size_t u = q.front();
    q.pop_front();
    if (active[u]) return u;
    std::size_t rest = u;
    for (std::size_t c = 0; c < dim; ++c) {
      std::size_t ic = (rest / strides[c]) % counts[c];
      for (int d = -1; d <= 1; d += 2) {
        long j = static_cast<long>(ic) + d;
        if (axis_wrap[c]) {
          j = (j + static_cast<long>(counts[c])) % static_cast<long>(counts[c]);
        } else if (j < 0 || j >= static_cast<long>(counts[c])) {
          continue;
        }
        std::size_t v = u + (static_cast<std::size_t>(j) - ic) * strides[c];
        if (!seen[v]) {
          seen[v] = 1;
          q.push_back(v);
        }
      }
    }
  }
  return std::nullopt;
}

bool PeriodFunctionField::is_zero(double tol) const {
  for (std::size_t i = 0; i < theta.size(); ++i)
    if (active[i] && std::abs(theta[i]) > tol) return false;
  return true;
}

namespace {

PeriodFunctionField make_lattice(const FlowSpec& flow, const GridSpec& grid) {
  PeriodFunctionField f;
  f.dim = grid.box.size();
  if (f.dim != flow.domain.dim())
    throw InvalidParam("grid dimension does not match the flow domain");
  if (grid.counts.size() != f.dim)
    throw InvalidParam("grid counts/box size mismatch");
  f.box = grid.box;
  f.counts = grid.counts;
  f.axes.resize(f.dim);
  f.axis_wrap.assign(f.dim, 0);
  f.periodic.assign(f.dim, 0);
  for (std::size_t c = 0; c < f.dim; ++c) {
    const std::size_t n = grid.counts[c];
    if (n == 0) throw InvalidParam("grid axis with zero points");
    f.periodic[c] = flow.domain.is_periodic(c) ? 1 : 0;
    const bool full_circle = f.periodic[c] && grid.box[c].lo == 0.0 &&
                             grid.box[c].hi == 1.0;
    f.axis_wrap[c] = full_circle ? 1 : 0;
    f.axes[c].resize(n);
    if (full_circle) {
      for (std::size_t i = 0; i < n; ++i)
        f.axes[c][i] = static_cast<double>(i) / static_cast<double>(n);
    } else if (n == 1) {
      f.axes[c][0] = 0.5 * (grid.box[c].lo + grid.box[c].hi);
    } else {
      for (std::size_t i = 0; i < n; ++i)
        f.axes[c][i] = grid.box[c].lo + (grid.box[c].hi - grid.box[c].lo) *
                                            static_cast<double>(i) /
                                            static_cast<double>(n - 1);
    }
  }
  const std::size_t total = f.n_nodes();
  f.active.assign(total, 1);
  if (grid.mask) {
    for (std::size_t i = 0; i < total; ++i)
      f.active[i] = grid.mask(f.point_at(i)) ? 1 : 0;
  }
  f.per.resize(total);
  f.theta.assign(total, 0.0);
  f.multiplier.assign(total, 0);
  f.dense_mask.assign(total, 0);
  f.residual.assign(total, 0.0);
  return f;
}

// Visits lattice neighbors of u: fn(v, prev) where prev is the node on the
// far side of v along the same axis (npos at a lattice edge).
template <typename Fn>
void for_neighbors(const PeriodFunctionField& f,
                   const std::vector<std::size_t>& strides, std::size_t u,
                   Fn&& fn) {
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  for (std::size_t c = 0; c < f.dim; ++c) {
    const long n = static_cast<long>(f.counts[c]);
    const long ic = static_cast<long>((u / strides[c]) % f.counts[c]);
    for (int d = -1; d <= 1; d += 2) {
      long j = ic + d;
      long j2 = ic + 2 * d;
      if (f.axis_wrap[c]) {
        j = (j + n) % n;
        j2 = (j2 + 2 * n) % n;
      } else {
        if (j < 0 || j >= n) continue;
        if (j2 < 0 || j2 >= n) j2 = -1;
      }
      std::size_t v = u + (static_cast<std::size_t>(j) - ic) * strides[c];
      std::size_t prev =
          j2 < 0 ? npos : u + (static_cast<std::size_t>(j2) - ic) * strides[c];
      fn(v, prev);
    }
  }
}

void classify_nodes(const FlowSpec& flow, PeriodFunctionField& f,
                    const FieldBuildConfig& cfg) {
  const std::size_t total = f.n_nodes();
  parallel_for(total, cfg.threads, [&](std::size_t i) {
    if (!f.active[i]) return;
    f.per[i] = classify_point(flow, f.point_at(i), cfg.detector);
  });
}

// Continuity repair over the classified lattice. See the header notes: the
// reference value for a frontier node is a one-sided linear extrapolation
// along the approach axis, and multiplier disagreements raise
// InconsistentRepair with the conflicting edge.
void repair_lattice(PeriodFunctionField& f, const FieldBuildConfig& cfg) {
  const std::size_t total = f.n_nodes();
  const auto strides = strides_of(f.counts);

  std::vector<std::uint8_t> st(total, kInactive);
  bool any_periodic = false;
  for (std::size_t i = 0; i < total; ++i) {
    if (!f.active[i]) continue;
    st[i] = status_of(f.per[i]);
    any_periodic |= (st[i] == kPeriodic);
  }
  if (!any_periodic) {
    f.no_periodic_points = true;
    return;
  }

  // Components of the active non-fixed set.
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> comp(total, kNone);
  std::size_t ncomp = 0;
  for (std::size_t i = 0; i < total; ++i) {
    if (comp[i] != kNone || (st[i] != kPeriodic && st[i] != kNonPeriodic))
      continue;
    std::deque<std::size_t> q{i};
    comp[i] = ncomp;
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop_front();
      for_neighbors(f, strides, u, [&](std::size_t v, std::size_t) {
        if (comp[v] == kNone && (st[v] == kPeriodic || st[v] == kNonPeriodic)) {
          comp[v] = ncomp;
          q.push_back(v);
        }
      });
    }
    ++ncomp;
  }

  std::vector<std::uint8_t> comp_zero(ncomp, 0);
  for (std::size_t i = 0; i < total; ++i)
    if (st[i] == kNonPeriodic) comp_zero[comp[i]] = 1;

  std::vector<std::uint8_t> assigned(total, 0);
  for (std::size_t i = 0; i < total; ++i) {
    if (comp[i] != kNone && comp_zero[comp[i]]) {
      f.theta[i] = 0;
      f.multiplier[i] = 0;
      assigned[i] = 1;
    }
  }

  // Seed each nonzero component: the largest sub-component on which Per is
  // locally continuous gets theta = Per.
  std::vector<std::size_t> sub(total, kNone);
  std::vector<std::size_t> sub_size;
  auto edge_continuous = [&](std::size_t u, std::size_t v) {
    double a = f.per[u].minimal_period, b = f.per[v].minimal_period;
    return std::abs(a - b) <= 0.5 * std::min(a, b);
  };
  for (std::size_t i = 0; i < total; ++i) {
    if (sub[i] != kNone || st[i] != kPeriodic || comp_zero[comp[i]]) continue;
    std::size_t label = sub_size.size();
    sub_size.push_back(0);
    std::deque<std::size_t> q{i};
    sub[i] = label;
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop_front();
      ++sub_size[label];
      for_neighbors(f, strides, u, [&](std::size_t v, std::size_t) {
        if (sub[v] == kNone && st[v] == kPeriodic && !comp_zero[comp[v]] &&
            edge_continuous(u, v)) {
          sub[v] = label;
          q.push_back(v);
        }
      });
    }
  }
  std::vector<std::size_t> comp_seed_label(ncomp, kNone);
  for (std::size_t i = 0; i < total; ++i) {
    if (st[i] != kPeriodic || comp_zero[comp[i]]) continue;
    std::size_t& best = comp_seed_label[comp[i]];
    if (best == kNone || sub_size[sub[i]] > sub_size[best]) best = sub[i];
  }

  std::deque<std::size_t> frontier;
  for (std::size_t i = 0; i < total; ++i) {
    if (st[i] == kPeriodic && !comp_zero[comp[i]] &&
        sub[i] == comp_seed_label[comp[i]]) {
      f.theta[i] = f.per[i].minimal_period;
      f.multiplier[i] = 1;
      assigned[i] = 1;
      frontier.push_back(i);
    }
  }

  // Breadth-first continuity repair.
  while (!frontier.empty()) {
    std::size_t xb = frontier.front();
    frontier.pop_front();
    for_neighbors(f, strides, xb, [&](std::size_t y, std::size_t) {
      if (assigned[y] || st[y] != kPeriodic) return;
      const double per_y = f.per[y].minimal_period;
      long chosen = 0;
      std::size_t chosen_from = kNone;
      for_neighbors(f, strides, y, [&](std::size_t nb, std::size_t prev) {
        if (!assigned[nb] || st[nb] != kPeriodic) return;
        double ref = f.theta[nb];
        if (prev != static_cast<std::size_t>(-1) && assigned[prev] &&
            st[prev] == kPeriodic)
          ref = std::max(0.0, 2.0 * f.theta[nb] - f.theta[prev]);
        long n_best = 1;
        double best = std::abs(1.0 * per_y - ref);
        for (long n = 2; n <= cfg.max_multiplier; ++n) {
          double d = std::abs(static_cast<double>(n) * per_y - ref);
          if (d < best) {
            best = d;
            n_best = n;
          }
        }
        const double gate = std::max(
            cfg.continuity_tol * std::max(1.0, f.theta[nb]), 0.45 * per_y);
        if (best > gate)
          throw InconsistentRepair(
              "no multiplier matches the neighbor value within tolerance", nb,
              y);
        if (chosen_from == kNone) {
          chosen = n_best;
          chosen_from = nb;
        } else if (chosen != n_best) {
          throw InconsistentRepair(
              "two neighbors demand different multipliers", chosen_from, nb);
        }
      });
      if (chosen_from == kNone) return;
      f.theta[y] = static_cast<double>(chosen) * per_y;
      f.multiplier[y] = chosen;
      assigned[y] = 1;
      frontier.push_back(y);
    });
  }

  // Fixed points take the average of their assigned non-fixed neighbors.
  for (std::size_t i = 0; i < total; ++i) {
    if (st[i] != kFixed) continue;
    double sum = 0;
    int cnt = 0;
    for_neighbors(f, strides, i, [&](std::size_t v, std::size_t) {
      if (assigned[v] && (st[v] == kPeriodic || st[v] == kNonPeriodic)) {
        sum += f.theta[v];
        ++cnt;
      }
    });
    f.theta[i] = cnt ? sum / cnt : 0.0;
    f.multiplier[i] = 0;
  }
}

void fill_dense_and_residual(const FlowSpec& flow, PeriodFunctionField& f,
                             const FieldBuildConfig& cfg) {
  const std::size_t total = f.n_nodes();
  parallel_for(total, cfg.threads, [&](std::size_t i) {
    if (!f.active[i]) return;
    const auto& r = f.per[i];
    f.dense_mask[i] =
        (r.status == PeriodStatus::Periodic && f.multiplier[i] == 1 &&
         std::abs(f.theta[i] - r.minimal_period) <=
             1e-6 * std::max(1.0, f.theta[i]))
            ? 1
            : 0;
    if (f.theta[i] == 0.0) {
      f.residual[i] = 0.0;
      return;
    }
    Point x = f.point_at(i);
    try {
      f.residual[i] = flow.domain.distance(x, evaluate_flow(flow, x, f.theta[i]));
    } catch (const Error&) {
      f.residual[i] = std::numeric_limits<double>::quiet_NaN();
    }
  });
  double mx = 0;
  for (std::size_t i = 0; i < total; ++i)
    if (f.active[i] && std::isfinite(f.residual[i]))
      mx = std::max(mx, f.residual[i]);
  f.max_residual = mx;
}

}  // namespace

PeriodFunctionField build_period_field(const FlowSpec& flow,
                                       const GridSpec& grid,
                                       const FieldBuildConfig& cfg) {
  PeriodFunctionField f = make_lattice(flow, grid);
  classify_nodes(flow, f, cfg);
  repair_lattice(f, cfg);
  fill_dense_and_residual(flow, f, cfg);
  return f;
}

PeriodFunctionField field_from_mu(const FlowSpec& flow, const GridSpec& grid,
                                  const std::function<double(const Point&)>& mu,
                                  const FieldBuildConfig& cfg) {
  PeriodFunctionField f = make_lattice(flow, grid);
  classify_nodes(flow, f, cfg);
  const std::size_t total = f.n_nodes();
  for (std::size_t i = 0; i < total; ++i) {
    if (!f.active[i]) continue;
    f.theta[i] = mu(f.point_at(i));
    if (f.per[i].status == PeriodStatus::Periodic &&
        f.per[i].minimal_period > 0)
      f.multiplier[i] = std::llround(f.theta[i] / f.per[i].minimal_period);
    else
      f.multiplier[i] = 0;
  }
  fill_dense_and_residual(flow, f, cfg);
  return f;
}

VerifyReport verify_p_function(const FlowSpec& flow,
                               std::span<const Point> samples,
                               const std::function<double(const Point&)>& mu,
                               double verify_tol, int threads) {
  VerifyReport rep;
  rep.residuals.assign(samples.size(), 0.0);
  std::atomic<std::size_t> inconclusive{0};
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    const Point& x = samples[i];
    double m = mu(x);
    if (m == 0.0) {
      rep.residuals[i] = 0.0;
      return;
    }
    try {
      rep.residuals[i] = flow.domain.distance(x, evaluate_flow(flow, x, m));
    } catch (const Error&) {
      rep.residuals[i] = std::numeric_limits<double>::quiet_NaN();
      inconclusive.fetch_add(1);
    }
  });
  rep.inconclusive = inconclusive.load();
  double mx = 0;
  for (double r : rep.residuals)
    if (std::isfinite(r)) mx = std::max(mx, r);
  rep.max_residual = mx;
  rep.pass = mx < verify_tol;
  return rep;
}

VerifyReport verify_field(const FlowSpec& flow, const PeriodFunctionField& f,
                          double verify_tol, int threads) {
  std::vector<Point> pts;
  std::vector<double> vals;
  for (std::size_t i = 0; i < f.n_nodes(); ++i) {
    if (!f.active[i]) continue;
    pts.push_back(f.point_at(i));
    vals.push_back(f.theta[i]);
  }
  VerifyReport rep;
  rep.residuals.assign(pts.size(), 0.0);
  std::atomic<std::size_t> inconclusive{0};
  parallel_for(pts.size(), threads, [&](std::size_t i) {
    if (vals[i] == 0.0) {
      rep.residuals[i] = 0.0;
      return;
    }
    try {
      rep.residuals[i] =
          flow.domain.distance(pts[i], evaluate_flow(flow, pts[i], vals[i]));
    } catch (const Error&) {
      rep.residuals[i] = std::numeric_limits<double>::quiet_NaN();
      inconclusive.fetch_add(1);
    }
  });
  rep.inconclusive = inconclusive.load();
  double mx = 0;
  for (double r : rep.residuals)
    if (std::isfinite(r)) mx = std::max(mx, r);
  rep.max_residual = mx;
  rep.pass = mx < verify_tol;
  return rep;
}

namespace {

// theta at an arbitrary point, reconstructed to detector accuracy:
// (nearest-node multiplier) * (freshly detected minimal period). Falls back
// to interpolation at fixed or undetectable points.
std::optional<double> theta_exact_at(const FlowSpec& flow,
                                     const PeriodFunctionField& field,
                                     const Point& y,
                                     const DetectorConfig& det) {
  auto node = field.nearest_active_node(y);
  if (!node) return std::nullopt;
  long m = field.multiplier[*node];
  if (m == 0) return field.interpolate(y);
  PeriodResult r = classify_point(flow, y, det);
  if (r.status == PeriodStatus::Periodic)
    return static_cast<double>(m) * r.minimal_period;
  if (r.status == PeriodStatus::Fixed) return field.interpolate(y);
  return std::nullopt;
}

std::vector<std::size_t> active_periodic_nodes(const PeriodFunctionField& f) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < f.n_nodes(); ++i)
    if (f.active[i] && f.per[i].status == PeriodStatus::Periodic)
      out.push_back(i);
  return out;
}

}  // namespace

RegularityReport check_regularity(const FlowSpec& flow,
                                  const PeriodFunctionField& field,
                                  const DetectorConfig& detector,
                                  const RegularityConfig& cfg) {
  RegularityReport rep;
  auto nodes = active_periodic_nodes(field);
  if (nodes.empty()) {
    rep.regular = true;
    return rep;
  }
  std::vector<std::size_t> chosen;
  if (nodes.size() <= static_cast<std::size_t>(cfg.max_points)) {
    chosen = nodes;
  } else {
    std::mt19937_64 rng(cfg.seed);
    chosen = nodes;
    std::shuffle(chosen.begin(), chosen.end(), rng);
    chosen.resize(cfg.max_points);
    std::sort(chosen.begin(), chosen.end());
  }

  std::mutex mu;
  std::atomic<std::size_t> checked{0}, skipped{0};
  parallel_for(chosen.size(), cfg.threads, [&](std::size_t k) {
    std::size_t i = chosen[k];
    Point x = field.point_at(i);
    double tx = field.theta[i];
    std::mt19937_64 rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * (i + 1)));
    std::uniform_real_distribution<double> uni(0.0, 2.0 * std::max(tx, 1e-12));
    for (int s = 0; s < cfg.samples_per_point; ++s) {
      double tau = uni(rng);
      Point y;
      try {
        y = evaluate_flow(flow, x, tau);
      } catch (const Error&) {
        skipped.fetch_add(1);
        continue;
      }
      const double tol = cfg.continuity_tol * std::max(1.0, std::abs(tx));
      auto fast = field.interpolate(y);
      if (fast && std::abs(*fast - tx) <= tol) {
        checked.fetch_add(1);
        continue;
      }
      auto exact = theta_exact_at(flow, field, y, detector);
      if (!exact) {
        skipped.fetch_add(1);
        continue;
      }
      checked.fetch_add(1);
      if (std::abs(*exact - tx) > tol) {
        std::lock_guard<std::mutex> lk(mu);
        rep.witnesses.push_back({x, tau, tx, *exact});
      }
    }
  });
  rep.checked = checked.load();
  rep.skipped = skipped.load();
  rep.regular = rep.witnesses.empty();
  return rep;
}

ZpActionReport zp_divisibility_test(const FlowSpec& flow,
                                    const PeriodFunctionField& field, int p,
                                    const ZpConfig& cfg) {
  ZpActionReport rep;
  rep.p = p;
  auto nodes = active_periodic_nodes(field);
  std::vector<std::size_t> chosen;
  if (nodes.size() > cfg.max_samples) {
    const std::size_t stride = nodes.size() / cfg.max_samples + 1;
    for (std::size_t i = 0; i < nodes.size(); i += stride)
      chosen.push_back(nodes[i]);
  } else {
    chosen = nodes;
  }
  rep.samples_used = chosen.size();
  if (chosen.empty()) {
    rep.identity_on_test_set = true;
    rep.divisible = true;
    return rep;
  }

  std::vector<double> d_disp(chosen.size(), 0.0);
  std::vector<double> p_disp(chosen.size(), 0.0);
  parallel_for(chosen.size(), cfg.threads, [&](std::size_t k) {
    std::size_t i = chosen[k];
    Point x = field.point_at(i);
    const double step = field.theta[i] / p;
    if (field.theta[i] == 0.0) return;
    try {
      // theta is constant along the orbit (regularity), so the iterates use
      // the frozen step; this is exactly the computation in the paper's
      // divisibility lemma.
      Point y = x;
      for (int j = 0; j < p; ++j) {
        y = evaluate_flow(flow, y, step);
        if (j == 0) d_disp[k] = flow.domain.distance(x, y);
      }
      p_disp[k] = flow.domain.distance(x, y);
    } catch (const Error&) {
      d_disp[k] = std::numeric_limits<double>::quiet_NaN();
      p_disp[k] = std::numeric_limits<double>::quiet_NaN();
    }
  });
  double mxd = 0, mxp = 0;
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    if (std::isfinite(d_disp[k])) mxd = std::max(mxd, d_disp[k]);
    if (std::isfinite(p_disp[k])) mxp = std::max(mxp, p_disp[k]);
  }
  rep.max_generator_displacement = mxd;
  rep.max_pth_iterate_displacement = mxp;
  rep.identity_on_test_set = mxd < cfg.verify_tol;
  rep.divisible = rep.identity_on_test_set;
  return rep;
}

GeneratorResult detect_generator(const FlowSpec& flow,
                                 const PeriodFunctionField& field,
                                 int primes_up_to, const ZpConfig& cfg) {
  GeneratorResult out;
  out.field = field;
  std::vector<int> primes;
  for (int p = 2; p <= primes_up_to; ++p) {
    bool prime = p >= 2;
    for (int q = 2; q * q <= p; ++q)
      if (p % q == 0) prime = false;
    if (prime) primes.push_back(p);
  }
  out.primes_tested = primes;
  if (out.field.is_zero(1e-12) || out.field.no_periodic_points) {
    out.group = "trivial";
    return out;
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (int p : primes) {
      ZpActionReport rep = zp_divisibility_test(flow, out.field, p, cfg);
      if (!rep.divisible) continue;
      for (std::size_t i = 0; i < out.field.n_nodes(); ++i) {
        if (!out.field.active[i]) continue;
        out.field.theta[i] /= p;
        if (out.field.per[i].status == PeriodStatus::Periodic) {
          double per = out.field.per[i].minimal_period;
          long m = std::llround(out.field.theta[i] / per);
          out.field.multiplier[i] = std::max<long>(m, 1);
        }
      }
      out.divisions_applied.push_back(p);
      changed = true;
    }
  }
  FieldBuildConfig fb;
  fb.threads = cfg.threads;
  fill_dense_and_residual(flow, out.field, fb);
  out.group = "n*theta";
  return out;
}

FlowSpec circle_action(const FlowSpec& flow, const PeriodFunctionField& field,
                       const CircleActionConfig& cfg) {
  for (std::size_t i = 0; i < field.n_nodes(); ++i) {
    if (!field.active[i]) continue;
    if (field.per[i].status != PeriodStatus::Fixed &&
        field.theta[i] <= cfg.fixed_tol)
      throw FieldVanishesOffFix(
          "theta vanishes at a non-fixed grid point; no circle action");
  }

  auto base = std::make_shared<FlowSpec>(flow);
  auto fld = std::make_shared<PeriodFunctionField>(field);
  auto det = std::make_shared<DetectorConfig>(cfg.detector);
  struct Cache {
    std::mutex mu;
    std::map<std::vector<double>, double> theta;
  };
  auto cache = std::make_shared<Cache>();
  const double fixed_tol = cfg.fixed_tol;

  FlowSpec B;
  B.kind = FlowSpec::Kind::ClosedForm;
  B.domain = flow.domain;
  B.smoothness = flow.smoothness;
  B.name = flow.name + " (circle action)";
  B.closed_form = [base, fld, det, cache, fixed_tol](const Point& x,
                                                     double t) {
    std::vector<double> key(x.data(), x.data() + x.size());
    {
      std::lock_guard<std::mutex> lk(cache->mu);
      auto it = cache->theta.find(key);
      if (it != cache->theta.end())
        return evaluate_flow(*base, x, t * it->second);
    }
    double th = 0.0;
    if (local_speed(*base, x) >= fixed_tol) {
      auto v = theta_exact_at(*base, *fld, x, *det);
      if (!v) v = fld->interpolate(x);
      th = v.value_or(0.0);
    }
    {
      std::lock_guard<std::mutex> lk(cache->mu);
      cache->theta.emplace(std::move(key), th);
    }
    return evaluate_flow(*base, x, t * th);
  };
  return B;
}

double circle_action_identity_residual(const FlowSpec& B,
                                       const PeriodFunctionField& field,
                                       std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  double mx = 0;
  int produced = 0;
  int guard = 0;
  while (produced < n && guard < n * 1000) {
    ++guard;
    Point p(field.dim);
    for (std::size_t c = 0; c < field.dim; ++c) {
      std::uniform_real_distribution<double> uni(field.box[c].lo,
                                                 field.box[c].hi);
      p[c] = uni(rng);
    }
    if (!field.interpolate(p)) continue;  // outside the active region
    ++produced;
    try {
      Point q = B.closed_form(p, 1.0);
      mx = std::max(mx, B.domain.distance(B.domain.wrap(p), B.domain.wrap(q)));
    } catch (const Error&) {
      mx = std::numeric_limits<double>::infinity();
    }
  }
  return mx;
}

double orbit_hausdorff(const FlowSpec& A, double TA, const FlowSpec& B,
                       double TB, const Point& x, int samples) {
  const std::size_t dim = A.domain.dim();
  std::vector<std::vector<double>> a_soa(dim, std::vector<double>(samples));
  std::vector<std::vector<double>> b_soa(dim, std::vector<double>(samples));
  std::vector<Point> a_pts(samples), b_pts(samples);
  for (int j = 0; j < samples; ++j) {
    a_pts[j] = evaluate_flow(A, x, TA * j / samples);
    b_pts[j] = B.domain.wrap(B.closed_form(x, TB * j / samples));
    for (std::size_t c = 0; c < dim; ++c) {
      a_soa[c][j] = a_pts[j][c];
      b_soa[c][j] = b_pts[j][c];
    }
  }
  std::vector<double*> a_ptr(dim), b_ptr(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    a_ptr[c] = a_soa[c].data();
    b_ptr[c] = b_soa[c].data();
  }
  const auto& K = kernels::ops();
  std::vector<double> d2(samples);
  double h = 0;
  for (int j = 0; j < samples; ++j) {
    K.dist2_batch(b_ptr.data(), a_pts[j].data(), A.domain.periodic_mask(), dim,
                  samples, d2.data());
    double mn;
    K.argmin(d2.data(), samples, &mn);
    h = std::max(h, mn);
  }
  for (int j = 0; j < samples; ++j) {
    K.dist2_batch(a_ptr.data(), b_pts[j].data(), A.domain.periodic_mask(), dim,
                  samples, d2.data());
    double mn;
    K.argmin(d2.data(), samples, &mn);
    h = std::max(h, mn);
  }
  return std::sqrt(h);
}

std::vector<ExtensionEntry> extend_period_function(
    const FlowSpec& flow, const PeriodFunctionField& field,
    std::span<const Point> targets, const ExtensionConfig& cfg) {
  std::vector<ExtensionEntry> out(targets.size());

  double max_theta = 0, max_h = 0;
  for (std::size_t i = 0; i < field.n_nodes(); ++i)
    if (field.active[i]) max_theta = std::max(max_theta, field.theta[i]);
  for (std::size_t c = 0; c < field.dim; ++c)
    if (field.axes[c].size() >= 2)
      max_h = std::max(max_h, field.axes[c][1] - field.axes[c][0]);
  const double trace_h =
      cfg.trace_horizon > 0 ? cfg.trace_horizon : std::max(2.0 * max_theta, 1.0);
  const double adj_r =
      cfg.adjacency_radius > 0 ? cfg.adjacency_radius : 2.0 * max_h;

  // Phase 0/1: in-field targets and orbit tracing into V.
  parallel_for(targets.size(), cfg.threads, [&](std::size_t ti) {
    ExtensionEntry& e = out[ti];
    e.target = flow.domain.wrap(targets[ti]);
    e.method = "unresolved";

    PeriodResult cls = classify_point(flow, e.target, cfg.detector);
    if (cls.status == PeriodStatus::Fixed) {
      e.method = "fixed_unresolved";
      return;
    }

    auto resolve_with_node = [&](std::size_t node, const char* how) {
      long m = field.multiplier[node];
      if (m == 0) return false;
      if (cls.status != PeriodStatus::Periodic) return false;
      e.theta = static_cast<double>(m) * cls.minimal_period;
      e.multiplier = m;
      e.method = how;
      return true;
    };

    if (field.interpolate(e.target)) {
      auto node = field.nearest_active_node(e.target);
      if (node && resolve_with_node(*node, "in_field")) return;
    }
    if (cls.status != PeriodStatus::Periodic) {
      e.method = "nonperiodic_unresolved";
      return;
    }
    // Trace the orbit both ways looking for an entry into V.
    for (int s = 1; s <= cfg.trace_samples; ++s) {
      for (int sign = -1; sign <= 1; sign += 2) {
        double tau = sign * trace_h * s / cfg.trace_samples;
        Point y;
        try {
          y = evaluate_flow(flow, e.target, tau);
        } catch (const Error&) {
          continue;
        }
        if (!field.interpolate(y)) continue;
        auto node = field.nearest_active_node(y);
        if (node && resolve_with_node(*node, "orbit_trace")) return;
      }
    }
  });

  if (cfg.allow_detection_fallback) {
    // Phase 2: propagate multipliers from the nearest resolved reference.
    struct Ref {
      Point p;
      double theta;
    };
    std::vector<Ref> refs;
    for (std::size_t i = 0; i < field.n_nodes(); ++i)
      if (field.active[i])
        refs.push_back({field.point_at(i), field.theta[i]});

    auto nearest_ref = [&](const Point& p, double cap) -> const Ref* {
      const Ref* best = nullptr;
      double bd = cap * cap;
      for (const auto& r : refs) {
        double d = flow.domain.distance2(p, r.p);
        if (d <= bd) {
          bd = d;
          best = &r;
        }
      }
      return best;
    };

    bool progress = true;
    while (progress) {
      progress = false;
      // Deterministic sweep: resolve, in index order, every unresolved
      // target that currently has a reference in range.
      for (std::size_t ti = 0; ti < out.size(); ++ti) {
        ExtensionEntry& e = out[ti];
        if (e.method != "unresolved" && e.method != "fixed_unresolved")
          continue;
        const Ref* r = nearest_ref(e.target, adj_r);
        if (!r) continue;
        if (e.method == "fixed_unresolved") {
          e.theta = r->theta;
          e.multiplier = 0;
          e.method = "fixed_avg";
        } else {
          PeriodResult cls = classify_point(flow, e.target, cfg.detector);
          if (cls.status != PeriodStatus::Periodic) continue;
          long n_best = 1;
          double best = std::abs(cls.minimal_period - r->theta);
          for (long n = 2; n <= cfg.max_multiplier; ++n) {
            double d =
                std::abs(static_cast<double>(n) * cls.minimal_period - r->theta);
            if (d < best) {
              best = d;
              n_best = n;
            }
          }
          e.theta = static_cast<double>(n_best) * cls.minimal_period;
          e.multiplier = n_best;
          e.method = "neighbor";
        }
        refs.push_back({e.target, e.theta});
        progress = true;
      }
    }
    // Isolated targets: assume the dense-set value n = 1.
    parallel_for(out.size(), cfg.threads, [&](std::size_t ti) {
      ExtensionEntry& e = out[ti];
      if (e.method != "unresolved") return;
      PeriodResult cls = classify_point(flow, e.target, cfg.detector);
      if (cls.status == PeriodStatus::Periodic) {
        e.theta = cls.minimal_period;
        e.multiplier = 1;
        e.method = "assumed_dense";
      } else {
        e.method = "failed";
        e.message = "target orbit never enters V and is not periodic";
      }
    });
  }

  // Verification pass and failure accounting.
  std::size_t failed = 0;
  for (auto& e : out) {
    if (e.method == "unresolved" || e.method == "fixed_unresolved" ||
        e.method == "nonperiodic_unresolved" || e.method == "failed") {
      e.method = "failed";
      ++failed;
      continue;
    }
    try {
      e.residual = flow.domain.distance(
          e.target, evaluate_flow(flow, e.target, e.theta));
    } catch (const Error&) {
      e.residual = std::numeric_limits<double>::quiet_NaN();
    }
  }
  if (failed == out.size() && !out.empty())
    throw NotInSaturation(
        "no target orbit enters V within the horizon" +
        std::string(cfg.allow_detection_fallback ? " and detection failed"
                                                 : " (fallback disabled)"));
  return out;
}

ConditionReport probe_conditions(const FlowSpec& flow,
                                 const PeriodFunctionField& field,
                                 std::span<const Point> fixed_points,
                                 int alpha_q, int alpha_p,
                                 const ProbeConfig& cfg) {
  ConditionReport rep;
  rep.alpha_q = alpha_q;
  rep.alpha_p = alpha_p;
  const double alpha = static_cast<double>(alpha_q) / alpha_p;
  const auto& K = kernels::ops();

  // (A) sup of detected periods over grid points with theta != 0, plus
  // shrinking-radius probes near each fixed point.
  double bound = 0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < field.n_nodes(); ++i) {
    if (!field.active[i] || field.theta[i] == 0.0) continue;
    if (field.per[i].status == PeriodStatus::Periodic)
      bound = std::max(bound, field.per[i].minimal_period);
    else if (field.per[i].status != PeriodStatus::Fixed)
      ++hits;
  }
  std::mt19937_64 rng(cfg.seed);
  for (const Point& z : fixed_points) {
    for (int lev = 0; lev < cfg.radii_levels; ++lev) {
      double r = cfg.ball_radius / std::pow(2.0, lev);
      auto probes =
          period_lower_bound_probe(flow, z, std::span<const double>(&r, 1),
                                   cfg.detector, rng(), 8);
      for (auto& [x, res] : probes) {
        if (res.status == PeriodStatus::Periodic)
          bound = std::max(bound, res.minimal_period);
        else if (res.status != PeriodStatus::Fixed)
          ++hits;
      }
    }
  }
  rep.a_bound = bound;
  rep.a_unbounded_hits = hits;
  rep.a_holds = hits == 0;

  auto theta_at = [&](const Point& y) -> std::optional<double> {
    return theta_exact_at(flow, field, y, cfg.detector);
  };

  for (const Point& z : fixed_points) {
    FixedPointProbe pr;
    pr.z = z;

    // (B) regularity of theta restricted to a ball around z, minus Fix.
    {
      bool ok = true;
      std::mt19937_64 rb(cfg.seed ^ 0xb);
      std::normal_distribution<double> gauss;
      for (int s = 0; s < 24 && ok; ++s) {
        Vec dir(field.dim);
        double n2 = 0;
        for (std::size_t c = 0; c < field.dim; ++c) {
          dir[c] = gauss(rb);
          n2 += dir[c] * dir[c];
        }
        if (n2 < 1e-12) continue;
        std::uniform_real_distribution<double> ur(0.05 * cfg.ball_radius,
                                                  cfg.ball_radius);
        dir *= ur(rb) / std::sqrt(n2);
        Point x = flow.domain.wrap(z + dir);
        auto tx = theta_at(x);
        if (!tx || *tx == 0.0) continue;
        std::uniform_real_distribution<double> ut(0.0, 2.0 * *tx);
        for (int j = 0; j < 4 && ok; ++j) {
          Point y;
          try {
            y = evaluate_flow(flow, x, ut(rb));
          } catch (const Error&) {
            continue;
          }
          if (flow.domain.distance(z, y) > cfg.ball_radius) continue;
          auto ty = theta_at(y);
          if (!ty) continue;
          if (std::abs(*ty - *tx) > 1e-3 * std::max(1.0, *tx)) ok = false;
        }
      }
      pr.b_regular = ok;
    }

    // d_alpha with the orbit-frozen step.
    auto d_alpha_iter = [&](const Point& x, int iters,
                            double* first_disp) -> std::optional<Point> {
      auto tx = theta_at(x);
      if (!tx) return std::nullopt;
      Point y = x;
      try {
        for (int j = 0; j < iters; ++j) {
          y = evaluate_flow(flow, y, alpha * *tx);
          if (j == 0 && first_disp)
            *first_disp = flow.domain.distance(x, y);
        }
      } catch (const Error&) {
        return std::nullopt;
      }
      return y;
    };

    // (C) continuity modulus of d_alpha at z over shrinking radii.
    for (int lev = 0; lev < cfg.radii_levels; ++lev) {
      double r = cfg.ball_radius / std::pow(2.0, lev);
      double modulus = 0;
      for (int s = 0; s < 16; ++s) {
        double ang = 2.0 * M_PI * s / 16;
        Vec dir(field.dim);
        dir[0] = std::cos(ang) * r;
        if (field.dim > 1) dir[1] = std::sin(ang) * r;
        Point x = flow.domain.wrap(z + dir);
        auto y = d_alpha_iter(x, 1, nullptr);
        if (y) modulus = std::max(modulus, flow.domain.distance(z, *y));
      }
      pr.c.push_back({r, modulus});
    }

    // (D) d_alpha^p identity near z.
    {
      double mx = 0;
      bool any = false;
      for (int s = 0; s < 16; ++s) {
        double ang = 2.0 * M_PI * s / 16;
        Vec dir(field.dim);
        dir[0] = std::cos(ang) * 0.5 * cfg.ball_radius;
        if (field.dim > 1) dir[1] = std::sin(ang) * 0.5 * cfg.ball_radius;
        Point x = flow.domain.wrap(z + dir);
        auto y = d_alpha_iter(x, alpha_p, nullptr);
        if (!y) continue;
        any = true;
        mx = std::max(mx, flow.domain.distance(x, *y));
      }
      pr.d_max_displacement = mx;
      pr.d_pth_power_identity = any && mx < cfg.verify_tol;
    }

    // (E) ratios d(z, x_i) / diam(orb_{x_i} cap W).
    {
      double max_ratio = 0;
      for (int lev = 0; lev < cfg.radii_levels; ++lev) {
        double r = cfg.ball_radius / std::pow(2.0, lev);
        double best_ratio = std::numeric_limits<double>::infinity();
        for (int s = 0; s < 8; ++s) {
          double ang = 2.0 * M_PI * s / 8;
          Vec dir(field.dim);
          dir[0] = std::cos(ang) * r;
          if (field.dim > 1) dir[1] = std::sin(ang) * r;
          Point x = flow.domain.wrap(z + dir);
          PeriodResult cls = classify_point(flow, x, cfg.detector);
          if (cls.status != PeriodStatus::Periodic) continue;
          const int N = 128;
          std::vector<std::vector<double>> soa(field.dim);
          std::vector<Point> kept;
          for (int j = 0; j < N; ++j) {
            Point y;
            try {
              y = evaluate_flow(flow, x, cls.minimal_period * j / N);
            } catch (const Error&) {
              break;
            }
            if (flow.domain.distance(z, y) <= cfg.ball_radius) kept.push_back(y);
          }
          if (kept.size() < 2) continue;
          for (std::size_t c = 0; c < field.dim; ++c) {
            soa[c].resize(kept.size());
            for (std::size_t j = 0; j < kept.size(); ++j)
              soa[c][j] = kept[j][c];
          }
          std::vector<const double*> ptr(field.dim);
          for (std::size_t c = 0; c < field.dim; ++c) ptr[c] = soa[c].data();
          double diam = std::sqrt(K.max_pairwise_dist2(
              ptr.data(), flow.domain.periodic_mask(), field.dim,
              kept.size()));
          if (diam <= 0) continue;
          double ratio = flow.domain.distance(z, x) / diam;
          best_ratio = std::min(best_ratio, ratio);
        }
        if (std::isfinite(best_ratio)) {
          pr.e_ratios.push_back({r, best_ratio});
          max_ratio = std::max(max_ratio, best_ratio);
        }
      }
      pr.e_constant = max_ratio;
      pr.e_holds = !pr.e_ratios.empty() && max_ratio <= 4.0 + 1e-9;
    }

    rep.fixed_points.push_back(std::move(pr));
  }
  return rep;
}

}  // namespace pflow
