#include "pflow/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "pflow/gallery.hpp"
#include "pflow/io.hpp"
#include "pflow/linearization.hpp"
#include "pflow/orbit_geometry.hpp"
#include "pflow/period_function.hpp"

namespace pflow {
namespace {

using Clock = std::chrono::steady_clock;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double v) { return io::format_double(v); }

bool is_central(const Point& p) {
  return std::abs(p[0]) <= 1e-12 && std::abs(p[1]) <= 1e-12;
}

// --- criterion 1: Seifert dichotomy -------------------------------------

Check seifert_dichotomy(int k, const AcceptanceOptions& opts) {
  Check ck;
  auto entry = gallery_get("seifert", {{"k", k}});

  GridSpec grid;
  grid.box = {{-1.0, 0.95}, {-1.0, 0.95}, {0.0, 1.0}};
  grid.counts = {40, 40, 40};

  FieldBuildConfig fb;
  fb.threads = opts.threads;
  fb.detector.horizon = 2.0 * k + 4.0;
  fb.detector.octave_samples = 512;

  PeriodFunctionField field = build_period_field(entry.flow, grid, fb);

  double max_dev = 0;
  bool mult_ok = true, dense_ok = true;
  std::size_t central_nodes = 0;
  for (std::size_t i = 0; i < field.n_nodes(); ++i) {
    if (!field.active[i]) continue;
    Point p = field.point_at(i);
    max_dev = std::max(max_dev, std::abs(field.theta[i] - k));
    if (is_central(p)) {
      ++central_nodes;
      if (field.multiplier[i] != k) mult_ok = false;
      if (field.dense_mask[i]) dense_ok = false;
    } else {
      if (field.multiplier[i] != 1) mult_ok = false;
      if (!field.dense_mask[i]) dense_ok = false;
    }
  }
  ck.require(max_dev < 1e-5, "max |theta - k| = " + fmt(max_dev));
  ck.require(central_nodes == 40, "central-orbit nodes on the lattice");
  ck.require(mult_ok, "multiplier k on the central orbit, 1 elsewhere");
  ck.require(dense_ok, "dense mask false exactly on the central orbit");

  ZpConfig zc;
  zc.threads = opts.threads;
  for (int p : {2, 3, 5, 7}) {
    ZpActionReport zr = zp_divisibility_test(entry.flow, field, p, zc);
    ck.require(!zr.divisible, "not divisible by " + std::to_string(p));
    ck.require(zr.max_pth_iterate_displacement < 1e-5,
               "d^p identity at p=" + std::to_string(p));
  }
  GeneratorResult gen = detect_generator(entry.flow, field, 7, zc);
  ck.require(gen.divisions_applied.empty() && gen.group == "n*theta",
             "theta = k is already the generator");
  ck.note("k=" + std::to_string(k) + " max_dev=" + fmt(max_dev));
  return ck;
}

// --- criterion 2: C0 / C1 contrast ---------------------------------------

Check c0_c1_contrast(const AcceptanceOptions& opts) {
  Check ck;

  {  // C0 example: theta = |z|^2, vanishing at the fixed origin.
    auto entry = gallery_get("c0_disk");
    GridSpec grid;
    grid.box = {{-1.0, 1.0}, {-1.0, 1.0}};
    grid.counts = {251, 251};
    FieldBuildConfig fb;
    fb.threads = opts.threads;
    fb.detector.horizon = 4.0;
    fb.detector.octave_samples = 512;
    PeriodFunctionField field = build_period_field(entry.flow, grid, fb);
    GeneratorResult gen = detect_generator(entry.flow, field, 7,
                                           ZpConfig{1e-6, 4000, 1, opts.threads});

    double max_err = 0, theta0 = -1;
    for (std::size_t i = 0; i < gen.field.n_nodes(); ++i) {
      if (!gen.field.active[i]) continue;
      Point p = gen.field.point_at(i);
      double truth = p[0] * p[0] + p[1] * p[1];
      max_err = std::max(max_err, std::abs(gen.field.theta[i] - truth));
      if (is_central(p)) theta0 = gen.field.theta[i];
    }
    ck.require(max_err < 1e-4, "c0 max|theta - |z|^2| = " + fmt(max_err));
    ck.require(theta0 >= 0 && theta0 < 1e-4, "c0 theta(0) = " + fmt(theta0));
    ck.note("c0 max_err=" + fmt(max_err) + " theta0=" + fmt(theta0));
  }

  {  // C-infinity example on the annulus: theta = 1/|z|^2, unbounded at 0.
    auto entry = gallery_get("c_inf_disk");
    GridSpec grid;
    grid.box = {{-1.0, 1.0}, {-1.0, 1.0}};
    grid.counts = {81, 81};
    grid.mask = [](const Point& p) {
      double r = std::hypot(p[0], p[1]);
      return r >= 0.2 - 1e-9 && r <= 1.0 + 1e-9;
    };
    FieldBuildConfig fb;
    fb.threads = opts.threads;
    fb.detector.horizon = 30.0;
    fb.detector.octave_samples = 512;
    PeriodFunctionField field = build_period_field(entry.flow, grid, fb);
    GeneratorResult gen = detect_generator(entry.flow, field, 7,
                                           ZpConfig{1e-6, 4000, 1, opts.threads});

    double max_rel = 0;
    for (std::size_t i = 0; i < gen.field.n_nodes(); ++i) {
      if (!gen.field.active[i]) continue;
      Point p = gen.field.point_at(i);
      double truth = 1.0 / (p[0] * p[0] + p[1] * p[1]);
      max_rel = std::max(max_rel,
                         std::abs(gen.field.theta[i] - truth) / truth);
    }
    ck.require(max_rel < 1e-4, "c_inf max rel err = " + fmt(max_rel));

    ExtensionConfig ex;
    ex.threads = opts.threads;
    ex.detector.horizon = 2500.0;
    ex.detector.octave_samples = 512;
    Point probe{0.03, 0.0};
    auto entries = extend_period_function(entry.flow, gen.field,
                                          std::span<const Point>(&probe, 1), ex);
    ck.require(entries.size() == 1 && entries[0].theta > 1e3,
               "theta(|z|=0.03) = " +
                   (entries.empty() ? "?" : fmt(entries[0].theta)));
    ck.note("c_inf max_rel=" + fmt(max_rel) +
            " theta(0.03)=" + (entries.empty() ? "?" : fmt(entries[0].theta)));
  }
  return ck;
}

// --- criterion 3: Theorem 2 eigenstructure -------------------------------

Check eigenstructure(const AcceptanceOptions& opts) {
  Check ck;
  Point origin2{0.0, 0.0};
  for (double beta : {1.0, 3.0, 2.0 * M_PI}) {
    auto entry = gallery_get("rotation", {{"beta", beta}});
    FixedPointClass cls = classify_fixed_point(entry.flow, origin2);
    ck.require(cls.verdict == FixedPointVerdict::PeriodicType,
               "rotation(beta=" + fmt(beta) + ") is PeriodicType");
    double err = 1e9;
    for (auto ev : cls.linear.eigenvalues)
      err = std::min(err, std::abs(std::abs(ev.imag()) - beta) +
                              std::abs(ev.real()));
    ck.require(err < 1e-7, "eigenvalues +-i*beta within 1e-7");
  }
  {
    auto entry = gallery_get("hamiltonian_even", {{"b", 2}});
    FixedPointClass cls = classify_fixed_point(entry.flow, origin2);
    bool j2_zero = false;
    for (const auto& b : cls.linear.blocks)
      if (!b.complex_pair && b.size == 2 && std::abs(b.re) < 1e-9)
        j2_zero = true;
    ck.require(cls.verdict == FixedPointVerdict::DegenerateBlock && j2_zero,
               "hamiltonian_even(2) has block J_2(0)");
  }
  {
    auto entry = gallery_get("saddle");
    FixedPointClass cls = classify_fixed_point(entry.flow, origin2);
    ck.require(cls.verdict == FixedPointVerdict::HyperbolicPart,
               "saddle is HyperbolicPart");
  }

  // Proposition consistency: the zero field near (b)- and (a)-type points.
  auto zero_field_check = [&](const char* name, const FlowSpec& flow,
                              double horizon) {
    GridSpec grid;
    grid.box = {{-0.4, 0.4}, {-0.4, 0.4}};
    grid.counts = {21, 21};
    FieldBuildConfig fb;
    fb.threads = opts.threads;
    fb.detector.horizon = horizon;
    fb.detector.octave_samples = 512;
    PeriodFunctionField f = build_period_field(flow, grid, fb);
    double mx = 0;
    for (std::size_t i = 0; i < f.n_nodes(); ++i)
      if (f.active[i] && f.per[i].status != PeriodStatus::Fixed)
        mx = std::max(mx, std::abs(f.theta[i]));
    ck.require(mx < 1e-6, std::string(name) + " zero field off Fix, max=|" +
                              fmt(mx) + "|");
  };
  zero_field_check("hamiltonian", gallery_get("hamiltonian_even", {{"b", 2}}).flow,
                   20.0);
  zero_field_check("saddle", gallery_get("saddle").flow, 50.0);
  return ck;
}

// --- criterion 4: period blow-up ------------------------------------------

Check blowup(const AcceptanceOptions& opts) {
  Check ck;
  const double radii[] = {0.5, 0.25, 0.125, 0.0625};
  {
    auto entry = gallery_get("hamiltonian_even", {{"b", 2}});
    BlowupConfig bc;
    bc.threads = opts.threads;
    bc.seed = opts.seed;
    bc.detector.horizon = 120.0;
    bc.detector.octave_samples = 512;
    BlowupReport rep = period_blowup_probe(entry.flow, Point{0.0, 0.0}, 0.5,
                                           radii, 4.0 * 5.25, bc);
    ck.require(rep.periods_strictly_increase, "min periods strictly increase");
    ck.require(rep.radii.front().n_periodic > 0 &&
                   rep.radii.back().n_periodic > 0,
               "periodic samples at both ends");
    double ratio = rep.radii.back().min_period /
                   std::max(rep.radii.front().min_period, 1e-300);
    ck.require(ratio > 4.0, "Per(r=0.0625) > 4 Per(r=0.5), ratio=" + fmt(ratio));
    ck.require(rep.blowup_observed, "blow-up observed");
    std::ostringstream os;
    os << "ham periods:";
    for (auto& row : rep.radii) os << ' ' << fmt(row.min_period);
    ck.note(os.str());
  }
  {
    auto entry = gallery_get("flat_circle");
    BlowupConfig bc;
    bc.threads = opts.threads;
    bc.detector.horizon = 40.0;
    bc.detector.octave_samples = 512;
    for (int s = 0; s < 8; ++s) {
      double ang = 2.0 * M_PI * s / 8;
      Vec d(4);
      d[2] = std::cos(ang);
      d[3] = std::sin(ang);
      bc.explicit_dirs.push_back(d);
    }
    BlowupReport rep = period_blowup_probe(entry.flow, Point{0, 0, 0, 0}, 0.5,
                                           radii, 1e9, bc);
    bool all_2pi = true;
    for (auto& row : rep.radii) {
      if (row.n_periodic != row.n_samples ||
          std::abs(row.min_period - 2.0 * M_PI) > 1e-5)
        all_2pi = false;
    }
    ck.require(all_2pi, "flat_circle subspace periods = 2pi +- 1e-5");
    ck.require(!rep.blowup_observed, "no blow-up along (0,0,.,.)");
  }
  return ck;
}

// --- criterion 5: orbit inequalities --------------------------------------

Check orbit_inequalities(const AcceptanceOptions& opts) {
  Check ck;
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> uang(0.0, 2.0 * M_PI);

  struct Job {
    GalleryEntry entry;
    std::vector<Point> points;
    double horizon;
  };
  std::vector<Job> jobs;

  {
    Job j{gallery_get("seifert", {{"k", 3}}), {}, 10.0};
    std::uniform_real_distribution<double> ur(0.15, 1.0), ut(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
      double r = ur(rng), a = uang(rng);
      j.points.push_back(Point{r * std::cos(a), r * std::sin(a), ut(rng)});
    }
    jobs.push_back(std::move(j));
  }
  {
    Job j{gallery_get("c_inf_disk"), {}, 12.0};
    std::uniform_real_distribution<double> ur(0.35, 0.95);
    for (int i = 0; i < 40; ++i) {
      double r = ur(rng), a = uang(rng);
      j.points.push_back(Point{r * std::cos(a), r * std::sin(a)});
    }
    jobs.push_back(std::move(j));
  }
  {
    Job j{gallery_get("c0_disk"), {}, 4.0};
    std::uniform_real_distribution<double> ur(0.3, 0.95);
    for (int i = 0; i < 40; ++i) {
      double r = ur(rng), a = uang(rng);
      j.points.push_back(Point{r * std::cos(a), r * std::sin(a)});
    }
    jobs.push_back(std::move(j));
  }
  {
    Job j{gallery_get("rotation", {{"beta", 2.0}}), {}, 8.0};
    std::uniform_real_distribution<double> ur(0.2, 2.0);
    for (int i = 0; i < 30; ++i) {
      double r = ur(rng), a = uang(rng);
      j.points.push_back(Point{r * std::cos(a), r * std::sin(a)});
    }
    jobs.push_back(std::move(j));
  }
  {
    Job j{gallery_get("hamiltonian_even", {{"b", 2}}), {}, 30.0};
    std::uniform_real_distribution<double> ur(0.3, 0.8);
    for (int i = 0; i < 20; ++i) {
      double r = ur(rng), a = uang(rng);
      j.points.push_back(Point{r * std::cos(a), r * std::sin(a)});
    }
    jobs.push_back(std::move(j));
  }
  {
    Job j{gallery_get("flat_circle"), {}, 10.0};
    std::uniform_real_distribution<double> ur(0.2, 2.0);
    for (int i = 0; i < 20; ++i) {
      double r = ur(rng), a = uang(rng);
      j.points.push_back(Point{0.0, 0.0, r * std::cos(a), r * std::sin(a)});
    }
    jobs.push_back(std::move(j));
  }

  int orbits = 0;
  double worst1 = 1e300, worst2 = 1e300;
  for (const auto& job : jobs) {
    DetectorConfig det;
    det.horizon = job.horizon;
    det.octave_samples = 512;
    for (const Point& x : job.points) {
      PeriodResult r = classify_point(job.entry.flow, x, det);
      if (r.status != PeriodStatus::Periodic) {
        ck.require(false, "expected periodic sample in " + job.entry.flow.name);
        continue;
      }
      OrbitGeometry g = orbit_geometry(job.entry.flow, x, r.minimal_period);
      worst1 = std::min(worst1, g.slack_diameter);
      worst2 = std::min(worst2, g.slack_speed);
      ++orbits;
    }
  }
  ck.require(orbits >= 200, "orbit count " + std::to_string(orbits));
  ck.require(worst1 >= -1e-7, "2*diam <= length, min slack " + fmt(worst1));
  ck.require(worst2 >= -1e-7, "length <= Per*sup|F|, min slack " + fmt(worst2));
  ck.note("orbits=" + std::to_string(orbits) + " slack1>=" + fmt(worst1) +
          " slack2>=" + fmt(worst2));
  return ck;
}

// --- criterion 6: circle action --------------------------------------------

Check circle_action_check(const AcceptanceOptions& opts) {
  Check ck;

  struct Setup {
    GalleryEntry entry;
    GridSpec grid;
    double horizon;
  };
  std::vector<Setup> setups;
  {
    Setup s{gallery_get("seifert", {{"k", 3}}), {}, 12.0};
    s.grid.box = {{-1.0, 0.95}, {-1.0, 0.95}, {0.0, 1.0}};
    s.grid.counts = {20, 20, 20};
    setups.push_back(std::move(s));
  }
  {
    Setup s{gallery_get("c_inf_disk"), {}, 30.0};
    s.grid.box = {{-1.0, 1.0}, {-1.0, 1.0}};
    s.grid.counts = {41, 41};
    s.grid.mask = [](const Point& p) {
      double r = std::hypot(p[0], p[1]);
      return r >= 0.2 - 1e-9 && r <= 1.0 + 1e-9;
    };
    setups.push_back(std::move(s));
  }
  {
    Setup s{gallery_get("c0_disk"), {}, 4.0};
    s.grid.box = {{-1.0, 1.0}, {-1.0, 1.0}};
    s.grid.counts = {41, 41};
    setups.push_back(std::move(s));
  }
  {
    Setup s{gallery_get("rotation", {{"beta", 2.0 * M_PI}}), {}, 4.0};
    s.grid.box = {{-1.0, 1.0}, {-1.0, 1.0}};
    s.grid.counts = {41, 41};
    setups.push_back(std::move(s));
  }

  for (auto& s : setups) {
    FieldBuildConfig fb;
    fb.threads = opts.threads;
    fb.detector.horizon = s.horizon;
    fb.detector.octave_samples = 512;
    PeriodFunctionField field = build_period_field(s.entry.flow, s.grid, fb);
    GeneratorResult gen = detect_generator(s.entry.flow, field, 7,
                                           ZpConfig{1e-6, 4000, 1, opts.threads});
    CircleActionConfig cc;
    cc.detector = fb.detector;
    FlowSpec B = circle_action(s.entry.flow, gen.field, cc);
    double res = circle_action_identity_residual(B, gen.field, opts.seed, 500);
    ck.require(res < 1e-6,
               s.entry.flow.name + " B(x,1)=x residual " + fmt(res));

    // Orbit sets of B coincide with the flow's orbits.
    std::mt19937_64 rng(opts.seed ^ 0xc1c1);
    double hmax = 0;
    int done = 0, guard = 0;
    while (done < 10 && guard++ < 500) {
      Point p(field.dim);
      for (std::size_t c = 0; c < field.dim; ++c) {
        std::uniform_real_distribution<double> uni(field.box[c].lo,
                                                   field.box[c].hi);
        p[c] = uni(rng);
      }
      if (!gen.field.interpolate(p)) continue;
      DetectorConfig det = fb.detector;
      PeriodResult r = classify_point(s.entry.flow, p, det);
      if (r.status != PeriodStatus::Periodic) continue;
      hmax = std::max(hmax, orbit_hausdorff(s.entry.flow, r.minimal_period, B,
                                            1.0, p, 256));
      ++done;
    }
    ck.require(done == 10 && hmax < 1e-4,
               s.entry.flow.name + " orbit Hausdorff " + fmt(hmax));
  }
  return ck;
}

// --- criterion 7: group and value structure --------------------------------

Check group_structure(const AcceptanceOptions& opts) {
  Check ck;

  auto seif = gallery_get("seifert", {{"k", 3}});
  GridSpec sgrid;
  sgrid.box = {{-1.0, 0.95}, {-1.0, 0.95}, {0.0, 1.0}};
  sgrid.counts = {14, 14, 14};
  FieldBuildConfig fb;
  fb.threads = opts.threads;
  fb.detector.horizon = 12.0;
  fb.detector.octave_samples = 512;
  PeriodFunctionField sf = build_period_field(seif.flow, sgrid, fb);

  auto c0 = gallery_get("c0_disk");
  GridSpec cgrid;
  cgrid.box = {{-1.0, 1.0}, {-1.0, 1.0}};
  cgrid.counts = {41, 41};
  FieldBuildConfig fb0 = fb;
  fb0.detector.horizon = 4.0;
  PeriodFunctionField cf = build_period_field(c0.flow, cgrid, fb0);

  auto cinf = gallery_get("c_inf_disk");
  GridSpec agrid;
  agrid.box = {{-1.0, 1.0}, {-1.0, 1.0}};
  agrid.counts = {41, 41};
  agrid.mask = [](const Point& p) {
    double r = std::hypot(p[0], p[1]);
    return r >= 0.2 - 1e-9 && r <= 1.0 + 1e-9;
  };
  FieldBuildConfig fbi = fb;
  fbi.detector.horizon = 30.0;
  PeriodFunctionField af = build_period_field(cinf.flow, agrid, fbi);

  // Sums and differences of verified fields verify.
  struct Named {
    const FlowSpec* flow;
    const PeriodFunctionField* f;
    const char* name;
  };
  for (auto [flow, f, name] : {Named{&seif.flow, &sf, "seifert"},
                               Named{&c0.flow, &cf, "c0"},
                               Named{&cinf.flow, &af, "c_inf"}}) {
    std::vector<Point> pts;
    std::vector<double> sum_mu, diff_mu;
    for (std::size_t i = 0; i < f->n_nodes(); ++i) {
      if (!f->active[i]) continue;
      pts.push_back(f->point_at(i));
      sum_mu.push_back(2.0 * f->theta[i]);
      diff_mu.push_back(0.0);
    }
    std::size_t idx = 0;
    auto rep_sum = verify_p_function(
        *flow, pts, [&](const Point&) { return sum_mu[idx++]; }, 2e-6, 1);
    ck.require(rep_sum.pass, std::string(name) + " theta+theta verifies, max " +
                                 fmt(rep_sum.max_residual));
    idx = 0;
    auto rep_diff = verify_p_function(
        *flow, pts, [&](const Point&) { return diff_mu[idx++]; }, 2e-6, 1);
    ck.require(rep_diff.pass, std::string(name) + " theta-theta verifies");

    // Integrality of theta / Per at periodic nodes.
    double worst = 0;
    for (std::size_t i = 0; i < f->n_nodes(); ++i) {
      if (!f->active[i] || f->per[i].status != PeriodStatus::Periodic) continue;
      double q = f->theta[i] / f->per[i].minimal_period;
      worst = std::max(worst, std::abs(q - std::llround(q)));
    }
    ck.require(worst < 1e-6,
               std::string(name) + " theta/Per integrality, worst " + fmt(worst));

    // d^p iterate identity for p <= 7.
    for (int p : {2, 3, 5, 7}) {
      ZpActionReport zr =
          zp_divisibility_test(*flow, *f, p, ZpConfig{1e-6, 4000, 1, opts.threads});
      ck.require(zr.max_pth_iterate_displacement < 1e-5,
                 std::string(name) + " d^" + std::to_string(p) + " identity");
    }
  }

  // Local uniqueness: vanishing propagates across components off Fix.
  auto saddle = gallery_get("saddle");
  GridSpec hgrid;
  hgrid.box = {{-1.0, 1.0}, {-1.0, 1.0}};
  hgrid.counts = {21, 21};
  FieldBuildConfig fbh = fb;
  fbh.detector.horizon = 50.0;
  PeriodFunctionField hf = build_period_field(saddle.flow, hgrid, fbh);
  ck.require(hf.no_periodic_points || hf.is_zero(1e-12),
             "saddle grid carries the zero field");
  // On both grids every component off Fix is all-zero or all-positive.
  for (const PeriodFunctionField* f : {&hf, &sf}) {
    bool mixed = false;
    bool has_zero = false, has_pos = false;
    for (std::size_t i = 0; i < f->n_nodes(); ++i) {
      if (!f->active[i] || f->per[i].status == PeriodStatus::Fixed) continue;
      (std::abs(f->theta[i]) <= 1e-12 ? has_zero : has_pos) = true;
    }
    // Single-component grids: mixing would violate local uniqueness.
    mixed = has_zero && has_pos;
    ck.require(!mixed, "zero set is a union of components");
  }
  return ck;
}

// --- criterion 8: diameter bounds ------------------------------------------

Check diameter_bounds(const AcceptanceOptions& opts) {
  (void)opts;
  Check ck;
  auto rot2 = [](int p_order, int a) {
    return [p_order, a](const Point& x) {
      double c = std::cos(2.0 * M_PI * a / p_order);
      double s = std::sin(2.0 * M_PI * a / p_order);
      Point y = x;
      y[0] = c * x[0] - s * x[1];
      y[1] = s * x[0] + c * x[1];
      return y;
    };
  };

  for (int p : {2, 3, 5, 7}) {
    // Full disk in the plane.
    Domain plane({{-1.0, 1.0}, {-1.0, 1.0}});
    auto disk_mask = [](const Point& q) {
      return std::hypot(q[0], q[1]) <= 0.85 + 1e-12;
    };
    CyclicActionSample act = cyclic_action_from_grid(
        {{-1.0, 1.0}, {-1.0, 1.0}}, {35, 35}, disk_mask, rot2(p, 1), p);
    DressReport dr = dress_bound_check(act, plane, 2.0 * (2.0 / 34.0));
    ck.require(dr.holds, "dress full disk p=" + std::to_string(p) + " D=" +
                             fmt(dr.D) + " C=" + fmt(dr.C));

    // Half-ball in R^3 with the rotation acting in the boundary plane.
    Domain half({{-1.0, 1.0}, {-1.0, 1.0}, {0.0, 1.0}}, {false, false, false},
                std::size_t{2});
    auto ball_mask = [](const Point& q) {
      return std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2]) <= 0.85 + 1e-12;
    };
    CyclicActionSample act3 = cyclic_action_from_grid(
        {{-1.0, 1.0}, {-1.0, 1.0}, {0.0, 1.0}}, {23, 23, 12}, ball_mask,
        rot2(p, 1), p);
    DressReport dr3 = dress_bound_check(act3, half, 2.0 * (2.0 / 22.0));
    ck.require(dr3.holds, "dress half ball p=" + std::to_string(p));

    for (double r : {0.1, 0.5}) {
      CyclicActionSample interior_act;
      interior_act.generator = rot2(p, 1);
      interior_act.p = p;
      HoffmanMannReport hm =
          hoffman_mann_check(interior_act, plane, Point{0.0, 0.0}, r, true);
      ck.require(hm.holds, "hoffman-mann interior p=" + std::to_string(p) +
                               " r=" + fmt(r) + " ratio=" + fmt(hm.ratio));

      CyclicActionSample boundary_act;
      boundary_act.generator = [p](const Point& x) {
        double c = std::cos(2.0 * M_PI / p), s = std::sin(2.0 * M_PI / p);
        Point y = x;
        y[0] = c * x[0] - s * x[1];
        y[1] = s * x[0] + c * x[1];
        return y;
      };
      boundary_act.p = p;
      HoffmanMannReport hb = hoffman_mann_check(
          boundary_act, half, Point{0.0, 0.0, 0.0}, r, false);
      ck.require(hb.holds, "hoffman-mann boundary p=" + std::to_string(p) +
                               " r=" + fmt(r) + " ratio=" + fmt(hb.ratio));
    }
  }
  return ck;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
  auto log = opts.log ? opts.log : [](const std::string& s) {
    std::fputs((s + "\n").c_str(), stdout);
    std::fflush(stdout);
  };

  struct Entry {
    int id;
    std::string name;
    double budget;  // seconds; 0 = no stated bound
    std::function<Check()> run;
  };
  std::vector<Entry> entries;
  for (int k : {2, 3, 5})
    entries.push_back({1, "seifert dichotomy k=" + std::to_string(k), 60.0,
                       [k, &opts] { return seifert_dichotomy(k, opts); }});
  entries.push_back({2, "C0/C1 contrast", 30.0,
                     [&opts] { return c0_c1_contrast(opts); }});
  entries.push_back({3, "Theorem-2 eigenstructure", 10.0,
                     [&opts] { return eigenstructure(opts); }});
  entries.push_back({4, "period blow-up", 60.0, [&opts] { return blowup(opts); }});
  entries.push_back({5, "orbit inequalities", 60.0,
                     [&opts] { return orbit_inequalities(opts); }});
  entries.push_back({6, "circle action", 0.0,
                     [&opts] { return circle_action_check(opts); }});
  entries.push_back({7, "group and value structure", 0.0,
                     [&opts] { return group_structure(opts); }});
  entries.push_back({8, "diameter bounds", 10.0,
                     [&opts] { return diameter_bounds(opts); }});

  std::vector<CriterionResult> results;
  for (auto& e : entries) {
    CriterionResult r;
    r.id = e.id;
    r.name = e.name;
    auto t0 = Clock::now();
    try {
      Check ck = e.run();
      r.pass = ck.ok;
      r.detail = ck.detail;
    } catch (const std::exception& ex) {
      r.pass = false;
      r.detail = std::string("exception: ") + ex.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (e.budget > 0 && r.seconds >= e.budget) {
      r.pass = false;
      r.detail += (r.detail.empty() ? "" : "; ") + std::string("over budget ") +
                  fmt(e.budget) + "s";
    }
    std::ostringstream os;
    os << (r.pass ? "[PASS]" : "[FAIL]") << " criterion " << r.id << " ("
       << r.name << ") " << fmt(r.seconds) << "s";
    if (!r.detail.empty()) os << " -- " << r.detail;
    log(os.str());
    results.push_back(std::move(r));
  }

  if (!opts.out_dir.empty()) {
    nlohmann::json j;
    j["seed"] = opts.seed;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : results)
      rows.push_back({{"id", r.id},
                      {"name", r.name},
                      {"pass", r.pass},
                      {"seconds", r.seconds},
                      {"detail", r.detail}});
    j["criteria"] = rows;
    io::write_file(opts.out_dir + "/acceptance_summary.json", j.dump(2));
  }
  return results;
}

}  // namespace pflow
