#include <cmath>

#include "doctest.h"
#include "pflow/errors.hpp"
#include "pflow/gallery.hpp"
#include "pflow/period_function.hpp"

using namespace pflow;

namespace {

GridSpec seifert_grid(std::size_t nz, std::size_t ntau) {
  GridSpec g;
  g.box = {{-0.8, 0.8}, {-0.8, 0.8}, {0.0, 1.0}};
  g.counts = {nz, nz, ntau};
  return g;
}

FieldBuildConfig quick_cfg(double horizon, int threads = 0) {
  FieldBuildConfig fb;
  fb.threads = threads;
  fb.detector.horizon = horizon;
  fb.detector.octave_samples = 512;
  return fb;
}

bool is_axis(const Point& p) {
  return std::abs(p[0]) <= 1e-12 && std::abs(p[1]) <= 1e-12;
}

GridSpec annulus_grid(double rmin, double rmax, std::size_t n) {
  GridSpec g;
  g.box = {{-1.0, 1.0}, {-1.0, 1.0}};
  g.counts = {n, n};
  g.mask = [rmin, rmax](const Point& p) {
    double r = std::hypot(p[0], p[1]);
    return r >= rmin - 1e-9 && r <= rmax + 1e-9;
  };
  return g;
}

}  // namespace

TEST_CASE("seifert field: theta == k with the central-orbit repair") {
  auto e = gallery_get("seifert", {{"k", 3}});
  // 17 points over [-0.8, 0.8] puts the central orbit on the lattice.
  PeriodFunctionField f =
      build_period_field(e.flow, seifert_grid(17, 9), quick_cfg(12.0));
  REQUIRE(!f.no_periodic_points);
  std::size_t central = 0;
  for (std::size_t i = 0; i < f.n_nodes(); ++i) {
    REQUIRE(f.active[i]);
    Point p = f.point_at(i);
    CHECK(std::abs(f.theta[i] - 3.0) < 1e-6);
    CHECK(f.residual[i] < 1e-8);
    if (is_axis(p)) {
      ++central;
      CHECK(f.multiplier[i] == 3);
      CHECK(!f.dense_mask[i]);
    } else {
      CHECK(f.multiplier[i] == 1);
      CHECK(f.dense_mask[i]);
    }
  }
  CHECK(central == 9);
}

TEST_CASE("c0 field: theta = |z|^2 vanishing at the origin") {
  auto e = gallery_get("c0_disk");
  GridSpec g;
  g.box = {{-1.0, 1.0}, {-1.0, 1.0}};
  g.counts = {41, 41};
  PeriodFunctionField f = build_period_field(e.flow, g, quick_cfg(4.0));
  const double h = 0.05;
  for (std::size_t i = 0; i < f.n_nodes(); ++i) {
    Point p = f.point_at(i);
    double r2 = p[0] * p[0] + p[1] * p[1];
    if (f.per[i].status == PeriodStatus::Periodic) {
      CHECK(std::abs(f.theta[i] - r2) < 1e-6);
      CHECK(f.multiplier[i] == 1);
    } else {
      // Only the origin; its value comes from neighbor averaging.
      CHECK(is_axis(p));
      CHECK(f.theta[i] <= 4 * h * h);
    }
  }
}

TEST_CASE("c_inf annulus field: theta = 1/|z|^2") {
  auto e = gallery_get("c_inf_disk");
  PeriodFunctionField f =
      build_period_field(e.flow, annulus_grid(0.2, 1.0, 41), quick_cfg(30.0));
  std::size_t active = 0;
  for (std::size_t i = 0; i < f.n_nodes(); ++i) {
    if (!f.active[i]) continue;
    ++active;
    Point p = f.point_at(i);
    double truth = 1.0 / (p[0] * p[0] + p[1] * p[1]);
    CHECK(std::abs(f.theta[i] - truth) / truth < 1e-6);
    CHECK(f.multiplier[i] == 1);
  }
  CHECK(active > 1000);
}

TEST_CASE("hyperbolic saddle: no periodic points, zero field") {
  auto e = gallery_get("saddle");
  GridSpec g;
  g.box = {{-1.0, 1.0}, {-1.0, 1.0}};
  g.counts = {15, 15};
  PeriodFunctionField f = build_period_field(e.flow, g, quick_cfg(60.0));
  CHECK(f.no_periodic_points);
  CHECK(f.is_zero());
}

TEST_CASE("verify_p_function on the Seifert torus") {
  auto e = gallery_get("seifert", {{"k", 3}});
  std::vector<Point> samples;
  for (double r : {0.2, 0.5, 0.75})
    for (double tau : {0.0, 0.3, 0.6})
      samples.push_back(Point{r, 0.0, tau});

  auto ok = verify_p_function(
      e.flow, samples, [](const Point&) { return 3.0; }, 1e-8);
  CHECK(ok.pass);
  CHECK(ok.max_residual < 1e-8);

  auto zero = verify_p_function(
      e.flow, samples, [](const Point&) { return 0.0; }, 1e-12);
  CHECK(zero.pass);
  CHECK(zero.max_residual == 0.0);

  // mu = 1 misses by a 2pi/3 chord at off-center points.
  auto bad = verify_p_function(
      e.flow, samples, [](const Point&) { return 1.0; }, 1e-6);
  CHECK(!bad.pass);
  CHECK(bad.residuals[3] ==
        doctest::Approx(2 * 0.5 * std::sin(M_PI / 3)).epsilon(1e-10));
}

TEST_CASE("regularity: constants and radial fields pass, two sectors fail") {
  auto seif = gallery_get("seifert", {{"k", 3}});
  PeriodFunctionField sf =
      build_period_field(seif.flow, seifert_grid(9, 7), quick_cfg(12.0));
  DetectorConfig det;
  det.horizon = 12.0;
  det.octave_samples = 512;
  RegularityConfig rc;
  rc.max_points = 60;
  auto rep = check_regularity(seif.flow, sf, det, rc);
  CHECK(rep.regular);
  CHECK(rep.checked > 100);

  auto cinf = gallery_get("c_inf_disk");
  PeriodFunctionField af = build_period_field(
      cinf.flow, annulus_grid(0.25, 0.95, 31), quick_cfg(20.0));
  DetectorConfig det2;
  det2.horizon = 20.0;
  det2.octave_samples = 512;
  auto rep2 = check_regularity(cinf.flow, af, det2, rc);
  CHECK(rep2.regular);

  // The paper's two-sector counterexample: a P-function on a disconnected
  // open set that is not orbit-constant.
  auto c0 = gallery_get("c0_disk");
  GridSpec sectors;
  sectors.box = {{-1.0, 1.0}, {-1.0, 1.0}};
  sectors.counts = {41, 41};
  sectors.mask = [](const Point& p) {
    double r = std::hypot(p[0], p[1]);
    if (r < 0.3 || r > 0.95) return false;
    return std::abs(p[1]) <= 0.5 * std::abs(p[0]);
  };
  const int m = 1, n = 2;
  auto mu = [&](const Point& p) {
    double r2 = p[0] * p[0] + p[1] * p[1];
    return p[0] > 0 ? n * r2 : -m * r2;
  };
  FieldBuildConfig fb = quick_cfg(4.0);
  PeriodFunctionField vf = field_from_mu(c0.flow, sectors, mu, fb);
  CHECK(vf.max_residual < 1e-8);  // it IS a P-function pointwise
  DetectorConfig det3;
  det3.horizon = 4.0;
  det3.octave_samples = 512;
  RegularityConfig rc3;
  rc3.max_points = 120;
  auto rep3 = check_regularity(c0.flow, vf, det3, rc3);
  CHECK(!rep3.regular);
  CHECK(!rep3.witnesses.empty());
}

TEST_CASE("Z_p divisibility on the Seifert fibration") {
  auto e = gallery_get("seifert", {{"k", 3}});
  PeriodFunctionField f =
      build_period_field(e.flow, seifert_grid(9, 7), quick_cfg(12.0));
  ZpConfig zc;

  // p = 3: d rotates the disk by 1/3 turn; d^3 = id but d != id.
  auto r3 = zp_divisibility_test(e.flow, f, 3, zc);
  CHECK(!r3.divisible);
  CHECK(r3.max_pth_iterate_displacement < 1e-8);
  CHECK(r3.max_generator_displacement > 0.1);

  // p = 2: d = (-z, tau+1/2); d^2 = id, d != id.
  auto r2 = zp_divisibility_test(e.flow, f, 2, zc);
  CHECK(!r2.divisible);
  CHECK(r2.max_pth_iterate_displacement < 1e-8);

  // Doubling theta makes it divisible by 2.
  PeriodFunctionField doubled = f;
  for (auto& t : doubled.theta) t *= 2;
  for (auto& mlt : doubled.multiplier) mlt *= 2;
  auto rd = zp_divisibility_test(e.flow, doubled, 2, zc);
  CHECK(rd.divisible);
  CHECK(rd.max_generator_displacement < 1e-8);
}

TEST_CASE("detect_generator reduces 6*theta back to theta") {
  auto e = gallery_get("seifert", {{"k", 3}});
  PeriodFunctionField f =
      build_period_field(e.flow, seifert_grid(9, 7), quick_cfg(12.0));
  PeriodFunctionField six = f;
  for (auto& t : six.theta) t *= 6;
  for (auto& m : six.multiplier) m *= 6;

  ZpConfig zc;
  GeneratorResult gen = detect_generator(e.flow, six, 7, zc);
  CHECK(gen.group == "n*theta");
  REQUIRE(gen.divisions_applied.size() == 2);
  CHECK(gen.divisions_applied[0] == 2);
  CHECK(gen.divisions_applied[1] == 3);
  for (std::size_t i = 0; i < gen.field.n_nodes(); ++i)
    CHECK(std::abs(gen.field.theta[i] - 3.0) < 1e-6);

  // Zero field is the trivial group.
  auto saddle = gallery_get("saddle");
  GridSpec g;
  g.box = {{-1.0, 1.0}, {-1.0, 1.0}};
  g.counts = {9, 9};
  PeriodFunctionField zf = build_period_field(saddle.flow, g, quick_cfg(50.0));
  CHECK(detect_generator(saddle.flow, zf, 7, zc).group == "trivial");

  // The c0 generator |z|^2 is irreducible for the tested primes.
  auto c0 = gallery_get("c0_disk");
  PeriodFunctionField cf = build_period_field(
      c0.flow, annulus_grid(0.3, 0.9, 21), quick_cfg(4.0));
  GeneratorResult g0 = detect_generator(c0.flow, cf, 7, zc);
  CHECK(g0.divisions_applied.empty());
}

TEST_CASE("circle action reparametrization") {
  auto e = gallery_get("c_inf_disk");
  PeriodFunctionField f = build_period_field(
      e.flow, annulus_grid(0.3, 0.95, 31), quick_cfg(14.0));
  CircleActionConfig cc;
  cc.detector.horizon = 14.0;
  cc.detector.octave_samples = 512;
  FlowSpec B = circle_action(e.flow, f, cc);

  // B(x, 1) = x.
  double res = circle_action_identity_residual(B, f, 5, 100);
  CHECK(res < 1e-6);

  // theta = 1/|z|^2 turns B into the rigid rotation z e^{2 pi i t}.
  Point x{0.5, 0.0};
  Point q = B.closed_form(x, 0.25);
  CHECK(q[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(q[1] == doctest::Approx(0.5).epsilon(1e-9));

  // Orbits of B coincide with orbits of the flow.
  double h = orbit_hausdorff(e.flow, 4.0, B, 1.0, x, 256);
  CHECK(h < 1e-4);

  // A vanishing theta at a non-fixed node is rejected.
  PeriodFunctionField broken = f;
  for (std::size_t i = 0; i < broken.n_nodes(); ++i)
    if (broken.active[i]) {
      broken.theta[i] = 0.0;
      break;
    }
  CHECK_THROWS_AS(circle_action(e.flow, broken, cc), FieldVanishesOffFix);
}

TEST_CASE("extension: evaluation, forced multipliers, strict mode") {
  auto cinf = gallery_get("c_inf_disk");
  PeriodFunctionField f = build_period_field(
      cinf.flow, annulus_grid(0.5, 1.0, 31), quick_cfg(6.0));

  ExtensionConfig ex;
  ex.detector.horizon = 40.0;
  ex.detector.octave_samples = 512;

  Point inside{0.7, 0.0};
  Point outside{0.25, 0.0};
  std::vector<Point> targets{inside, outside};
  auto entries = extend_period_function(cinf.flow, f, targets, ex);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].method == "in_field");
  CHECK(entries[0].theta ==
        doctest::Approx(1.0 / (0.7 * 0.7)).epsilon(1e-9));
  CHECK(std::abs(entries[1].theta - 16.0) < 1e-3);
  CHECK(entries[1].residual < 1e-6);

  // Strict Lemma-6 mode: the orbit of |z| = 0.25 never meets the annulus.
  ExtensionConfig strict = ex;
  strict.allow_detection_fallback = false;
  std::vector<Point> only_outside{outside};
  CHECK_THROWS_AS(
      extend_period_function(cinf.flow, f, only_outside, strict),
      NotInSaturation);
}

TEST_CASE("extension forces k on the central orbit by continuity") {
  auto e = gallery_get("seifert", {{"k", 3}});
  GridSpec g = seifert_grid(17, 5);
  g.mask = [](const Point& p) {
    double r = std::hypot(p[0], p[1]);
    return r >= 0.25 && r <= 0.65;
  };
  PeriodFunctionField f = build_period_field(e.flow, g, quick_cfg(12.0));

  ExtensionConfig ex;
  ex.detector.horizon = 12.0;
  ex.detector.octave_samples = 512;
  ex.adjacency_radius = 0.22;
  std::vector<Point> chain{Point{0.2, 0.0, 0.0}, Point{0.1, 0.0, 0.0},
                           Point{0.0, 0.0, 0.0}, Point{0.7, 0.0, 0.0},
                           Point{0.8, 0.0, 0.0}};
  auto entries = extend_period_function(e.flow, f, chain, ex);
  for (const auto& en : entries) {
    CHECK(std::abs(en.theta - 3.0) < 1e-6);
    CHECK(en.residual < 1e-6);
  }
  CHECK(entries[2].multiplier == 3);  // the central target
  CHECK(entries[0].multiplier == 1);
}

TEST_CASE("probe_conditions on the paper's disk examples") {
  auto c0 = gallery_get("c0_disk");
  GridSpec g;
  g.box = {{-1.0, 1.0}, {-1.0, 1.0}};
  g.counts = {41, 41};
  PeriodFunctionField f = build_period_field(c0.flow, g, quick_cfg(4.0));

  ProbeConfig pc;
  pc.detector.horizon = 5.0;
  pc.detector.octave_samples = 512;
  Point z{0.0, 0.0};
  ConditionReport rep = probe_conditions(
      c0.flow, f, std::span<const Point>(&z, 1), 1, 2, pc);
  CHECK(rep.a_holds);  // periods |z|^2 <= 2 on the box
  REQUIRE(rep.fixed_points.size() == 1);
  const auto& pr = rep.fixed_points[0];
  CHECK(pr.b_regular);
  CHECK(pr.d_pth_power_identity);  // alpha = 1/2: d_alpha = -z, d^2 = id
  REQUIRE(pr.c.size() >= 3);
  CHECK(pr.c.back().value < 0.5 * pr.c.front().value);  // modulus shrinks
  CHECK(pr.e_holds);
  CHECK(pr.e_constant <= 1.0);  // circles give ratio 1/2

  // The C-infinity flow has unbounded periods near 0: (A) fails.
  auto cinf = gallery_get("c_inf_disk");
  PeriodFunctionField af = build_period_field(
      cinf.flow, annulus_grid(0.2, 1.0, 31), quick_cfg(30.0));
  ProbeConfig pc2;
  pc2.detector.horizon = 50.0;
  pc2.detector.octave_samples = 512;
  ConditionReport rep2 = probe_conditions(
      cinf.flow, af, std::span<const Point>(&z, 1), 1, 2, pc2);
  CHECK(!rep2.a_holds);
  CHECK(rep2.a_unbounded_hits > 0);
}

TEST_CASE("condition (A) holds with bound k on the Seifert torus") {
  auto e = gallery_get("seifert", {{"k", 3}});
  PeriodFunctionField f =
      build_period_field(e.flow, seifert_grid(9, 5), quick_cfg(12.0));
  ProbeConfig pc;
  pc.detector.horizon = 12.0;
  pc.detector.octave_samples = 512;
  ConditionReport rep =
      probe_conditions(e.flow, f, std::span<const Point>(), 1, 3, pc);
  CHECK(rep.a_holds);
  CHECK(rep.a_bound == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("sums and differences of period functions verify") {
  auto e = gallery_get("c0_disk");
  GridSpec g;
  g.box = {{-1.0, 1.0}, {-1.0, 1.0}};
  g.counts = {21, 21};
  PeriodFunctionField f = build_period_field(e.flow, g, quick_cfg(4.0));
  std::vector<Point> pts;
  std::vector<double> theta;
  for (std::size_t i = 0; i < f.n_nodes(); ++i) {
    if (!f.active[i]) continue;
    pts.push_back(f.point_at(i));
    theta.push_back(f.theta[i]);
  }
  std::size_t k = 0;
  auto sum = verify_p_function(
      e.flow, pts, [&](const Point&) { return 2.0 * theta[k++]; }, 1e-6, 1);
  CHECK(sum.pass);
  k = 0;
  auto diff = verify_p_function(
      e.flow, pts, [&](const Point&) { return theta[k] - theta[k++]; }, 1e-9, 1);
  CHECK(diff.pass);
}

TEST_CASE("repair cap produces InconsistentRepair on the Seifert jump") {
  auto e = gallery_get("seifert", {{"k", 3}});
  FieldBuildConfig fb = quick_cfg(12.0);
  fb.max_multiplier = 1;  // forbid the n=3 repair on the central orbit
  CHECK_THROWS_AS(build_period_field(e.flow, seifert_grid(17, 5), fb),
                  InconsistentRepair);
}
