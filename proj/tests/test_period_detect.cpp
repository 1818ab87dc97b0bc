#include <cmath>
#include <random>

#include "doctest.h"
#include "pflow/gallery.hpp"
#include "pflow/period_detect.hpp"

using namespace pflow;

namespace {

// Independent brute-force oracle: min of g(t) = dist(Phi(x,t),x) over a flat
// fine grid, refined by local parabolic steps. Only used to cross-check the
// detector on closed forms.
double brute_first_return(const FlowSpec& flow, const Point& x, double horizon,
                          double step, double tol) {
  double prev2 = 1e300, prev1 = 1e300, tprev = 0;
  for (double t = step; t <= horizon; t += step) {
    double g = flow.domain.distance(x, evaluate_flow(flow, x, t));
    if (prev1 < prev2 && prev1 <= g && prev1 < tol) return tprev;
    prev2 = prev1;
    prev1 = g;
    tprev = t;
  }
  return -1;
}

}  // namespace

TEST_CASE("seifert periods: k off the central orbit, 1 on it") {
  auto e = gallery_get("seifert", {{"k", 3}});
  DetectorConfig cfg;
  cfg.horizon = 12;
  auto r = classify_point(e.flow, Point{0.5, 0.0, 0.0}, cfg);
  REQUIRE(r.status == PeriodStatus::Periodic);
  CHECK(std::abs(r.minimal_period - 3.0) < 1e-6);
  CHECK(r.return_residual < 1e-6);

  r = classify_point(e.flow, Point{0.0, 0.0, 0.25}, cfg);
  REQUIRE(r.status == PeriodStatus::Periodic);
  CHECK(std::abs(r.minimal_period - 1.0) < 1e-6);
}

TEST_CASE("c_inf disk: Per = 1/|z|^2, cross-checked by the brute scan") {
  auto e = gallery_get("c_inf_disk");
  DetectorConfig cfg;
  cfg.horizon = 40;
  auto r = classify_point(e.flow, Point{0.5, 0.0}, cfg);
  REQUIRE(r.status == PeriodStatus::Periodic);
  CHECK(std::abs(r.minimal_period - 4.0) < 1e-5);

  double brute = brute_first_return(e.flow, Point{0.5, 0.0}, 8.0, 1e-4, 1e-2);
  CHECK(brute > 0);
  CHECK(std::abs(brute - r.minimal_period) < 1e-3);

  // Origin is the fixed point.
  r = classify_point(e.flow, Point{0.0, 0.0}, cfg);
  CHECK(r.status == PeriodStatus::Fixed);
}

TEST_CASE("c0 disk: tiny periods |z|^2 are resolved") {
  auto e = gallery_get("c0_disk");
  DetectorConfig cfg;
  cfg.horizon = 5;
  for (double r0 : {0.05, 0.008, 0.3}) {
    auto r = classify_point(e.flow, Point{r0, 0.0}, cfg);
    REQUIRE(r.status == PeriodStatus::Periodic);
    CHECK(r.minimal_period ==
          doctest::Approx(r0 * r0).epsilon(1e-6));
  }
}

TEST_CASE("hamiltonian periods match the level-set quadrature oracle") {
  auto e = gallery_get("hamiltonian_even", {{"b", 2}});
  DetectorConfig cfg;
  cfg.horizon = 120;
  for (double a : {0.5, 0.25, 0.125}) {
    auto r = classify_point(e.flow, Point{a, 0.0}, cfg);
    REQUIRE(r.status == PeriodStatus::Periodic);
    CHECK(r.minimal_period ==
          doctest::Approx(hamiltonian_even_period(2, a)).epsilon(1e-6));
  }
  // The origin of the vector-field flow is Fixed.
  auto r = classify_point(e.flow, Point{0.0, 0.0}, cfg);
  CHECK(r.status == PeriodStatus::Fixed);
}

TEST_CASE("saddle: escape without return is Unknown with evidence") {
  auto e = gallery_get("saddle");
  DetectorConfig cfg;
  cfg.horizon = 100;
  auto r = classify_point(e.flow, Point{0.3, 0.4}, cfg);
  CHECK(r.status == PeriodStatus::Unknown);
  CHECK(r.left_domain);
  CHECK(r.evidence > 0);
}

TEST_CASE("minimality: no tested subdivision of the period returns") {
  auto seif = gallery_get("seifert", {{"k", 5}});
  DetectorConfig cfg;
  cfg.horizon = 14;
  Point x{0.4, 0.2, 0.6};
  auto r = classify_point(seif.flow, x, cfg);
  REQUIRE(r.status == PeriodStatus::Periodic);
  CHECK(std::abs(r.minimal_period - 5.0) < 1e-6);
  for (int m = 2; m <= cfg.m_max; ++m) {
    double g = seif.flow.domain.distance(
        x, evaluate_flow(seif.flow, x, r.minimal_period / m));
    CHECK(g > cfg.return_tol);
  }
}

TEST_CASE("Per is a flow invariant") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> ur(0.25, 0.9), us(-3.0, 3.0),
      ua(0.0, 2 * M_PI);
  auto cinf = gallery_get("c_inf_disk");
  auto seif = gallery_get("seifert", {{"k", 3}});
  DetectorConfig cfg;
  cfg.horizon = 25;
  int tested = 0;
  for (int i = 0; i < 50; ++i) {
    bool use_seifert = i % 2 == 0;
    const FlowSpec& flow = use_seifert ? seif.flow : cinf.flow;
    double rr = ur(rng), aa = ua(rng);
    Point x = use_seifert
                  ? Point{rr * std::cos(aa), rr * std::sin(aa), 0.3}
                  : Point{rr * std::cos(aa), rr * std::sin(aa)};
    auto r1 = classify_point(flow, x, cfg);
    if (r1.status != PeriodStatus::Periodic) continue;
    Point y = evaluate_flow(flow, x, us(rng));
    auto r2 = classify_point(flow, y, cfg);
    REQUIRE(r2.status == PeriodStatus::Periodic);
    CHECK(std::abs(r1.minimal_period - r2.minimal_period) < 1e-6);
    ++tested;
  }
  CHECK(tested >= 40);
}

TEST_CASE("lower semicontinuity of Per near a periodic point") {
  auto e = gallery_get("c_inf_disk");
  DetectorConfig cfg;
  cfg.horizon = 25;
  Point x{0.5, 0.0};
  auto base = classify_point(e.flow, x, cfg);
  REQUIRE(base.status == PeriodStatus::Periodic);
  for (double delta : {1e-2, 1e-3}) {
    double worst = 1e300;
    for (int s = 0; s < 8; ++s) {
      double ang = 2 * M_PI * s / 8;
      Point y{x[0] + delta * std::cos(ang), x[1] + delta * std::sin(ang)};
      auto r = classify_point(e.flow, y, cfg);
      REQUIRE(r.status == PeriodStatus::Periodic);
      worst = std::min(worst, r.minimal_period);
    }
    // Per(y) > Per(x) - eps(delta) with eps shrinking linearly here.
    CHECK(worst > base.minimal_period - 20.0 * delta);
  }
}

TEST_CASE("period lower bound probe near non-fixed points") {
  auto seif = gallery_get("seifert", {{"k", 3}});
  DetectorConfig cfg;
  cfg.horizon = 12;
  double radii[] = {0.1, 0.01};
  auto rows = period_lower_bound_probe(seif.flow, Point{0.0, 0.0, 0.3}, radii,
                                       cfg, 99, 16);
  REQUIRE(rows.size() >= 24);
  double inf = 1e300;
  for (auto& [p, r] : rows) {
    REQUIRE(r.status == PeriodStatus::Periodic);
    bool near1 = std::abs(r.minimal_period - 1.0) < 1e-5;
    bool near3 = std::abs(r.minimal_period - 3.0) < 1e-5;
    CHECK((near1 || near3));
    inf = std::min(inf, r.minimal_period);
  }
  CHECK(inf > 0.5);  // bounded below, per the small-periods lemma

  // Harmonic rotation with angular speed 2*pi: all sampled periods are 1.
  auto rot = gallery_get("rotation", {{"beta", 2 * M_PI}});
  DetectorConfig cr;
  cr.horizon = 5;
  auto rows2 = period_lower_bound_probe(rot.flow, Point{0.4, 0.0}, radii, cr,
                                        7, 12);
  for (auto& [p, r] : rows2) {
    REQUIRE(r.status == PeriodStatus::Periodic);
    CHECK(std::abs(r.minimal_period - 1.0) < 1e-6);
  }
}

TEST_CASE("near-zero orbits collapse to Fixed instead of junk periods") {
  // A point numerically on the c0 fixed orbit: displacement never exceeds
  // the tolerance even though the analytic field blows up.
  auto e = gallery_get("c0_disk");
  DetectorConfig cfg;
  cfg.horizon = 4;
  auto r = classify_point(e.flow, Point{2e-17, 0.0}, cfg);
  CHECK(r.status == PeriodStatus::Fixed);
}
