#include <cmath>
#include <random>

#include "doctest.h"
#include "pflow/errors.hpp"
#include "pflow/gallery.hpp"

using namespace pflow;

namespace {

Point random_point_near(std::mt19937_64& rng, double lo, double hi,
                        std::size_t dim) {
  std::uniform_real_distribution<double> uni(lo, hi);
  Point p(dim);
  for (std::size_t c = 0; c < dim; ++c) p[c] = uni(rng);
  return p;
}

}  // namespace

TEST_CASE("seifert closed form: one unit of time rotates z by 1/k turn") {
  auto e = gallery_get("seifert", {{"k", 3}});
  Point x{0.5, 0.0, 0.0};
  Point y = evaluate_flow(e.flow, x, 1.0);
  CHECK(y[0] == doctest::Approx(0.5 * std::cos(2 * M_PI / 3)).epsilon(1e-14));
  CHECK(y[1] == doctest::Approx(0.5 * std::sin(2 * M_PI / 3)).epsilon(1e-14));
  CHECK(y[2] == doctest::Approx(0.0).epsilon(1e-14));  // full turn wraps back
  // t = 0 is the identity for closed forms.
  Point z = evaluate_flow(e.flow, x, 0.0);
  CHECK(z == x);
}

TEST_CASE("integrated rotation matches the matrix exponential") {
  // x' = y, y' = -x integrated a quarter turn from (1,0) lands on (0,-1).
  FlowSpec flow;
  flow.kind = FlowSpec::Kind::VectorField;
  flow.smoothness = Smoothness::Cinf;
  flow.domain = Domain({{-4.0, 4.0}, {-4.0, 4.0}});
  flow.field = [](std::span<const double> x, std::span<double> f) {
    f[0] = x[1];
    f[1] = -x[0];
  };
  flow.validate();
  Point y = evaluate_flow(flow, Point{1.0, 0.0}, M_PI / 2);
  CHECK(y[0] == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(std::abs(y[1] - (-1.0)) < 1e-8);
  // Against the closed form e^{At} x = (cos t, -sin t).
  for (double t : {0.3, 1.7, -2.2}) {
    Point p = evaluate_flow(flow, Point{1.0, 0.0}, t);
    CHECK(p[0] == doctest::Approx(std::cos(t)).epsilon(1e-8));
    CHECK(p[1] == doctest::Approx(-std::sin(t)).epsilon(1e-8));
  }
}

TEST_CASE("group law and reversibility on gallery flows") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ut(-2.0, 2.0);
  struct Case {
    GalleryEntry entry;
    double lo, hi;
  };
  std::vector<Case> cases;
  cases.push_back({gallery_get("seifert", {{"k", 3}}), 0.1, 0.7});
  cases.push_back({gallery_get("c_inf_disk"), 0.2, 0.9});
  cases.push_back({gallery_get("c0_disk"), 0.3, 0.9});
  cases.push_back({gallery_get("rotation", {{"beta", 2.0}}), 0.2, 1.5});
  cases.push_back({gallery_get("hamiltonian_even", {{"b", 2}}), 0.3, 0.7});

  for (auto& c : cases) {
    const double tol = 10 * c.entry.flow.integrator.abs_tol;
    for (int i = 0; i < 100; ++i) {
      Point x = random_point_near(rng, c.lo, c.hi, c.entry.flow.domain.dim());
      double s = ut(rng), t = ut(rng);
      Point a = evaluate_flow(c.entry.flow, evaluate_flow(c.entry.flow, x, s), t);
      Point b = evaluate_flow(c.entry.flow, x, s + t);
      CHECK(c.entry.flow.domain.distance(a, b) < tol);
      Point back = evaluate_flow(c.entry.flow, evaluate_flow(c.entry.flow, x, t), -t);
      CHECK(c.entry.flow.domain.distance(back, x) < tol);
    }
  }
}

TEST_CASE("declared field is the t-derivative of the flow at 0") {
  std::mt19937_64 rng(23);
  for (auto name : {"seifert", "c_inf_disk", "rotation"}) {
    auto e = gallery_get(name, {{"k", 3}, {"beta", 1.5}});
    for (int i = 0; i < 20; ++i) {
      Point x = random_point_near(rng, 0.2, 0.7, e.flow.domain.dim());
      Vec f = evaluate_field(e.flow, x);
      double err_coarse = 0, err_fine = 0;
      for (double h : {1e-3, 1e-4}) {
        Point fwd = evaluate_flow(e.flow, x, h);
        Vec quot = e.flow.domain.displacement(x, fwd) * (1.0 / h);
        double err = (quot - f).norm();
        (h == 1e-3 ? err_coarse : err_fine) = err;
      }
      CHECK(err_fine < err_coarse + 1e-12);           // first order in h
      CHECK(err_fine < 1e-3 * std::max(1.0, f.norm()));
    }
  }
}

TEST_CASE("paper field values of the even Hamiltonian example") {
  auto e = gallery_get("hamiltonian_even", {{"b", 2}});
  Vec f = evaluate_field(e.flow, Point{1.0, 1.0});
  CHECK(f[0] == -2.0);
  CHECK(f[1] == 4.0);  // 2b x^(2b-1) = 4x^3 at x=1
  Vec f0 = evaluate_field(e.flow, Point{0.0, 0.0});
  CHECK(f0.norm() == 0.0);
}

TEST_CASE("seifert angular velocities in turns") {
  auto e = gallery_get("seifert", {{"k", 3}});
  Vec f = evaluate_field(e.flow, Point{0.5, 0.0, 0.25});
  CHECK(f[0] == doctest::Approx(0.0));
  CHECK(f[1] == doctest::Approx(2 * M_PI * 0.5 / 3));  // 1/k turn per unit time
  CHECK(f[2] == doctest::Approx(1.0));                 // 1 turn per unit time
}

TEST_CASE("C0 flow: finite differences fail the convergence check near 0") {
  auto e = gallery_get("c0_disk");
  // Inside the analytic-hint region the field is fine.
  Vec f = evaluate_field(e.flow, Point{0.5, 0.0});
  CHECK(f[1] == doctest::Approx(2 * M_PI * 0.5 / 0.25));
  // Near the singular fixed point only finite differences remain, and they
  // alias the fast rotation.
  CHECK_THROWS_AS(evaluate_field(e.flow, Point{1e-4, 0.0}), NotDifferentiable);
  // At the fixed point itself the quotients converge to zero.
  CHECK(evaluate_field(e.flow, Point{0.0, 0.0}).norm() == 0.0);
}

TEST_CASE("metric: symmetry and triangle inequality with circle factors") {
  Domain dom({{-1.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}, {false, true, true});
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    Point a{uni(rng), std::abs(uni(rng)), std::abs(uni(rng))};
    Point b{uni(rng), std::abs(uni(rng)), std::abs(uni(rng))};
    Point c{uni(rng), std::abs(uni(rng)), std::abs(uni(rng))};
    CHECK(dom.distance(a, b) == doctest::Approx(dom.distance(b, a)));
    CHECK(dom.distance(a, c) <= dom.distance(a, b) + dom.distance(b, c) + 1e-12);
    CHECK(dom.distance(a, a) == 0.0);
  }
  // Shortest arc: 0.9 and 0.1 are 0.2 turns apart.
  CHECK(dom.distance(Point{0.0, 0.9, 0.0}, Point{0.0, 0.1, 0.0}) ==
        doctest::Approx(0.2));
}

TEST_CASE("orbits leaving the box raise TrajectoryLeftDomain") {
  auto e = gallery_get("saddle");
  CHECK_THROWS_AS(evaluate_flow(e.flow, Point{1.0, 1.0}, 10.0),
                  TrajectoryLeftDomain);
  // Vector-field path reports it too.
  FlowSpec vf;
  vf.kind = FlowSpec::Kind::VectorField;
  vf.domain = Domain({{-2.0, 2.0}});
  vf.field = [](std::span<const double>, std::span<double> f) { f[0] = 1.0; };
  vf.validate();
  CHECK_THROWS_AS(evaluate_flow(vf, Point{0.0}, 5.0), TrajectoryLeftDomain);
}

TEST_CASE("domain invariants are enforced") {
  CHECK_THROWS_AS(Domain({{0.0, 0.5}}, {true}), InvalidParam);
  CHECK_THROWS_AS(Domain({{1.0, 0.0}}), InvalidParam);
  CHECK_THROWS_AS(Domain({{0.5, 1.0}}, {false}, std::size_t{0}), InvalidParam);
  CHECK_THROWS_AS(Domain({{0.0, 1.0}, {0.0, 1.0}}, {false, true},
                         std::size_t{1}),
                  InvalidParam);
  // C0 vector fields are rejected by the data model.
  FlowSpec bad;
  bad.kind = FlowSpec::Kind::VectorField;
  bad.smoothness = Smoothness::C0;
  bad.field = [](std::span<const double>, std::span<double> f) { f[0] = 0.0; };
  CHECK_THROWS_AS(bad.validate(), InvalidParam);
}
