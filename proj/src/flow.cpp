#include "pflow/flow.hpp"

#include <cmath>
#include <limits>

#include "pflow/errors.hpp"

namespace pflow {

void FlowSpec::validate() const {
  if (kind == Kind::ClosedForm) {
    if (!closed_form) throw InvalidParam("closed_form flow without a map");
  } else {
    if (!field) throw InvalidParam("vector_field flow without a field");
    if (smoothness == Smoothness::C0)
      throw InvalidParam("vector_field flows must be declared C1 or better");
  }
}

Point evaluate_flow(const FlowSpec& flow, const Point& x, double t) {
  if (flow.kind == FlowSpec::Kind::ClosedForm) {
    Point y = flow.domain.wrap(flow.closed_form(x, t));
    if (!flow.domain.contains(y))
      throw TrajectoryLeftDomain("orbit endpoint outside the domain box", t);
    return y;
  }
  return integrate_to(flow.field, flow.domain, x, t, flow.integrator);
}

namespace {

Vec field_by_finite_difference(const FlowSpec& flow, const Point& x) {
  const std::size_t n = x.size();
  const double eps = std::numeric_limits<double>::epsilon();
  const double h = std::cbrt(eps) * std::max(1.0, x.norm());

  auto central = [&](double step) {
    Point fwd = flow.domain.wrap(flow.closed_form(x, step));
    Point bwd = flow.domain.wrap(flow.closed_form(x, -step));
    Vec d = flow.domain.displacement(bwd, fwd);
    return d * (1.0 / (2.0 * step));
  };

  Vec v1 = central(h);
  if (flow.smoothness == Smoothness::C0) {
    // Two step sizes must agree, otherwise the derivative is untrustworthy.
    Vec v2 = central(h / 2);
    double diff = (v1 - v2).norm();
    double scale = std::max(1.0, std::max(v1.norm(), v2.norm()));
    if (diff > 1e-3 * scale)
      throw NotDifferentiable(
          "finite differences of a C0 flow failed the convergence check");
    return v2;
  }
  (void)n;
  return v1;
}

}  // namespace

Vec evaluate_field(const FlowSpec& flow, const Point& x) {
  if (flow.field && (!flow.field_valid || flow.field_valid(x))) {
    Vec out(x.size());
    flow.field(x.span(), out.span());
    return out;
  }
  if (flow.kind == FlowSpec::Kind::VectorField)
    throw InvalidParam("vector_field flow lost its field");
  return field_by_finite_difference(flow, x);
}

double local_speed(const FlowSpec& flow, const Point& x) {
  try {
    return evaluate_field(flow, x).norm();
  } catch (const NotDifferentiable&) {
    const double h = 1e-8;
    Point fwd = evaluate_flow(flow, x, h);
    return flow.domain.distance(x, fwd) / h;
  }
}

FlowSampler::FlowSampler(const FlowSpec& flow, Point x)
    : flow_(flow), x_(std::move(x)) {
  if (flow_.kind == FlowSpec::Kind::VectorField)
    traj_ = std::make_unique<Trajectory>(flow_.field, &flow_.domain, x_,
                                         flow_.integrator, 1.0);
}

std::size_t FlowSampler::sample(const double* ts, std::size_t n,
                                double* const* soa_out) {
  const std::size_t dim = x_.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::optional<Point> p = at(ts[i]);
    if (!p) return i;
    covered_ = ts[i];
    for (std::size_t c = 0; c < dim; ++c) soa_out[c][i] = (*p)[c];
  }
  return n;
}

std::optional<Point> FlowSampler::at(double t) {
  if (flow_.kind == FlowSpec::Kind::ClosedForm) {
    if (left_domain_ && t > covered_) return std::nullopt;
    Point y = flow_.domain.wrap(flow_.closed_form(x_, t));
    if (!flow_.domain.contains(y)) {
      left_domain_ = true;
      return std::nullopt;
    }
    return y;
  }
  auto p = traj_->at(t);
  if (!p && traj_->stop_reason() == Trajectory::Stop::LeftDomain)
    left_domain_ = true;
  return p;
}

}  // namespace pflow
