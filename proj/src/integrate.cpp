#include "pflow/integrate.hpp"

#include <algorithm>
#include <cmath>

#include "pflow/errors.hpp"

namespace pflow {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense-output weights.
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 10.0;
constexpr double kBeta = 0.04;

}  // namespace

Trajectory::Trajectory(FieldFn field, const Domain* domain, Point y0,
                       IntegratorConfig cfg, double direction)
    : field_(std::move(field)),
      domain_(domain),
      cfg_(cfg),
      direction_(direction),
      n_(y0.size()) {
  y_.assign(y0.data(), y0.data() + n_);
  k1_.resize(n_);
  raw_.resize(n_);
  for (auto& w : work_) w.resize(n_);
  // f(y0); direction folds into the field so we always march s upward.
  std::vector<double> tmp(n_);
  field_(y_, tmp);
  for (std::size_t i = 0; i < n_; ++i) k1_[i] = direction_ * tmp[i];
  // Conservative initial step from the field magnitude.
  double fn = 0, yn = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    fn += k1_[i] * k1_[i];
    yn += y_[i] * y_[i];
  }
  fn = std::sqrt(fn);
  yn = std::sqrt(yn);
  double scale = cfg_.abs_tol + cfg_.rel_tol * std::max(1.0, yn);
  h_ = fn > 0 ? 0.01 * std::pow(scale, 0.2) / std::max(fn, 1e-12) : 1e-3;
  h_ = std::min({h_, cfg_.max_step, 1.0});
  h_ = std::max(h_, 1e-10);
}

bool Trajectory::advance() {
  if (stop_ != Stop::None) return false;
  auto& k2 = work_[0];
  auto& k3 = work_[1];
  auto& k4 = work_[2];
  auto& k5 = work_[3];
  auto& k6 = work_[4];
  auto& k7 = work_[5];
  auto& yt = work_[6];
  auto& y1 = work_[7];
  auto& raw = raw_;

  auto rhs = [&](const std::vector<double>& y, std::vector<double>& out) {
    field_(y, raw);
    for (std::size_t i = 0; i < n_; ++i) out[i] = direction_ * raw[i];
  };

  for (int attempt = 0; attempt < 200; ++attempt) {
    double h = std::min(h_, cfg_.max_step);
    if (!(h > std::max(1e-14, 1e-14 * std::abs(t_)))) {
      stop_ = Stop::Stalled;
      stop_time_ = t_;
      return false;
    }

    for (std::size_t i = 0; i < n_; ++i) yt[i] = y_[i] + h * a21 * k1_[i];
    rhs(yt, k2);
    for (std::size_t i = 0; i < n_; ++i)
      yt[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2[i]);
    rhs(yt, k3);
    for (std::size_t i = 0; i < n_; ++i)
      yt[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(yt, k4);
    for (std::size_t i = 0; i < n_; ++i)
      yt[i] = y_[i] +
              h * (a51 * k1_[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(yt, k5);
    for (std::size_t i = 0; i < n_; ++i)
      yt[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2[i] + a63 * k3[i] +
                           a64 * k4[i] + a65 * k5[i]);
    rhs(yt, k6);
    for (std::size_t i = 0; i < n_; ++i)
      y1[i] = y_[i] + h * (a71 * k1_[i] + a73 * k3[i] + a74 * k4[i] +
                           a75 * k5[i] + a76 * k6[i]);
    rhs(y1, k7);

    double err = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      double e = h * (e1 * k1_[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                      e6 * k6[i] + e7 * k7[i]);
      double sc = cfg_.abs_tol +
                  cfg_.rel_tol * std::max(std::abs(y_[i]), std::abs(y1[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / static_cast<double>(n_));

    if (err <= 1.0) {
      // Accept: store the continuous extension.
      Step st;
      st.t0 = t_;
      st.h = h;
      st.r.resize(5 * n_);
      for (std::size_t i = 0; i < n_; ++i) {
        double ydiff = y1[i] - y_[i];
        double bspl = h * k1_[i] - ydiff;
        st.r[5 * i + 0] = y_[i];
        st.r[5 * i + 1] = ydiff;
        st.r[5 * i + 2] = bspl;
        st.r[5 * i + 3] = ydiff - h * k7[i] - bspl;
        st.r[5 * i + 4] = h * (d1 * k1_[i] + d3 * k3[i] + d4 * k4[i] +
                               d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      steps_.push_back(std::move(st));

      t_ += h;
      reach_ = t_;
      std::swap(y_, y1);
      std::swap(k1_, k7);  // FSAL

      // PI step-size control.
      double fac = std::pow(std::max(err, 1e-10), 0.2 - kBeta * 0.75) *
                   std::pow(facold_, kBeta);
      fac = std::clamp(fac / kSafety, 1.0 / kFacMax, 1.0 / kFacMin);
      h_ = h / fac;
      facold_ = std::max(err, 1e-4);

      if (domain_) {
        for (std::size_t c = 0; c < n_; ++c) {
          if (domain_->is_periodic(c)) continue;
          const auto& iv = domain_->box()[c];
          if (y_[c] < iv.lo || y_[c] > iv.hi) {
            stop_ = Stop::LeftDomain;
            stop_time_ = t_;
            break;
          }
        }
      }
      return true;
    }
    // Reject and shrink.
    double fac = std::clamp(kSafety * std::pow(err, -0.2), 1.0 / kFacMax,
                            1.0 / kFacMin);
    h_ = h * std::min(1.0, fac);
  }
  stop_ = Stop::Stalled;
  stop_time_ = t_;
  return false;
}

void Trajectory::eval_step(const Step& s, double t, Point& out) const {
  double th = (t - s.t0) / s.h;
  double th1 = 1.0 - th;
  out = Point(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    const double* r = &s.r[5 * i];
    out[i] = r[0] + th * (r[1] + th1 * (r[2] + th * (r[3] + th1 * r[4])));
  }
}

std::optional<Point> Trajectory::at(double s) {
  if (s < 0) return std::nullopt;
  if (s == 0 && steps_.empty()) {
    Point p(n_);
    for (std::size_t i = 0; i < n_; ++i) p[i] = y_[i];
    return domain_ ? domain_->wrap(p) : p;
  }
  if (s > cfg_.max_horizon * 1.0001) return std::nullopt;
  while (reach_ < s && stop_ == Stop::None) advance();
  if (s > reach_) return std::nullopt;
  // Binary search for the covering step.
  std::size_t lo = 0, hi = steps_.size();
  while (lo + 1 < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (steps_[mid].t0 <= s)
      lo = mid;
    else
      hi = mid;
  }
  Point p;
  eval_step(steps_[lo], s, p);
  return domain_ ? domain_->wrap(p) : p;
}

Point integrate_to(const FieldFn& field, const Domain& domain, const Point& y0,
                   double t, const IntegratorConfig& cfg) {
  if (t == 0) return domain.wrap(y0);
  double dir = t > 0 ? 1.0 : -1.0;
  Trajectory traj(field, &domain, y0, cfg, dir);
  auto p = traj.at(std::abs(t));
  if (p) return *p;
  if (traj.stop_reason() == Trajectory::Stop::LeftDomain)
    throw TrajectoryLeftDomain("trajectory left the domain box",
                               dir * traj.stop_time());
  throw IntegratorStalled("integrator step size underflow");
}

}  // namespace pflow
