#include "pflow/gallery.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "pflow/errors.hpp"

namespace pflow {
namespace {

// Rotates (x,y) by the fractional part of `turns` full revolutions; keeping
// the argument reduction in turns avoids large-angle trig error at long
// horizons.
inline void rotate_turns(double& x, double& y, double turns) {
  double f = turns - std::floor(turns);
  double ang = 2.0 * M_PI * f;
  double c = std::cos(ang), s = std::sin(ang);
  double nx = c * x - s * y;
  double ny = s * x + c * y;
  x = nx;
  y = ny;
}

Domain plane_box(double half, std::size_t dim) {
  std::vector<Interval> box(dim, Interval{-half, half});
  return Domain(box);
}

GalleryEntry make_seifert(int k) {
  if (k < 2) throw InvalidParam("seifert requires k >= 2");
  GalleryEntry e;
  e.name = "seifert";
  e.flow.kind = FlowSpec::Kind::ClosedForm;
  e.flow.smoothness = Smoothness::Cinf;
  e.flow.name = "seifert(k=" + std::to_string(k) + ")";
  e.flow.domain = Domain({{-1.1, 1.1}, {-1.1, 1.1}, {0.0, 1.0}},
                         {false, false, true});
  const double kk = k;
  e.flow.closed_form = [kk](const Point& p, double t) {
    double x = p[0], y = p[1];
    rotate_turns(x, y, t / kk);
    return Point{x, y, p[2] + t};
  };
  e.flow.field = [kk](std::span<const double> p, std::span<double> f) {
    const double w = 2.0 * M_PI / kk;
    f[0] = -w * p[1];
    f[1] = w * p[0];
    f[2] = 1.0;
  };
  e.flow.field_jacobian = [kk](const Point&, double* J) {
    const double w = 2.0 * M_PI / kk;
    for (int i = 0; i < 9; ++i) J[i] = 0;
    J[0 * 3 + 1] = -w;
    J[1 * 3 + 0] = w;
  };
  e.truth.period = [kk](const Point& p) {
    return std::hypot(p[0], p[1]) > 0 ? kk : 1.0;
  };
  e.truth.theta = [kk](const Point&) { return kk; };
  return e;
}

GalleryEntry make_c_inf_disk() {
  GalleryEntry e;
  e.name = "c_inf_disk";
  e.flow.kind = FlowSpec::Kind::ClosedForm;
  e.flow.smoothness = Smoothness::Cinf;
  e.flow.name = "c_inf_disk";
  e.flow.domain = plane_box(3.0, 2);
  e.flow.closed_form = [](const Point& p, double t) {
    double x = p[0], y = p[1];
    rotate_turns(x, y, t * (x * x + y * y));
    return Point{x, y};
  };
  e.flow.field = [](std::span<const double> p, std::span<double> f) {
    double r2 = p[0] * p[0] + p[1] * p[1];
    f[0] = -2.0 * M_PI * r2 * p[1];
    f[1] = 2.0 * M_PI * r2 * p[0];
  };
  e.flow.field_jacobian = [](const Point& p, double* J) {
    const double c = 2.0 * M_PI;
    double x = p[0], y = p[1];
    J[0] = c * (-2.0 * x * y);
    J[1] = c * (-(x * x + 3.0 * y * y));
    J[2] = c * (3.0 * x * x + y * y);
    J[3] = c * (2.0 * x * y);
  };
  e.truth.period = [](const Point& p) {
    double r2 = p[0] * p[0] + p[1] * p[1];
    return r2 > 0 ? 1.0 / r2 : 0.0;
  };
  e.truth.theta = [](const Point& p) {
    double r2 = p[0] * p[0] + p[1] * p[1];
    return 1.0 / r2;
  };
  e.truth.fixed_point = Point{0.0, 0.0};
  e.truth.jacobian_at_fixed = {0, 0, 0, 0};
  e.truth.expected_class = "ZeroLinearPart";
  return e;
}

GalleryEntry make_c0_disk() {
  GalleryEntry e;
  e.name = "c0_disk";
  e.flow.kind = FlowSpec::Kind::ClosedForm;
  e.flow.smoothness = Smoothness::C0;
  e.flow.name = "c0_disk";
  e.flow.domain = plane_box(2.0, 2);
  e.flow.closed_form = [](const Point& p, double t) {
    double x = p[0], y = p[1];
    double r2 = x * x + y * y;
    if (r2 == 0) return Point{0.0, 0.0};
    rotate_turns(x, y, t / r2);
    return Point{x, y};
  };
  // Analytic field away from the singular fixed point; near 0 the hint is
  // withheld so the finite-difference convergence check sees the C0 nature.
  e.flow.field = [](std::span<const double> p, std::span<double> f) {
    double r2 = p[0] * p[0] + p[1] * p[1];
    if (r2 == 0) {
      f[0] = f[1] = 0;
      return;
    }
    f[0] = -2.0 * M_PI * p[1] / r2;
    f[1] = 2.0 * M_PI * p[0] / r2;
  };
  e.flow.field_valid = [](const Point& p) {
    double r2 = p[0] * p[0] + p[1] * p[1];
    return r2 == 0 || r2 > 1e-6;
  };
  e.truth.period = [](const Point& p) {
    return p[0] * p[0] + p[1] * p[1];
  };
  e.truth.theta = [](const Point& p) { return p[0] * p[0] + p[1] * p[1]; };
  e.truth.fixed_point = Point{0.0, 0.0};
  return e;
}

GalleryEntry make_hamiltonian_even(int b) {
  if (b < 2) throw InvalidParam("hamiltonian_even requires b >= 2");
  GalleryEntry e;
  e.name = "hamiltonian_even";
  e.flow.kind = FlowSpec::Kind::VectorField;
  e.flow.smoothness = Smoothness::Cinf;
  e.flow.name = "hamiltonian_even(b=" + std::to_string(b) + ")";
  e.flow.domain = plane_box(3.0, 2);
  const int bb = b;
  e.flow.field = [bb](std::span<const double> p, std::span<double> f) {
    f[0] = -2.0 * p[1];
    double xp = 1.0;
    for (int i = 0; i < 2 * bb - 1; ++i) xp *= p[0];
    f[1] = 2.0 * bb * xp;
  };
  e.flow.field_jacobian = [bb](const Point& p, double* J) {
    double xp = 1.0;
    for (int i = 0; i < 2 * bb - 2; ++i) xp *= p[0];
    J[0] = 0;
    J[1] = -2.0;
    J[2] = 2.0 * bb * (2 * bb - 1) * xp;
    J[3] = 0;
  };
  e.truth.period = [bb](const Point& p) {
    double c = std::pow(std::abs(p[0]), 2 * bb) + p[1] * p[1];
    if (c == 0) return 0.0;
    double a = std::pow(c, 1.0 / (2 * bb));
    return hamiltonian_even_period(bb, a);
  };
  e.truth.fixed_point = Point{0.0, 0.0};
  e.truth.jacobian_at_fixed = {0, -2, 0, 0};
  e.truth.expected_class = "DegenerateBlock";
  return e;
}

std::shared_ptr<Eigen::MatrixXd> parse_blocks(const nlohmann::json& params) {
  if (!params.contains("blocks") || !params["blocks"].is_array())
    throw InvalidParam("linear flow requires a 'blocks' array");
  std::vector<Eigen::MatrixXd> blocks;
  std::size_t n = 0;
  for (const auto& bj : params["blocks"]) {
    std::string type = bj.value("type", "");
    if (type == "real") {
      double lam = bj.value("lambda", 0.0);
      int q = bj.value("size", 1);
      if (q < 1) throw InvalidParam("block size must be >= 1");
      Eigen::MatrixXd B = Eigen::MatrixXd::Zero(q, q);
      for (int i = 0; i < q; ++i) B(i, i) = lam;
      for (int i = 1; i < q; ++i) B(i, i - 1) = 1.0;
      blocks.push_back(B);
      n += q;
    } else if (type == "pair") {
      double a = bj.value("a", 0.0);
      double bv = bj.value("b", 1.0);
      int q = bj.value("size", 1);
      if (q < 1) throw InvalidParam("block size must be >= 1");
      Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2 * q, 2 * q);
      for (int i = 0; i < q; ++i) {
        B(2 * i, 2 * i) = a;
        B(2 * i, 2 * i + 1) = bv;
        B(2 * i + 1, 2 * i) = -bv;
        B(2 * i + 1, 2 * i + 1) = a;
      }
      for (int i = 1; i < q; ++i) {
        B(2 * i, 2 * (i - 1)) = 1.0;
        B(2 * i + 1, 2 * (i - 1) + 1) = 1.0;
      }
      blocks.push_back(B);
      n += 2 * q;
    } else {
      throw InvalidParam("unknown block type '" + type + "'");
    }
  }
  if (n == 0 || n > Vec::kMaxDim)
    throw InvalidParam("linear flow dimension must be in [1, 8]");
  auto A = std::make_shared<Eigen::MatrixXd>(Eigen::MatrixXd::Zero(n, n));
  std::size_t at = 0;
  for (const auto& B : blocks) {
    A->block(at, at, B.rows(), B.cols()) = B;
    at += B.rows();
  }
  return A;
}

GalleryEntry make_linear(const nlohmann::json& params) {
  auto A = parse_blocks(params);
  const std::size_t n = A->rows();
  GalleryEntry e;
  e.name = "linear";
  e.flow.kind = FlowSpec::Kind::ClosedForm;
  e.flow.smoothness = Smoothness::Cinf;
  e.flow.name = "linear";
  e.flow.domain = plane_box(6.0, n);
  e.flow.closed_form = [A, n](const Point& p, double t) {
    Eigen::VectorXd x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = p[i];
    Eigen::VectorXd y = ((*A) * t).exp() * x;
    Point out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = y[i];
    return out;
  };
  e.flow.field = [A, n](std::span<const double> p, std::span<double> f) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < n; ++j) s += (*A)(i, j) * p[j];
      f[i] = s;
    }
  };
  e.flow.field_jacobian = [A, n](const Point&, double* J) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) J[i * n + j] = (*A)(i, j);
  };
  e.truth.fixed_point = Point(n);
  e.truth.jacobian_at_fixed.resize(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      e.truth.jacobian_at_fixed[i * n + j] = (*A)(i, j);
  return e;
}

GalleryEntry make_saddle() {
  GalleryEntry e;
  e.name = "saddle";
  e.flow.kind = FlowSpec::Kind::ClosedForm;
  e.flow.smoothness = Smoothness::Cinf;
  e.flow.name = "saddle";
  e.flow.domain = plane_box(6.0, 2);
  e.flow.closed_form = [](const Point& p, double t) {
    return Point{p[0] * std::exp(t), p[1] * std::exp(-t)};
  };
  e.flow.field = [](std::span<const double> p, std::span<double> f) {
    f[0] = p[0];
    f[1] = -p[1];
  };
  e.flow.field_jacobian = [](const Point&, double* J) {
    J[0] = 1;
    J[1] = 0;
    J[2] = 0;
    J[3] = -1;
  };
  e.truth.period = [](const Point& p) {
    if (p[0] == 0 && p[1] == 0) return 0.0;
    return std::numeric_limits<double>::quiet_NaN();
  };
  e.truth.fixed_point = Point{0.0, 0.0};
  e.truth.jacobian_at_fixed = {1, 0, 0, -1};
  e.truth.expected_class = "HyperbolicPart";
  return e;
}

GalleryEntry make_rotation(double beta) {
  if (beta == 0) throw InvalidParam("rotation requires beta != 0");
  GalleryEntry e;
  e.name = "rotation";
  e.flow.kind = FlowSpec::Kind::ClosedForm;
  e.flow.smoothness = Smoothness::Cinf;
  e.flow.name = "rotation(beta)";
  e.flow.domain = plane_box(6.0, 2);
  e.flow.closed_form = [beta](const Point& p, double t) {
    double x = p[0], y = p[1];
    rotate_turns(x, y, beta * t / (2.0 * M_PI));
    return Point{x, y};
  };
  e.flow.field = [beta](std::span<const double> p, std::span<double> f) {
    f[0] = -beta * p[1];
    f[1] = beta * p[0];
  };
  e.flow.field_jacobian = [beta](const Point&, double* J) {
    J[0] = 0;
    J[1] = -beta;
    J[2] = beta;
    J[3] = 0;
  };
  e.truth.period = [beta](const Point& p) {
    if (p[0] == 0 && p[1] == 0) return 0.0;
    return 2.0 * M_PI / std::abs(beta);
  };
  e.truth.theta = [beta](const Point&) { return 2.0 * M_PI / std::abs(beta); };
  e.truth.fixed_point = Point{0.0, 0.0};
  e.truth.jacobian_at_fixed = {0, -beta, beta, 0};
  e.truth.expected_class = "PeriodicType";
  return e;
}

GalleryEntry make_flat_circle() {
  GalleryEntry e;
  e.name = "flat_circle";
  e.flow.kind = FlowSpec::Kind::ClosedForm;
  e.flow.smoothness = Smoothness::Cinf;
  e.flow.name = "flat_circle";
  e.flow.domain = plane_box(6.0, 4);
  e.flow.closed_form = [](const Point& p, double t) {
    double x3 = p[2], x4 = p[3];
    rotate_turns(x3, x4, t / (2.0 * M_PI));
    return Point{p[0], p[1] + t * p[0], x3, x4};
  };
  e.flow.field = [](std::span<const double> p, std::span<double> f) {
    f[0] = 0;
    f[1] = p[0];
    f[2] = -p[3];
    f[3] = p[2];
  };
  e.flow.field_jacobian = [](const Point&, double* J) {
    for (int i = 0; i < 16; ++i) J[i] = 0;
    J[1 * 4 + 0] = 1.0;
    J[2 * 4 + 3] = -1.0;
    J[3 * 4 + 2] = 1.0;
  };
  e.truth.period = [](const Point& p) {
    if (p[0] != 0) return std::numeric_limits<double>::quiet_NaN();
    if (p[2] == 0 && p[3] == 0) return 0.0;
    return 2.0 * M_PI;
  };
  e.truth.fixed_point = Point{0.0, 0.0, 0.0, 0.0};
  e.truth.jacobian_at_fixed = {0, 0, 0, 0, 1, 0, 0, 0,
                               0, 0, 0, -1, 0, 0, 1, 0};
  e.truth.expected_class = "DegenerateBlock";
  return e;
}

}  // namespace

double hamiltonian_even_period(int b, double level_a) {
  if (level_a <= 0) throw InvalidParam("level must be positive");
  static std::map<int, double> cache;
  static std::mutex mu;
  double integral;
  {
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(b);
    if (it == cache.end()) {
      // I_b = int_{-pi/2}^{pi/2} dpsi / sqrt(sum_{j<b} sin^(2j) psi),
      // composite Simpson; the integrand is smooth since the sum is >= 1.
      const int n = 4096;
      const double lo = -M_PI / 2, hi = M_PI / 2;
      const double h = (hi - lo) / n;
      auto f = [b](double psi) {
        double s2 = std::sin(psi);
        s2 *= s2;
        double sum = 0, pw = 1;
        for (int j = 0; j < b; ++j) {
          sum += pw;
          pw *= s2;
        }
        return 1.0 / std::sqrt(sum);
      };
      double acc = f(lo) + f(hi);
      for (int i = 1; i < n; ++i) acc += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
      integral = acc * h / 3.0;
      cache[b] = integral;
    } else {
      integral = it->second;
    }
  }
  return std::pow(level_a, 1 - b) * integral;
}

GalleryEntry gallery_get(const std::string& name, const nlohmann::json& params) {
  if (name == "seifert") return make_seifert(params.value("k", 3));
  if (name == "c_inf_disk") return make_c_inf_disk();
  if (name == "c0_disk") return make_c0_disk();
  if (name == "hamiltonian_even")
    return make_hamiltonian_even(params.value("b", 2));
  if (name == "linear") return make_linear(params);
  if (name == "saddle") return make_saddle();
  if (name == "rotation") return make_rotation(params.value("beta", 1.0));
  if (name == "flat_circle") return make_flat_circle();
  throw UnknownName("unknown gallery flow '" + name + "'");
}

std::vector<std::string> gallery_names() {
  return {"seifert", "c_inf_disk",  "c0_disk", "hamiltonian_even",
          "linear",  "saddle",      "rotation", "flat_circle"};
}

}  // namespace pflow
