#include "pflow/linearization.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "pflow/errors.hpp"
#include "pflow/parallel.hpp"

namespace pflow {

const char* to_string(FixedPointVerdict v) {
  switch (v) {
    case FixedPointVerdict::HyperbolicPart: return "HyperbolicPart";
    case FixedPointVerdict::DegenerateBlock: return "DegenerateBlock";
    case FixedPointVerdict::ZeroLinearPart: return "ZeroLinearPart";
    case FixedPointVerdict::PeriodicType: return "PeriodicType";
    case FixedPointVerdict::Indeterminate: return "Indeterminate";
  }
  return "?";
}

namespace {

Eigen::MatrixXd fd_jacobian(const FlowSpec& flow, const Point& z, double h) {
  const std::size_t n = z.size();
  Eigen::MatrixXd J(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    Point xp = z, xm = z;
    xp[j] += h;
    xm[j] -= h;
    Vec fp = evaluate_field(flow, xp);
    Vec fm = evaluate_field(flow, xm);
    for (std::size_t i = 0; i < n; ++i) J(i, j) = (fp[i] - fm[i]) / (2 * h);
  }
  return J;
}

}  // namespace

LinearPart jacobian_at(const FlowSpec& flow, const Point& z, double fd_step,
                       double eig_tol) {
  if (flow.smoothness == Smoothness::C0)
    throw NotC1("jacobian_at requires a flow of class C1 or better");
  const std::size_t n = z.size();
  LinearPart lp;
  lp.n = n;
  lp.matrix.resize(n * n);

  if (flow.field_jacobian) {
    flow.field_jacobian(z, lp.matrix.data());
    return lp;
  }

  const double h =
      fd_step > 0 ? fd_step
                  : std::pow(std::numeric_limits<double>::epsilon(), 1.0 / 3) *
                        std::max(1.0, z.norm());
  Eigen::MatrixXd Jh = fd_jacobian(flow, z, h);
  Eigen::MatrixXd Jh2 = fd_jacobian(flow, z, h / 2);
  // Richardson: central differences have O(h^2) error.
  Eigen::MatrixXd J = (4.0 * Jh2 - Jh) / 3.0;
  lp.fd_error = (Jh2 - Jh).norm();
  double scale = std::max(1.0, J.norm());
  if (lp.fd_error > 10.0 * eig_tol * scale * 100.0)
    throw FDNonConvergent("Richardson Jacobian estimates disagree");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) lp.matrix[i * n + j] = J(i, j);
  return lp;
}

LinearPart real_jordan_classify(std::span<const double> matrix_rowmajor,
                                std::size_t n, double eig_tol) {
  if (matrix_rowmajor.size() != n * n)
    throw InvalidParam("matrix size mismatch");
  LinearPart lp;
  lp.n = n;
  lp.matrix.assign(matrix_rowmajor.begin(), matrix_rowmajor.end());

  Eigen::MatrixXd A(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) A(i, j) = matrix_rowmajor[i * n + j];

  const double scale = A.jacobiSvd().singularValues()(0);
  lp.scale = scale;
  if (scale < eig_tol) {
    // Zero matrix: n trivial blocks.
    for (std::size_t i = 0; i < n; ++i) {
      lp.eigenvalues.push_back({0.0, 0.0});
      lp.blocks.push_back({false, 0.0, 0.0, 1});
    }
    return lp;
  }

  Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success)
    throw IllConditioned("eigenvalue iteration failed");
  std::vector<std::complex<double>> evs(n);
  for (std::size_t i = 0; i < n; ++i) evs[i] = es.eigenvalues()(i);
  std::sort(evs.begin(), evs.end(), [](auto a, auto b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  lp.eigenvalues = evs;

  // Cluster eigenvalues within the decision radius.
  const double tol = eig_tol * scale;
  struct Cluster {
    std::complex<double> center;
    int count = 0;
  };
  std::vector<Cluster> clusters;
  for (auto ev : evs) {
    bool placed = false;
    for (auto& c : clusters) {
      if (std::abs(ev - c.center) <= 4.0 * tol) {
        c.center = (c.center * static_cast<double>(c.count) + ev) /
                   static_cast<double>(c.count + 1);
        c.count += 1;
        placed = true;
        break;
      }
    }
    if (!placed) clusters.push_back({ev, 1});
  }
  // Snap near-real / near-imaginary-pair centers.
  for (auto& c : clusters)
    if (std::abs(c.center.imag()) <= 2.0 * tol)
      c.center = {c.center.real(), 0.0};
  for (std::size_t i = 0; i < clusters.size(); ++i)
    for (std::size_t j = i + 1; j < clusters.size(); ++j) {
      double d = std::abs(clusters[i].center - clusters[j].center);
      if (d > 0 && d <= 12.0 * tol)
        throw IllConditioned(
            "eigenvalue clusters separated below the decision radius");
    }

  // Rank filtration per cluster representative with Im >= 0.
  Eigen::MatrixXcd Ac = A.cast<std::complex<double>>();
  for (const auto& c : clusters) {
    if (c.center.imag() < 0) continue;  // conjugate handled with its partner
    const bool pair = c.center.imag() > 0;
    const int mult = c.count;  // complex: count of the +i member
    Eigen::MatrixXcd B = Ac - c.center * Eigen::MatrixXcd::Identity(n, n);
    std::vector<int> rank(n + 2);
    rank[0] = static_cast<int>(n);
    Eigen::MatrixXcd P = Eigen::MatrixXcd::Identity(n, n);
    int stable = rank[0];
    std::vector<int> nblocks_ge(n + 2, 0);
    for (std::size_t j = 1; j <= n; ++j) {
      P = P * B;
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(P);
      const auto& sv = svd.singularValues();
      double cutoff = eig_tol * std::max(sv.size() ? sv(0) : 0.0,
                                         std::pow(scale, double(j)) * 1e-9);
      int r = 0;
      for (int k = 0; k < sv.size(); ++k)
        if (sv(k) > cutoff) ++r;
      rank[j] = r;
      if (rank[j] == rank[j - 1]) {
        stable = rank[j];
        break;
      }
      stable = rank[j];
    }
    // nu_j = rank[j-1] - rank[j] counts blocks of size >= j.
    int total = 0;
    std::vector<int> nu(n + 1, 0);
    for (std::size_t j = 1; j <= n; ++j) {
      nu[j] = (rank[j - 1] > rank[j]) ? rank[j - 1] - rank[j] : 0;
      if (rank[j] <= stable && nu[j] == 0) break;
    }
    for (std::size_t j = 1; j <= n; ++j) {
      int exact = nu[j] - (j < n ? nu[j + 1] : 0);
      for (int k = 0; k < exact; ++k) {
        lp.blocks.push_back(
            {pair, c.center.real(), c.center.imag(), static_cast<int>(j)});
        total += static_cast<int>(j);
      }
    }
    if (total != mult)
      throw IllConditioned("generalized eigenspace filtration inconsistent");
  }
  // Canonical order: by eigenvalue then size.
  std::sort(lp.blocks.begin(), lp.blocks.end(), [](const auto& a, const auto& b) {
    if (a.re != b.re) return a.re < b.re;
    if (a.im != b.im) return a.im < b.im;
    return a.size < b.size;
  });
  int dim_sum = 0;
  for (const auto& b : lp.blocks) dim_sum += b.size * (b.complex_pair ? 2 : 1);
  if (dim_sum != static_cast<int>(n))
    throw IllConditioned("block dimensions do not sum to n");
  return lp;
}

FixedPointClass classify_fixed_point(const FlowSpec& flow, const Point& z,
                                     double eig_tol) {
  FixedPointClass out;
  LinearPart jac = jacobian_at(flow, z, 0, eig_tol);
  try {
    out.linear = real_jordan_classify(jac.matrix, jac.n, eig_tol);
  } catch (const IllConditioned& e) {
    out.linear = jac;
    out.verdict = FixedPointVerdict::Indeterminate;
    out.details = e.what();
    return out;
  }
  out.linear.fd_error = jac.fd_error;
  const double scale = std::max(out.linear.scale, 0.0);
  const double tol = eig_tol * std::max(1.0, scale);

  for (const auto& ev : out.linear.eigenvalues) {
    if (std::abs(ev.real()) > tol) {
      out.verdict = FixedPointVerdict::HyperbolicPart;
      out.details = "eigenvalue with nonzero real part";
      return out;
    }
  }
  for (const auto& b : out.linear.blocks) {
    if (b.size >= 2) {
      out.verdict = FixedPointVerdict::DegenerateBlock;
      out.details = b.complex_pair ? "block J_q(+-ib), q >= 2"
                                   : "block J_q(0), q >= 2";
      return out;
    }
  }
  if (scale < eig_tol) {
    out.verdict = FixedPointVerdict::ZeroLinearPart;
    out.details = "vanishing linear part";
    return out;
  }
  bool any_rotation = false;
  for (const auto& b : out.linear.blocks)
    if (b.complex_pair && std::abs(b.im) > tol) any_rotation = true;
  if (any_rotation) {
    out.verdict = FixedPointVerdict::PeriodicType;
    out.details = "semisimple, purely imaginary spectrum";
  } else {
    out.verdict = FixedPointVerdict::Indeterminate;
    out.details = "semisimple spectrum without a rotation pair";
  }
  return out;
}

std::vector<GammaEstimate> gamma_estimate(const FlowSpec& flow, const Point& z,
                                          double T,
                                          std::span<const double> radii,
                                          const GammaConfig& cfg) {
  const std::size_t dim = z.size();
  std::vector<GammaEstimate> out;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss;
  std::vector<Vec> dirs;
  for (int d = 0; d < cfg.directions; ++d) {
    Vec v(dim);
    double n2 = 0;
    do {
      for (std::size_t c = 0; c < dim; ++c) v[c] = gauss(rng);
      n2 = v.norm2();
    } while (n2 < 1e-12);
    v *= 1.0 / std::sqrt(n2);
    dirs.push_back(v);
  }
  for (double r : radii) {
    GammaEstimate g;
    g.radius = r;
    for (const auto& d : dirs) {
      Point x = flow.domain.wrap(z + d * r);
      for (int k = -cfg.time_samples; k <= cfg.time_samples; ++k) {
        double t = T * k / cfg.time_samples;
        try {
          Point y = evaluate_flow(flow, x, t);
          double f = evaluate_field(flow, y).norm();
          g.gamma = std::max(g.gamma, f / r);
          g.quad_fit_m = std::max(g.quad_fit_m, f / (r * r));
        } catch (const Error&) {
          break;
        }
      }
    }
    out.push_back(g);
  }
  return out;
}

BlowupReport period_blowup_probe(const FlowSpec& flow, const Point& z,
                                 double eps_cone,
                                 std::span<const double> radii,
                                 double threshold_T, const BlowupConfig& cfg) {
  const std::size_t dim = z.size();
  std::vector<Vec> dirs = cfg.explicit_dirs;
  if (dirs.empty()) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss;
    int guard = 0;
    while (dirs.size() < static_cast<std::size_t>(cfg.directions) &&
           guard++ < cfg.directions * 400) {
      Vec v(dim);
      double n2 = 0;
      for (std::size_t c = 0; c < dim; ++c) v[c] = gauss(rng);
      n2 = v.norm2();
      if (n2 < 1e-12) continue;
      v *= 1.0 / std::sqrt(n2);
      if (std::abs(v[cfg.cone_coord]) < eps_cone) continue;  // outside C_eps
      dirs.push_back(v);
    }
  }

  BlowupReport rep;
  rep.radii.resize(radii.size());
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    BlowupRadius& row = rep.radii[ri];
    row.radius = radii[ri];
    std::vector<PeriodResult> results(dirs.size());
    parallel_for(dirs.size(), cfg.threads, [&](std::size_t di) {
      Point x = flow.domain.wrap(z + dirs[di] * radii[ri]);
      results[di] = classify_point(flow, x, cfg.detector);
    });
    double minp = std::numeric_limits<double>::infinity();
    for (const auto& r : results) {
      ++row.n_samples;
      switch (r.status) {
        case PeriodStatus::Periodic:
          ++row.n_periodic;
          minp = std::min(minp, r.minimal_period);
          break;
        case PeriodStatus::NonPeriodicEvidence:
          ++row.n_evidence;
          break;
        case PeriodStatus::Unknown:
          // Escape without return counts as non-periodicity evidence.
          if (r.left_domain && r.evidence > 0) ++row.n_evidence;
          break;
        default:
          break;
      }
    }
    row.min_period = std::isfinite(minp) ? minp : 0.0;
  }

  bool increasing = rep.radii.size() >= 2;
  for (std::size_t i = 1; i < rep.radii.size(); ++i) {
    if (!(rep.radii[i].n_periodic > 0 && rep.radii[i - 1].n_periodic > 0) ||
        !(rep.radii[i].min_period > rep.radii[i - 1].min_period))
      increasing = false;
  }
  rep.periods_strictly_increase = increasing;
  const BlowupRadius last = rep.radii.empty() ? BlowupRadius{} : rep.radii.back();
  const bool evidence_at_smallest = last.n_evidence > 0 && last.n_periodic == 0;
  const bool periodic_beyond =
      last.n_periodic > 0 && last.min_period > threshold_T;
  rep.blowup_observed = evidence_at_smallest || periodic_beyond;
  return rep;
}

}  // namespace pflow
