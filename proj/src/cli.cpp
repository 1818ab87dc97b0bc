#include "pflow/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include <Eigen/Dense>

#include "pflow/acceptance.hpp"
#include "pflow/errors.hpp"
#include "pflow/expr.hpp"
#include "pflow/gallery.hpp"
#include "pflow/io.hpp"
#include "pflow/linearization.hpp"
#include "pflow/orbit_geometry.hpp"
#include "pflow/parallel.hpp"
#include "pflow/period_function.hpp"

namespace pflow::cli {
namespace {

using nlohmann::json;

IntegratorConfig integrator_from_json(const json& j) {
  IntegratorConfig cfg;
  cfg.abs_tol = j.value("abs_tol", cfg.abs_tol);
  cfg.rel_tol = j.value("rel_tol", cfg.rel_tol);
  cfg.max_step = j.value("max_step", cfg.max_step);
  cfg.max_horizon = j.value("max_horizon", cfg.max_horizon);
  return cfg;
}

Smoothness smoothness_from_string(const std::string& s) {
  if (s == "C0") return Smoothness::C0;
  if (s == "C1") return Smoothness::C1;
  if (s == "C2") return Smoothness::C2;
  if (s == "Cinf") return Smoothness::Cinf;
  throw InvalidParam("unknown smoothness class '" + s + "'");
}

FlowSpec polynomial_flow(const json& cfg) {
  const std::size_t dim = cfg.at("dim").get<std::size_t>();
  if (dim == 0 || dim > Vec::kMaxDim)
    throw InvalidParam("polynomial_field dim must be in [1, 8]");
  const auto& comps = cfg.at("components");
  if (!comps.is_array() || comps.size() != dim)
    throw InvalidParam("polynomial_field needs one component per dimension");

  auto asts = std::make_shared<std::vector<expr::AstPtr>>();
  auto jac = std::make_shared<std::vector<expr::AstPtr>>();  // row-major
  for (const auto& c : comps)
    asts->push_back(expr::parse(c.get<std::string>(), dim));
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      jac->push_back(expr::derivative(*(*asts)[i], j));

  FlowSpec flow;
  flow.kind = FlowSpec::Kind::VectorField;
  flow.smoothness = smoothness_from_string(cfg.value("class", "Cinf"));
  flow.name = "polynomial_field";
  std::vector<Interval> box(dim, Interval{-10.0, 10.0});
  if (cfg.contains("box")) {
    const auto& bj = cfg["box"];
    if (bj.size() != dim) throw InvalidParam("box size mismatch");
    for (std::size_t c = 0; c < dim; ++c)
      box[c] = {bj[c][0].get<double>(), bj[c][1].get<double>()};
  }
  flow.domain = Domain(box);
  flow.field = [asts, dim](std::span<const double> x, std::span<double> f) {
    for (std::size_t i = 0; i < dim; ++i) f[i] = expr::eval(*(*asts)[i], x);
  };
  flow.field_jacobian = [jac, dim](const Point& x, double* J) {
    for (std::size_t k = 0; k < dim * dim; ++k)
      J[k] = expr::eval(*(*jac)[k], x.span());
  };
  if (cfg.contains("integrator"))
    flow.integrator = integrator_from_json(cfg["integrator"]);
  flow.validate();
  return flow;
}

}  // namespace

FlowSpec flow_from_json(const json& cfg) {
  const std::string type = cfg.at("type").get<std::string>();
  if (type == "gallery") {
    auto entry = gallery_get(cfg.at("name").get<std::string>(),
                             cfg.value("params", json::object()));
    if (cfg.contains("integrator"))
      entry.flow.integrator = integrator_from_json(cfg["integrator"]);
    return entry.flow;
  }
  if (type == "polynomial_field") return polynomial_flow(cfg);
  throw InvalidParam("unknown flow type '" + type + "'");
}

namespace {

GridSpec grid_from_json(const json& cfg) {
  GridSpec g;
  for (const auto& iv : cfg.at("box"))
    g.box.push_back({iv[0].get<double>(), iv[1].get<double>()});
  for (const auto& n : cfg.at("counts")) g.counts.push_back(n.get<std::size_t>());
  if (cfg.contains("mask")) {
    const auto& m = cfg["mask"];
    const std::string type = m.value("type", "none");
    if (type == "annulus") {
      std::vector<double> center = m.value("center", std::vector<double>{0, 0});
      double rmin = m.value("rmin", 0.0), rmax = m.value("rmax", 1e300);
      g.mask = [center, rmin, rmax](const Point& p) {
        double s = 0;
        for (std::size_t c = 0; c < center.size() && c < p.size(); ++c)
          s += (p[c] - center[c]) * (p[c] - center[c]);
        double r = std::sqrt(s);
        return r >= rmin - 1e-12 && r <= rmax + 1e-12;
      };
    } else if (type != "none") {
      throw InvalidParam("unknown mask type '" + type + "'");
    }
  }
  return g;
}

DetectorConfig detector_from_json(const json& cfg, double tol_scale) {
  DetectorConfig d;
  d.horizon = cfg.value("horizon", d.horizon);
  d.return_tol = cfg.value("return_tol", d.return_tol) * tol_scale;
  d.fixed_tol = cfg.value("fixed_tol", d.fixed_tol) * tol_scale;
  d.t_floor = cfg.value("t_floor", d.t_floor);
  d.m_max = cfg.value("m_max", d.m_max);
  d.refine_bracket = cfg.value("refine_bracket", d.refine_bracket);
  d.octave_samples = cfg.value("octave_samples", d.octave_samples);
  d.t_scan_min = cfg.value("t_scan_min", d.t_scan_min);
  return d;
}

std::vector<Point> points_from_json(const json& arr, std::size_t dim) {
  std::vector<Point> pts;
  for (const auto& pj : arr) {
    if (pj.size() != dim) throw InvalidParam("point dimension mismatch");
    Point p(dim);
    for (std::size_t c = 0; c < dim; ++c) p[c] = pj[c].get<double>();
    pts.push_back(p);
  }
  return pts;
}

json load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidParam("cannot read config '" + path + "'");
  json j;
  f >> j;
  return j;
}

int cmd_classify(const json& cfg, const std::string& out_dir,
                 const GlobalOptions& opts) {
  FlowSpec flow = flow_from_json(cfg.at("flow"));
  DetectorConfig det =
      detector_from_json(cfg.value("detector", json::object()), opts.tol_scale);
  std::vector<Point> pts;
  if (cfg.contains("points")) {
    pts = points_from_json(cfg["points"], flow.domain.dim());
  } else if (cfg.contains("grid")) {
    GridSpec g = grid_from_json(cfg["grid"]);
    std::size_t total = 1;
    for (auto c : g.counts) total *= c;
    for (std::size_t i = 0; i < total; ++i) {
      Point p(g.box.size());
      std::size_t idx = i;
      for (std::size_t c = g.box.size(); c-- > 0;) {
        std::size_t k = idx % g.counts[c];
        idx /= g.counts[c];
        p[c] = g.counts[c] == 1
                   ? g.box[c].lo
                   : g.box[c].lo + (g.box[c].hi - g.box[c].lo) *
                                       static_cast<double>(k) /
                                       static_cast<double>(g.counts[c] - 1);
      }
      if (!g.mask || g.mask(p)) pts.push_back(p);
    }
  } else {
    throw InvalidParam("classify needs 'points' or 'grid'");
  }

  std::vector<std::pair<Point, PeriodResult>> rows(pts.size());
  parallel_for(pts.size(), opts.threads, [&](std::size_t i) {
    rows[i] = {pts[i], classify_point(flow, pts[i], det)};
  });
  io::write_file(out_dir + "/classify.csv", io::classification_csv(rows));
  return 0;
}

int cmd_field(const json& cfg, const std::string& out_dir,
              const GlobalOptions& opts, bool with_generator) {
  FlowSpec flow = flow_from_json(cfg.at("flow"));
  FieldBuildConfig fb;
  fb.threads = opts.threads;
  fb.detector =
      detector_from_json(cfg.value("detector", json::object()), opts.tol_scale);
  const auto& bj = cfg.value("build", json::object());
  fb.continuity_tol = bj.value("continuity_tol", fb.continuity_tol);
  fb.verify_tol = bj.value("verify_tol", fb.verify_tol) * opts.tol_scale;
  fb.max_multiplier = bj.value("max_multiplier", fb.max_multiplier);

  PeriodFunctionField field =
      build_period_field(flow, grid_from_json(cfg.at("grid")), fb);

  json summary;
  summary["seed"] = opts.seed;
  summary["no_periodic_points"] = field.no_periodic_points;
  summary["max_residual"] = field.max_residual;
  bool verified = field.max_residual < fb.verify_tol;
  summary["verified"] = verified;

  if (with_generator) {
    ZpConfig zc;
    zc.verify_tol = fb.verify_tol;
    zc.threads = opts.threads;
    zc.seed = opts.seed;
    int primes_up_to = cfg.value("generator", json::object()).value("primes_up_to", 7);
    GeneratorResult gen = detect_generator(flow, field, primes_up_to, zc);
    json zps = json::array();
    for (int p : gen.primes_tested)
      zps.push_back(io::to_json(zp_divisibility_test(flow, gen.field, p, zc)));
    summary["group"] = gen.group;
    summary["divisions_applied"] = gen.divisions_applied;
    summary["zp_reports"] = zps;
    io::write_file(out_dir + "/generator.csv", io::field_csv(gen.field));
    verified = verified && gen.field.max_residual < fb.verify_tol;
  } else {
    io::write_file(out_dir + "/field.csv", io::field_csv(field));
  }
  io::write_file(out_dir + "/field_summary.json", summary.dump(2));
  return verified ? 0 : 1;
}

int cmd_fixedpoints(const json& cfg, const std::string& out_dir,
                    const GlobalOptions&) {
  FlowSpec flow = flow_from_json(cfg.at("flow"));
  const std::size_t dim = flow.domain.dim();
  GridSpec g = grid_from_json(cfg.at("grid"));

  // Coarse scan for |F| minima, then Newton refinement.
  std::vector<Point> seeds;
  {
    std::vector<std::size_t> counts = g.counts;
    std::size_t total = 1;
    for (auto c : counts) total *= c;
    for (std::size_t i = 0; i < total; ++i) {
      Point p(dim);
      std::size_t idx = i;
      for (std::size_t c = dim; c-- > 0;) {
        std::size_t k = idx % counts[c];
        idx /= counts[c];
        p[c] = counts[c] == 1
                   ? g.box[c].lo
                   : g.box[c].lo + (g.box[c].hi - g.box[c].lo) *
                                       static_cast<double>(k) /
                                       static_cast<double>(counts[c] - 1);
      }
      if (g.mask && !g.mask(p)) continue;
      try {
        if (evaluate_field(flow, p).norm() < 0.5) seeds.push_back(p);
      } catch (const Error&) {
      }
    }
  }
  std::vector<Point> found;
  for (const Point& s : seeds) {
    Point x = s;
    bool ok = false;
    for (int it = 0; it < 60; ++it) {
      Vec f;
      try {
        f = evaluate_field(flow, x);
      } catch (const Error&) {
        break;
      }
      if (f.norm() < 1e-12) {
        ok = true;
        break;
      }
      LinearPart lp;
      try {
        lp = jacobian_at(flow, x);
      } catch (const Error&) {
        break;
      }
      Eigen::MatrixXd J(dim, dim);
      Eigen::VectorXd rhs(dim);
      for (std::size_t i = 0; i < dim; ++i) {
        rhs(i) = -f[i];
        for (std::size_t j = 0; j < dim; ++j) J(i, j) = lp.matrix[i * dim + j];
      }
      Eigen::VectorXd dx = J.fullPivLu().solve(rhs);
      if (!dx.allFinite()) break;
      double step = dx.norm();
      for (std::size_t c = 0; c < dim; ++c) x[c] += dx(c);
      if (step < 1e-14) {
        ok = evaluate_field(flow, x).norm() < 1e-9;
        break;
      }
    }
    if (!ok) continue;
    bool dup = false;
    for (const Point& q : found)
      if (flow.domain.distance(q, x) < 1e-6) dup = true;
    if (!dup) found.push_back(x);
  }

  json out = json::array();
  for (const Point& z : found) {
    json row;
    json zj = json::array();
    for (std::size_t c = 0; c < dim; ++c) zj.push_back(z[c]);
    row["fixed_point"] = zj;
    try {
      row.update(io::to_json(classify_fixed_point(flow, z)));
    } catch (const Error& e) {
      row["error"] = e.what();
    }
    out.push_back(row);
  }
  io::write_file(out_dir + "/fixedpoints.json", out.dump(2));
  return 0;
}

int cmd_geometry(const json& cfg, const std::string& out_dir,
                 const GlobalOptions& opts) {
  FlowSpec flow = flow_from_json(cfg.at("flow"));
  DetectorConfig det =
      detector_from_json(cfg.value("detector", json::object()), opts.tol_scale);
  int quad_n = cfg.value("geometry", json::object()).value("quad_n", 4096);
  std::vector<Point> pts = points_from_json(cfg.at("points"), flow.domain.dim());

  std::vector<OrbitGeometry> rows;
  bool ok = true;
  for (const Point& x : pts) {
    PeriodResult r = classify_point(flow, x, det);
    if (r.status != PeriodStatus::Periodic) {
      ok = false;
      continue;
    }
    OrbitGeometry gm = orbit_geometry(flow, x, r.minimal_period, quad_n);
    if (gm.slack_diameter < -1e-7 || gm.slack_speed < -1e-7) ok = false;
    rows.push_back(gm);
  }
  io::write_file(out_dir + "/geometry.csv", io::geometry_csv(rows));
  return ok ? 0 : 1;
}

int cmd_probe(const json& cfg, const std::string& out_dir,
              const GlobalOptions& opts) {
  FlowSpec flow = flow_from_json(cfg.at("flow"));
  const json pj = cfg.value("probe", json::object());
  json out;

  if (cfg.contains("grid")) {
    FieldBuildConfig fb;
    fb.threads = opts.threads;
    fb.detector = detector_from_json(cfg.value("detector", json::object()),
                                     opts.tol_scale);
    PeriodFunctionField field =
        build_period_field(flow, grid_from_json(cfg["grid"]), fb);
    ProbeConfig pc;
    pc.detector = fb.detector;
    pc.threads = opts.threads;
    pc.seed = opts.seed;
    pc.ball_radius = pj.value("ball_radius", pc.ball_radius);
    std::vector<Point> fps;
    if (pj.contains("fixed_points"))
      fps = points_from_json(pj["fixed_points"], flow.domain.dim());
    int q = 1, p = 2;
    if (pj.contains("alpha")) {
      q = pj["alpha"][0].get<int>();
      p = pj["alpha"][1].get<int>();
    }
    out["conditions"] = io::to_json(probe_conditions(flow, field, fps, q, p, pc));
  }

  if (pj.contains("blowup")) {
    const json& bj = pj["blowup"];
    BlowupConfig bc;
    bc.threads = opts.threads;
    bc.seed = opts.seed;
    bc.detector = detector_from_json(cfg.value("detector", json::object()),
                                     opts.tol_scale);
    bc.directions = bj.value("dirs", bc.directions);
    std::vector<double> radii = bj.at("radii").get<std::vector<double>>();
    Point center(flow.domain.dim());
    if (bj.contains("center")) {
      auto cs = bj["center"].get<std::vector<double>>();
      for (std::size_t c = 0; c < cs.size() && c < center.size(); ++c)
        center[c] = cs[c];
    }
    BlowupReport rep = period_blowup_probe(
        flow, center, bj.value("epsilon", 0.5), radii,
        bj.value("threshold", 1e9), bc);
    out["blowup"] = io::to_json(rep);
  }
  io::write_file(out_dir + "/probe.json", out.dump(2));
  return 0;
}

}  // namespace

int run(const std::string& command, const std::string& config_path,
        const std::string& out_dir, const GlobalOptions& opts) {
  try {
    std::filesystem::create_directories(out_dir.empty() ? "." : out_dir);
    const std::string out = out_dir.empty() ? "." : out_dir;

    if (command == "verify-paper") {
      AcceptanceOptions ao;
      ao.threads = opts.threads;
      ao.seed = opts.seed;
      ao.out_dir = out;
      auto results = run_acceptance(ao);
      for (const auto& r : results)
        if (!r.pass) return 1;
      return 0;
    }

    json cfg = load_config(config_path);
    if (command == "classify") return cmd_classify(cfg, out, opts);
    if (command == "field") return cmd_field(cfg, out, opts, false);
    if (command == "generator") return cmd_field(cfg, out, opts, true);
    if (command == "fixedpoints") return cmd_fixedpoints(cfg, out, opts);
    if (command == "geometry") return cmd_geometry(cfg, out, opts);
    if (command == "probe") return cmd_probe(cfg, out, opts);
    std::fprintf(stderr, "unknown command '%s'\n", command.c_str());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace pflow::cli
