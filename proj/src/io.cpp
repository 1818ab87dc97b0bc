#include "pflow/io.hpp"

#include <cstdio>
#include <fstream>

#include "pflow/errors.hpp"

namespace pflow::io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void append_coords(std::string& out, const Point& p) {
  for (std::size_t c = 0; c < p.size(); ++c) {
    out += format_double(p[c]);
    out += ',';
  }
}

std::string coord_header(std::size_t dim) {
  std::string h;
  for (std::size_t c = 0; c < dim; ++c) {
    h += "x" + std::to_string(c + 1);
    h += ',';
  }
  return h;
}

}  // namespace

std::string classification_csv(
    const std::vector<std::pair<Point, PeriodResult>>& rows) {
  std::string out;
  if (!rows.empty()) out += coord_header(rows.front().first.size());
  out += "status,minimal_period,return_residual,evidence\n";
  for (const auto& [p, r] : rows) {
    append_coords(out, p);
    out += to_string(r.status);
    out += ',';
    out += format_double(r.minimal_period);
    out += ',';
    out += format_double(r.return_residual);
    out += ',';
    out += format_double(r.evidence);
    out += '\n';
  }
  return out;
}

std::string field_csv(const PeriodFunctionField& f) {
  std::string out = coord_header(f.dim);
  out += "per,theta,multiplier,dense_mask,residual\n";
  for (std::size_t i = 0; i < f.n_nodes(); ++i) {
    if (!f.active[i]) continue;
    append_coords(out, f.point_at(i));
    double per = f.per[i].status == PeriodStatus::Periodic
                     ? f.per[i].minimal_period
                     : 0.0;
    out += format_double(per);
    out += ',';
    out += format_double(f.theta[i]);
    out += ',';
    out += std::to_string(f.multiplier[i]);
    out += ',';
    out += f.dense_mask[i] ? '1' : '0';
    out += ',';
    out += format_double(f.residual[i]);
    out += '\n';
  }
  return out;
}

std::string geometry_csv(const std::vector<OrbitGeometry>& rows) {
  std::string out = "orbit,period,length,diameter,sup_speed,slack1,slack2\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& g = rows[i];
    out += std::to_string(i);
    for (double v : {g.period, g.length, g.diameter, g.sup_speed,
                     g.slack_diameter, g.slack_speed}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

nlohmann::json to_json(const ZpActionReport& r) {
  return {{"p", r.p},
          {"max_pth_iterate_displacement", r.max_pth_iterate_displacement},
          {"max_generator_displacement", r.max_generator_displacement},
          {"identity_on_test_set", r.identity_on_test_set},
          {"divisible", r.divisible},
          {"samples_used", r.samples_used}};
}

nlohmann::json to_json(const ConditionReport& r) {
  nlohmann::json fps = nlohmann::json::array();
  for (const auto& p : r.fixed_points) {
    nlohmann::json c = nlohmann::json::array();
    for (const auto& s : p.c) c.push_back({{"radius", s.radius}, {"modulus", s.value}});
    nlohmann::json e = nlohmann::json::array();
    for (const auto& s : p.e_ratios)
      e.push_back({{"radius", s.radius}, {"ratio", s.value}});
    nlohmann::json z = nlohmann::json::array();
    for (std::size_t i = 0; i < p.z.size(); ++i) z.push_back(p.z[i]);
    fps.push_back({{"z", z},
                   {"b_regular", p.b_regular},
                   {"c_modulus", c},
                   {"d_pth_power_identity", p.d_pth_power_identity},
                   {"d_max_displacement", p.d_max_displacement},
                   {"e_ratios", e},
                   {"e_constant", p.e_constant},
                   {"e_holds", p.e_holds}});
  }
  return {{"alpha", {{"q", r.alpha_q}, {"p", r.alpha_p}}},
          {"condition_a",
           {{"holds", r.a_holds},
            {"bound", r.a_bound},
            {"unbounded_hits", r.a_unbounded_hits}}},
          {"fixed_points", fps}};
}

nlohmann::json to_json(const LinearPart& lp) {
  nlohmann::json evs = nlohmann::json::array();
  for (auto e : lp.eigenvalues) evs.push_back({{"re", e.real()}, {"im", e.imag()}});
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : lp.blocks)
    blocks.push_back({{"complex_pair", b.complex_pair},
                      {"re", b.re},
                      {"im", b.im},
                      {"size", b.size}});
  return {{"n", lp.n},
          {"matrix", lp.matrix},
          {"eigenvalues", evs},
          {"blocks", blocks},
          {"fd_error", lp.fd_error}};
}

nlohmann::json to_json(const FixedPointClass& c) {
  nlohmann::json j = to_json(c.linear);
  j["verdict"] = to_string(c.verdict);
  j["details"] = c.details;
  return j;
}

nlohmann::json to_json(const BlowupReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.radii)
    rows.push_back({{"radius", row.radius},
                    {"min_period", row.min_period},
                    {"n_periodic", row.n_periodic},
                    {"n_evidence", row.n_evidence},
                    {"n_samples", row.n_samples}});
  return {{"radii", rows},
          {"periods_strictly_increase", r.periods_strictly_increase},
          {"blowup_observed", r.blowup_observed}};
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << content;
  if (!f.good()) throw Error("short write to '" + path + "'");
}

}  // namespace pflow::io
