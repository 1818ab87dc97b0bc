#pragma once

#include <cstdint>
#include <string>

#include "pflow/flow.hpp"

#include "json.hpp"

namespace pflow::cli {

struct GlobalOptions {
  std::uint64_t seed = 1;
  int threads = 0;
  double tol_scale = 1.0;
};

/// Builds a FlowSpec from its configuration JSON:
///   {"type":"gallery","name":...,"params":{...}}
///   {"type":"polynomial_field","dim":n,"components":[expr...],
///    "class":"C1"|"C2"|"Cinf", "box":[[lo,hi]...], "integrator":{...}}
/// Polynomial components use the expression grammar over x1..xn (aliases
/// x,y,z,w) and get analytic Jacobians by symbolic differentiation.
FlowSpec flow_from_json(const nlohmann::json& cfg);

/// Runs one subcommand (classify, field, generator, fixedpoints, geometry,
/// probe, verify-paper) against a config file. Returns the process exit
/// code: 0 = all checks passed, 1 = violations found, 2 = configuration or
/// runtime error.
int run(const std::string& command, const std::string& config_path,
        const std::string& out_dir, const GlobalOptions& opts);

}  // namespace pflow::cli
