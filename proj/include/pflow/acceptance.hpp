#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace pflow {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double seconds = 0;
  std::string detail;
};

struct AcceptanceOptions {
  int threads = 0;
  std::uint64_t seed = 20091015;  // recorded in the summary report
  std::string out_dir;            // optional: JSON summary destination
  /// Per-line progress sink; defaults to stdout.
  std::function<void(const std::string&)> log;
};

/// Runs the paper-reproduction suite: one entry per criterion, each checked
/// at its stated tolerance, with one pass/fail line per criterion emitted
/// through the log sink. Returns all results (never throws for failures).
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts);

}  // namespace pflow
