#include <string>

#include "CLI11.hpp"

#include "pflow/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"period functions of continuous and C1 flows"};
  app.require_subcommand(1);

  pflow::cli::GlobalOptions opts;
  std::string config_path;
  std::string out_dir = ".";
  app.add_option("--seed", opts.seed, "PRNG seed recorded in reports");
  app.add_option("--threads", opts.threads, "worker threads (0 = hardware)");
  app.add_option("--tol-scale", opts.tol_scale,
                 "multiplier applied to verification tolerances");

  const char* commands[] = {"classify",    "field",    "generator",
                            "fixedpoints", "geometry", "probe",
                            "verify-paper"};
  const char* descr[] = {
      "classify points as fixed / periodic / non-periodic",
      "build and verify a period function field over a grid",
      "reduce a field to the generator and run Z_p reports",
      "locate and classify fixed points",
      "orbit length/diameter inequalities",
      "conditions (A)-(E) and the period blow-up probe",
      "run the full paper-reproduction suite"};

  std::string chosen;
  for (int i = 0; i < 7; ++i) {
    auto* sub = app.add_subcommand(commands[i], descr[i]);
    if (std::string(commands[i]) != "verify-paper")
      sub->add_option("--config", config_path, "config JSON path")->required();
    else
      sub->add_option("--config", config_path, "config JSON path (unused)");
    sub->add_option("--out", out_dir, "output directory");
    sub->callback([&chosen, name = std::string(commands[i])] { chosen = name; });
  }

  CLI11_PARSE(app, argc, argv);
  return pflow::cli::run(chosen, config_path, out_dir, opts);
}
