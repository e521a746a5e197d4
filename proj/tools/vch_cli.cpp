#include <iostream>

#include <CLI11.hpp>

#include "vch/cli.hpp"
#include "vch/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Virtual convex hull localization of mobile agents"};
  app.set_version_flag("--version", std::string(VCH_VERSION));
  app.require_subcommand(1);

  vch::cli::RunRequest run;
  std::string mods;
  auto* r = app.add_subcommand("run", "simulate a preset or config file and write traces");
  r->add_option("--preset", run.preset, "named experiment")->description(
      "one of: fig7_n3 fig8_n10 fig8_n100 fig9_noanchor fig11_noise fig12_mc");
  r->add_option("--config", run.config, "key = value config file, applied over the preset");
  r->add_option("--seed", run.seed, "master seed");
  r->add_option("--trials", run.trials, "Monte Carlo trials");
  r->add_option("--out", run.out, "output directory")->capture_default_str();
  r->add_option("--max-steps", run.max_steps, "global steps per trial");
  r->add_option("--noise-range", run.noise_range, "ranging noise fraction");
  r->add_option("--noise-motion", run.noise_motion, "odometry noise fraction");
  r->add_option("--modifications", mods, "noise modifications")->check(CLI::IsMember({"on", "off"}));
  r->add_option("--threads", run.threads, "worker threads for batches (0: all cores)");
  r->add_flag("--verify", run.verify, "verify the written traces");

  std::vector<std::filesystem::path> verify_paths;
  auto* v = app.add_subcommand("verify", "check traces against the error recursion and slice analysis");
  v->add_option("traces", verify_paths, "trace files or run directories")->required();

  vch::cli::PlotRequest plot;
  plot.out = "-";
  auto* p = app.add_subcommand("plotdata", "emit long-format CSV (k, series, value)");
  p->add_option("traces", plot.traces, "trace files or run directories")->required();
  p->add_option("--out", plot.out, "output CSV path, '-' for stdout")->capture_default_str();
  p->add_flag("--trajectories", plot.trajectories, "include true and estimated coordinates");
  p->add_flag("--slices", plot.slices, "include slice lengths");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (!mods.empty()) run.modifications = mods == "on";
  if (*r) return vch::cli::cmd_run(run, std::cout, std::cerr);
  if (*v) return vch::cli::cmd_verify(verify_paths, std::cout, std::cerr);
  return vch::cli::cmd_plotdata(plot, std::cout, std::cerr);
}
