#include "sweepsim/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"sweepsim: moving-set inclusion solver with certified constraints"};
  app.require_subcommand(1);

  std::string scenario;
  std::string out_dir = ".";
  int n_steps = 0;
  double tol = 0.0;
  std::uint64_t seed = 0;
  int samples = 0;
  std::vector<int> n_list;
  bool have_seed = false, have_tol = false, have_n = false, have_samples = false;

  auto add_common = [&](CLI::App* cmd, bool with_out) {
    cmd->add_option("scenario", scenario, "built-in name or scenario JSON path")
        ->required();
    if (with_out) cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "sampler seed")->each([&](const std::string&) {
      have_seed = true;
    });
    cmd->add_option("--tol", tol, "projection tolerance")->each([&](const std::string&) {
      have_tol = true;
    });
    cmd->add_option("--samples", samples, "sample count / budget")
        ->each([&](const std::string&) { have_samples = true; });
  };

  CLI::App* solve = app.add_subcommand("solve", "integrate a scenario");
  add_common(solve, true);
  solve->add_option("--n-steps", n_steps, "grid steps")->each([&](const std::string&) {
    have_n = true;
  });

  CLI::App* certify = app.add_subcommand("certify", "check the constraint assumptions");
  add_common(certify, false);

  CLI::App* converge = app.add_subcommand("converge", "error study against the oracle");
  add_common(converge, true);
  converge->add_option("--n-steps", n_list, "grid sizes (>= 3)")->delimiter(',');

  CLI::App* reach = app.add_subcommand("reach", "endpoint cloud over sampled starts");
  add_common(reach, true);
  reach->add_option("--n-steps", n_steps, "grid steps")->each([&](const std::string&) {
    have_n = true;
  });

  CLI11_PARSE(app, argc, argv);

  sweepsim::CommandOverrides ov;
  if (have_n) ov.n_steps = n_steps;
  if (have_tol) ov.tol = tol;
  if (have_seed) ov.seed = seed;
  if (have_samples) ov.samples = samples;

  if (solve->parsed())
    return sweepsim::cmd_solve(scenario, out_dir, ov, std::cout, std::cerr);
  if (certify->parsed())
    return sweepsim::cmd_certify(scenario, ov, std::cout, std::cerr);
  if (converge->parsed())
    return sweepsim::cmd_converge(scenario, n_list, out_dir, ov, std::cout, std::cerr);
  if (reach->parsed())
    return sweepsim::cmd_reach(scenario, out_dir, ov, std::cout, std::cerr);
  return sweepsim::kExitValidation;
}
