#include "sweepsim/commands.hpp"

#include "sweepsim/csv.hpp"
#include "sweepsim/oracles.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>

namespace sweepsim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Scenario resolve(const std::string& ref, const CommandOverrides& ov) {
  Scenario s = load_scenario(ref);
  if (ov.n_steps) s.solver.n_steps = *ov.n_steps;
  if (ov.tol) s.solver.tol = *ov.tol;
  if (ov.seed) s.solver.seed = *ov.seed;
  return s;
}

bool wants(const Scenario& s, const std::string& artifact) {
  if (!s.outputs) return true;  // default: everything
  for (const auto& o : *s.outputs)
    if (o == artifact) return true;
  return false;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << text;
}

std::string trajectory_csv(const Trajectory& traj) {
  const int n = static_cast<int>(traj.states.front().size());
  std::vector<std::string> header = {"t"};
  for (int d = 1; d <= n; ++d) header.push_back("x" + std::to_string(d));
  CsvWriter csv(header);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    std::vector<double> row = {traj.times[k]};
    for (int d = 0; d < n; ++d) row.push_back(traj.states[k][d]);
    csv.row(row);
  }
  return csv.str();
}

std::string residuals_csv(const ResidualReport& report) {
  CsvWriter csv({"step", "t", "feasibility", "inclusion", "bound_margin"});
  for (const auto& row : report.per_step)
    csv.row({static_cast<double>(row.step), row.t, row.feasibility, row.inclusion,
             row.bound_margin});
  return csv.str();
}

std::string endpoints_csv(const ReachableSet& set, int dim) {
  std::vector<std::string> header = {"sample"};
  for (int d = 1; d <= dim; ++d) header.push_back("x0_" + std::to_string(d));
  for (int d = 1; d <= dim; ++d) header.push_back("xT_" + std::to_string(d));
  CsvWriter csv(header);
  for (std::size_t i = 0; i < set.samples.size(); ++i) {
    const auto& s = set.samples[i];
    if (!s.ok) continue;
    std::vector<double> row = {static_cast<double>(i)};
    for (int d = 0; d < dim; ++d) row.push_back(s.x0[d]);
    for (int d = 0; d < dim; ++d) row.push_back(s.endpoint[d]);
    csv.row(row);
  }
  return csv.str();
}

void print_report(const AssumptionReport& report, const ConstraintFamily& family,
                  std::ostream& out) {
  out << "A1 (time Lipschitz):    L1 = " << format_double(report.L1_est);
  out << "  per-constraint [";
  for (std::size_t i = 0; i < report.L1_per_constraint.size(); ++i)
    out << (i ? ", " : "") << format_double(report.L1_per_constraint[i]);
  out << "]\n";
  out << "A2 (space Lipschitz):   recorded from the registered pieces\n";
  out << "A3 (hypomonotonicity):  gamma = " << format_double(report.gamma_candidate)
      << (report.a3_pass ? "  no violation found" : "  REFUTED") << " at budget "
      << report.budget << "\n";
  out << "A4 (descent margin):    mu = " << format_double(report.mu_est)
      << (report.a4_pass ? "  no violation found" : "  REFUTED") << " at budget "
      << report.budget << "\n";
  if (report.all_passed()) {
    const double r = std::min(family.rho(), report.mu_est / report.gamma_candidate);
    out << "prox radius:            r = min(rho, mu/gamma) = " << format_double(r)
        << "\n";
    out << "Hausdorff modulus:      theta = L1/mu = "
        << format_double(report.L1_est / report.mu_est) << "\n";
    if (!report.vbar_witnesses.empty()) {
      const auto& w = report.vbar_witnesses.front();
      out << "worst descent witness:  t = " << format_double(w.t) << ", x = (";
      for (int d = 0; d < w.x.size(); ++d) out << (d ? ", " : "") << format_double(w.x[d]);
      out << "), v = (";
      for (int d = 0; d < w.v.size(); ++d) out << (d ? ", " : "") << format_double(w.v[d]);
      out << "), margin = " << format_double(w.margin) << "\n";
    }
  }
  for (const auto& v : report.violations) {
    out << "violation [" << v.assumption << "] t = " << format_double(v.t) << " x1 = (";
    for (int d = 0; d < v.x1.size(); ++d) out << (d ? ", " : "") << format_double(v.x1[d]);
    out << ")";
    if (v.x2.size()) {
      out << " x2 = (";
      for (int d = 0; d < v.x2.size(); ++d)
        out << (d ? ", " : "") << format_double(v.x2[d]);
      out << ") lhs = " << format_double(v.lhs) << " rhs = " << format_double(v.rhs);
    }
    out << "  " << v.detail << "\n";
  }
}

int solve_single(const Scenario& scenario, const fs::path& out_dir, std::ostream& out,
                 std::ostream& err) {
  SweepingProblem problem = scenario.build_problem();

  AssumptionReport report =
      certify_family(problem.family, problem.family.gamma_candidate(), 2048,
                     scenario.solver.seed);
  if (!report.all_passed()) {
    err << "scenario '" << scenario.name
        << "': assumption check refuted; run certify for details\n";
    return kExitValidation;
  }
  ProxCertificate cert = make_certificate(problem.family, report);
  problem.family.set_prox_radius_hint(cert.r);

  SolverOptions opts = scenario.build_solver_options();
  Trajectory traj = catching_up(problem, opts);

  VerifyOptions vopts;
  vopts.seed = scenario.solver.seed;
  ResidualReport residuals = residual_report(traj, problem, cert, vopts);

  if (wants(scenario, "trajectory"))
    write_text(out_dir / "trajectory.csv", trajectory_csv(traj));
  if (wants(scenario, "residuals"))
    write_text(out_dir / "residuals.csv", residuals_csv(residuals));

  json meta;
  meta["scenario"] = scenario.name;
  meta["n_steps"] = traj.steps();
  meta["h"] = problem.T / scenario.solver.n_steps;
  meta["seed"] = scenario.solver.seed;
  meta["x0_healed"] = traj.x0_healed;
  meta["first_active_step"] = traj.first_active_step();
  json endpoint = json::array();
  for (int d = 0; d < traj.endpoint().size(); ++d) endpoint.push_back(traj.endpoint()[d]);
  meta["endpoint"] = std::move(endpoint);
  meta["feasibility_max"] = residuals.feasibility_max;
  meta["inclusion_max"] = residuals.inclusion_max;
  meta["bound_margin"] = residuals.bound_margin;
  meta["flagged_steps"] = residuals.flagged_steps;
  if (wants(scenario, "metadata"))
    write_text(out_dir / "metadata.json", meta.dump(2) + "\n");

  out << "solved '" << scenario.name << "': " << traj.steps() << " steps, endpoint (";
  for (int d = 0; d < traj.endpoint().size(); ++d)
    out << (d ? ", " : "") << format_double(traj.endpoint()[d]);
  out << "), feasibility_max = " << format_double(residuals.feasibility_max)
      << ", inclusion_max = " << format_double(residuals.inclusion_max) << "\n";
  return kExitOk;
}

int solve_sampled(const Scenario& scenario, const fs::path& out_dir,
                  const CommandOverrides& ov, std::ostream& out, std::ostream& err) {
  ConstraintFamily family = scenario.family.build();
  Perturbation pert = scenario.perturbation.build(family.dim());

  AssumptionReport report = certify_family(family, family.gamma_candidate(), 2048,
                                           scenario.solver.seed);
  if (!report.all_passed()) {
    err << "scenario '" << scenario.name
        << "': assumption check refuted; run certify for details\n";
    return kExitValidation;
  }
  family.set_prox_radius_hint(
      std::min(family.rho(), report.mu_est / report.gamma_candidate));

  const int count = ov.samples ? *ov.samples : scenario.sampler().count;
  ReachableSet set =
      reachability_sample(family, pert, scenario.family.horizon, count,
                          scenario.solver.n_steps, scenario.solver.seed);
  if (wants(scenario, "endpoints"))
    write_text(out_dir / "endpoints.csv", endpoints_csv(set, family.dim()));

  json meta;
  meta["scenario"] = scenario.name;
  meta["samples"] = count;
  meta["n_steps"] = scenario.solver.n_steps;
  meta["seed"] = scenario.solver.seed;
  meta["failures"] = set.failures;
  meta["endpoint_diameter"] = set.diameter;
  meta["lipschitz_est"] = set.lipschitz_est;
  if (wants(scenario, "metadata"))
    write_text(out_dir / "metadata.json", meta.dump(2) + "\n");

  out << "reachability '" << scenario.name << "': " << count << " samples, "
      << set.failures << " failures, endpoint diameter = " << format_double(set.diameter)
      << "\n";
  return kExitOk;
}

}  // namespace

int cmd_solve(const std::string& scenario_ref, const std::string& out_dir,
              const CommandOverrides& ov, std::ostream& out, std::ostream& err) {
  try {
    Scenario scenario = resolve(scenario_ref, ov);
    fs::path dir(out_dir.empty() ? "." : out_dir);
    fs::create_directories(dir);
    if (scenario.has_sampler()) return solve_sampled(scenario, dir, ov, out, err);
    return solve_single(scenario, dir, out, err);
  } catch (const ScenarioError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const InfeasibleInitial& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ConfigError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const OutOfHorizon& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolverFailure;
  }
}

int cmd_certify(const std::string& scenario_ref, const CommandOverrides& ov,
                std::ostream& out, std::ostream& err) {
  try {
    Scenario scenario = resolve(scenario_ref, ov);
    ConstraintFamily family = scenario.family.build();
    const int budget = ov.samples ? *ov.samples : 10000;
    AssumptionReport report = certify_family(family, family.gamma_candidate(), budget,
                                             scenario.solver.seed);
    print_report(report, family, out);
    return report.all_passed() ? kExitOk : kExitRefuted;
  } catch (const ScenarioError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ConfigError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "certification failure: " << e.what() << "\n";
    return kExitSolverFailure;
  }
}

int cmd_converge(const std::string& scenario_ref, const std::vector<int>& n_list,
                 const std::string& out_dir, const CommandOverrides& ov,
                 std::ostream& out, std::ostream& err) {
  try {
    Scenario scenario = resolve(scenario_ref, ov);
    if (n_list.size() < 3) {
      err << "validation error: need at least 3 grid sizes to fit an order\n";
      return kExitValidation;
    }
    auto oracle = scenario.oracle_fn();
    if (!oracle) {
      err << "validation error: scenario '" << scenario.name
          << "' has no registered oracle\n";
      return kExitValidation;
    }
    SweepingProblem problem = scenario.build_problem();
    SolverOptions base = scenario.build_solver_options();
    ConvergenceTable table = convergence_study(problem, *oracle, n_list, base);

    CsvWriter csv({"n_steps", "h", "sup_error", "endpoint_error"});
    for (const auto& row : table.rows)
      csv.row({static_cast<double>(row.n_steps), row.h, row.sup_error,
               row.endpoint_error});
    fs::path dir(out_dir.empty() ? "." : out_dir);
    fs::create_directories(dir);
    csv.write_file((dir / "convergence.csv").string());

    json meta;
    meta["scenario"] = scenario.name;
    meta["fitted_order"] = table.fitted_order;
    meta["at_floor"] = table.at_floor;
    meta["floor_level"] = table.floor_level;
    write_text(dir / "convergence.json", meta.dump(2) + "\n");

    if (table.at_floor) {
      out << "errors at the projection-tolerance floor (" +
                 format_double(table.floor_level) +
                 "); order check skipped (scheme is exact on this problem)\n";
      return kExitOk;
    }
    out << "fitted order = " << format_double(table.fitted_order) << "\n";
    if (table.fitted_order < 0.9) {
      err << "fitted order " << format_double(table.fitted_order) << " below 0.9\n";
      return kExitOrderFailure;
    }
    return kExitOk;
  } catch (const ScenarioError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ConfigError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolverFailure;
  }
}

int cmd_reach(const std::string& scenario_ref, const std::string& out_dir,
              const CommandOverrides& ov, std::ostream& out, std::ostream& err) {
  try {
    Scenario scenario = resolve(scenario_ref, ov);
    if (!scenario.has_sampler()) {
      if (!ov.samples) {
        err << "validation error: scenario '" << scenario.name
            << "' has a fixed x0; pass --samples to sample initial values\n";
        return kExitValidation;
      }
      SamplerDecl sampler;
      sampler.count = *ov.samples;
      scenario.x0 = sampler;
    }
    fs::path dir(out_dir.empty() ? "." : out_dir);
    fs::create_directories(dir);
    return solve_sampled(scenario, dir, ov, out, err);
  } catch (const ScenarioError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ConfigError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolverFailure;
  }
}

}  // namespace sweepsim
