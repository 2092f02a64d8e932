#include "sweepsim/verify.hpp"

#include "sweepsim/sampling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace sweepsim {

namespace {

double default_w_tol(const Trajectory& traj, const SweepingProblem& problem) {
  double h_max = 0.0;
  double g_max = 0.0;
  for (int k = 1; k <= traj.steps(); ++k) {
    h_max = std::max(h_max, traj.dt(k));
    g_max = std::max(g_max,
                     problem.perturbation(traj.times[static_cast<std::size_t>(k) - 1],
                                          traj.states[static_cast<std::size_t>(k) - 1])
                         .norm());
  }
  return 10.0 * h_max * (1.0 + g_max);
}

}  // namespace

double inclusion_residual_step(const Trajectory& traj, int k,
                               const SweepingProblem& problem,
                               const ProxCertificate& cert, const VerifyOptions& opts) {
  const double t_prev = traj.times[static_cast<std::size_t>(k) - 1];
  const Point& x_prev = traj.states[static_cast<std::size_t>(k) - 1];
  const Point& x_k = traj.states[static_cast<std::size_t>(k)];
  const double t_k = traj.times[static_cast<std::size_t>(k)];
  const Point w = -traj.velocities[static_cast<std::size_t>(k) - 1] -
                  problem.perturbation(t_prev, x_prev);
  const double w_tol = opts.w_tol > 0 ? opts.w_tol : default_w_tol(traj, problem);
  if (w.norm() <= w_tol) return 0.0;
  SetSlice slice(problem.family, t_k);
  const double res = proximal_normal_residual(
      x_k, w / w.norm(), slice, cert.r, opts.residual_samples,
      opts.seed + static_cast<std::uint64_t>(k), opts.member_tol);
  return std::max(0.0, res);
}

ResidualReport residual_report(const Trajectory& traj, const SweepingProblem& problem,
                               const ProxCertificate& cert, const VerifyOptions& opts) {
  ResidualReport report;
  const int N = traj.steps();
  report.per_step.reserve(static_cast<std::size_t>(N));

  SolutionBound bound = solution_bound(problem, cert.theta);
  double h_max = 0.0;
  for (int k = 1; k <= N; ++k) h_max = std::max(h_max, traj.dt(k));
  const double slack = opts.bound_slack > 0 ? opts.bound_slack : 10.0 * h_max;
  VelocityBoundReport vb = velocity_bound_check(traj, problem, bound, slack);

  VerifyOptions step_opts = opts;
  if (step_opts.w_tol <= 0) step_opts.w_tol = default_w_tol(traj, problem);

  for (int k = 1; k <= N; ++k) {
    StepResiduals row;
    row.step = k;
    row.t = traj.times[static_cast<std::size_t>(k)];
    row.feasibility = std::max(
        0.0, problem.family.max_value(row.t, traj.states[static_cast<std::size_t>(k)]));
    row.inclusion = inclusion_residual_step(traj, k, problem, cert, step_opts);
    row.bound_margin = vb.margins[static_cast<std::size_t>(k) - 1];
    report.feasibility_max = std::max(report.feasibility_max, row.feasibility);
    report.inclusion_max = std::max(report.inclusion_max, row.inclusion);
    report.bound_margin = std::max(report.bound_margin, row.bound_margin);
    if (row.feasibility > opts.flag_threshold || row.inclusion > opts.flag_threshold)
      report.flagged_steps.push_back(k);
    report.per_step.push_back(std::move(row));
  }
  return report;
}

ConvergenceTable convergence_study(const SweepingProblem& problem, const OracleFn& oracle,
                                   const std::vector<int>& n_list,
                                   const SolverOptions& base_opts) {
  if (!oracle) throw ConfigError("convergence_study: oracle required");
  ConvergenceTable table;
  std::vector<int> ns = n_list;
  std::sort(ns.begin(), ns.end());
  for (int n : ns) {
    SolverOptions opts = base_opts;
    opts.n_steps = n;
    Trajectory traj = catching_up(problem, opts);
    ConvergenceRow row;
    row.n_steps = n;
    row.h = problem.T / n;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      const double err = (traj.states[k] - oracle(traj.times[k])).norm();
      row.sup_error = std::max(row.sup_error, err);
    }
    row.endpoint_error = (traj.endpoint() - oracle(problem.T)).norm();
    table.rows.push_back(row);
  }

  table.floor_level = std::max(100.0 * base_opts.projection_tol, 1e-10);
  double max_err = 0.0;
  for (const auto& row : table.rows) max_err = std::max(max_err, row.sup_error);
  if (max_err <= table.floor_level) {
    table.at_floor = true;
    table.fitted_order = 0.0;
    return table;
  }

  // Least-squares slope of log(error) against log(h).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(table.rows.size());
  for (const auto& row : table.rows) {
    const double lx = std::log(row.h);
    const double ly = std::log(std::max(row.sup_error, 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  table.fitted_order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return table;
}

std::vector<Point> ReachableSet::endpoints() const {
  std::vector<Point> out;
  out.reserve(samples.size());
  for (const auto& s : samples)
    if (s.ok) out.push_back(s.endpoint);
  return out;
}

int env_thread_cap() {
  if (const char* env = std::getenv("SWEEPSIM_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min(hw == 0 ? 1u : hw, 8u));
}

ReachableSet reachability_sample(const ConstraintFamily& family,
                                 const Perturbation& perturbation, double T,
                                 int n_samples, int n_steps, std::uint64_t seed,
                                 int threads) {
  if (n_samples < 1) throw ConfigError("reachability: need n_samples >= 1");
  // Quasi-random feasible initial values by rejection on the family box.
  SetSlice start(family, 0.0);
  std::vector<Point> initials = sample_slice(start, n_samples, seed, 1e-12);
  if (static_cast<int>(initials.size()) < n_samples)
    throw EmptySample("reachability: could not draw enough feasible initial values");

  ReachableSet set;
  set.samples.resize(static_cast<std::size_t>(n_samples));
  const int n_threads = std::min(threads > 0 ? threads : env_thread_cap(), n_samples);

  std::atomic<int> cursor{0};
  auto worker = [&]() {
    for (;;) {
      const int idx = cursor.fetch_add(1);
      if (idx >= n_samples) return;
      ReachSample& sample = set.samples[static_cast<std::size_t>(idx)];
      sample.x0 = initials[static_cast<std::size_t>(idx)];
      try {
        SweepingProblem problem{family, perturbation, sample.x0, T};
        SolverOptions opts;
        opts.n_steps = n_steps;
        opts.seed = seed;
        sample.endpoint = catching_up(problem, opts).endpoint();
      } catch (const Error& e) {
        sample.ok = false;
        sample.error = e.what();
      }
    }
  };
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<const ReachSample*> ok;
  for (const auto& s : set.samples) {
    if (s.ok)
      ok.push_back(&s);
    else
      ++set.failures;
  }
  for (std::size_t i = 0; i < ok.size(); ++i) {
    for (std::size_t j = i + 1; j < ok.size(); ++j) {
      const double dend = (ok[i]->endpoint - ok[j]->endpoint).norm();
      set.diameter = std::max(set.diameter, dend);
      const double dx0 = (ok[i]->x0 - ok[j]->x0).norm();
      if (dx0 > 1e-9) set.lipschitz_est = std::max(set.lipschitz_est, dend / dx0);
    }
  }
  return set;
}

}  // namespace sweepsim
