#pragma once

#include "sweepsim/assumptions.hpp"
#include "sweepsim/solver.hpp"

#include <functional>
#include <string>
#include <vector>

namespace sweepsim {

struct StepResiduals {
  int step = 0;      // 1-based; residuals of the transition into x_step
  double t = 0.0;    // t_step
  double feasibility = 0.0;  // positive part of max_i f_i(t_k, x_k)
  double inclusion = 0.0;    // clipped normal-cone residual of -v_k - g
  double bound_margin = 0.0; // |v_k + g| - envelope(t_{k-1})
};

/// Per-step certificates that a discrete trajectory solves the inclusion:
/// feasibility of every state, normal-cone membership of the discrete
/// velocity defect, and the velocity growth bound.
struct ResidualReport {
  double feasibility_max = 0.0;
  double inclusion_max = 0.0;
  double bound_margin = -kInfinity;
  std::vector<StepResiduals> per_step;
  /// Steps whose residual exceeds the flag threshold.
  std::vector<int> flagged_steps;

  bool clean(double threshold) const {
    return feasibility_max <= threshold && inclusion_max <= threshold;
  }
};

struct VerifyOptions {
  int residual_samples = 256;
  std::uint64_t seed = 1;
  double member_tol = 1e-9;
  /// Velocity defects below w_tol are treated as zero (the inclusion holds
  /// trivially with the zero normal). Defaults to 10 h (1 + max |g|),
  /// which absorbs pure discretization noise at interior steps.
  double w_tol = -1.0;
  double flag_threshold = 1e-2;
  double bound_slack = -1.0;  // defaults to 10 h
};

ResidualReport residual_report(const Trajectory& traj, const SweepingProblem& problem,
                               const ProxCertificate& cert,
                               const VerifyOptions& opts = {});

/// Normal-cone residual of one step k (transition x_{k-1} -> x_k), as used
/// inside residual_report.
double inclusion_residual_step(const Trajectory& traj, int k,
                               const SweepingProblem& problem,
                               const ProxCertificate& cert,
                               const VerifyOptions& opts = {});

struct ConvergenceRow {
  int n_steps = 0;
  double h = 0.0;
  double sup_error = 0.0;
  double endpoint_error = 0.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double fitted_order = 0.0;
  /// All errors sit at the projection-tolerance floor; the order fit is
  /// meaningless and skipped.
  bool at_floor = false;
  double floor_level = 0.0;
};

using OracleFn = std::function<Point(double)>;

/// Solves at each N, measures sup and endpoint error against the oracle,
/// and fits log error ~ order * log h by least squares.
ConvergenceTable convergence_study(const SweepingProblem& problem, const OracleFn& oracle,
                                   const std::vector<int>& n_list,
                                   const SolverOptions& base_opts = {});

struct ReachSample {
  Point x0;
  Point endpoint;
  bool ok = true;
  std::string error;
};

struct ReachableSet {
  std::vector<ReachSample> samples;
  double diameter = 0.0;        // of the endpoint cloud
  double lipschitz_est = 0.0;   // sampled |endpoint spread| / |x0 spread|
  int failures = 0;

  std::vector<Point> endpoints() const;
};

/// Endpoint cloud over quasi-random feasible initial values. Samples run
/// independently (parallel up to `threads`); results are ordered by sample
/// index regardless of scheduling.
ReachableSet reachability_sample(const ConstraintFamily& family,
                                 const Perturbation& perturbation, double T,
                                 int n_samples, int n_steps,
                                 std::uint64_t seed = 1, int threads = 0);

int env_thread_cap();

}  // namespace sweepsim
