#pragma once

#include "sweepsim/constraints.hpp"
#include "sweepsim/geometry.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace sweepsim {

/// Single-valued force term g(t, x) with its integrable growth envelope
/// beta and local Lipschitz envelope k_eta:
///   |g(t,x)|        <= beta(t) (1 + |x|),
///   |g(t,x)-g(t,y)| <= k_eta(t) |x - y|   on bounded balls.
class Perturbation {
 public:
  enum class Kind { Zero, GravityLinear, AffineTable };

  static Perturbation zero(int dim);
  /// g(t, x) = (0, ..., 0, g0 t). The force enters the inclusion through
  /// -dx/dt in N + g, so this is free fall of the last coordinate with
  /// acceleration g0. beta(t) = g0 t, k_eta == 0.
  static Perturbation gravity(int dim, double g0);
  /// Piecewise-linear-in-time table force, independent of x.
  static Perturbation affine_table(std::vector<double> times,
                                   std::vector<Point> values);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  double g0() const { return g0_; }
  const std::vector<double>& table_times() const { return table_times_; }
  const std::vector<Point>& table_values() const { return table_values_; }

  Point operator()(double t, const Point& x) const;
  double beta(double t) const;
  double k_eta(double t) const;
  /// Integral of beta over [0, T], exact for the registered kinds.
  double beta_integral(double T) const;
  /// Integral of 2 beta(s) (1 + c) + vdot over [0, T], exact likewise.
  double weighted_integral(double T, double c, double vdot) const;

 private:
  double quad_segment(double a, double b) const;

  Kind kind_ = Kind::Zero;
  int dim_ = 0;
  double g0_ = 0.0;
  std::vector<double> table_times_;
  std::vector<Point> table_values_;
};

struct SweepingProblem {
  ConstraintFamily family;
  Perturbation perturbation;
  Point x0;
  double T;  // <= family horizon
};

/// Discrete solution path of the catching-up iteration
///   x_{k+1} = proj_{C(t_{k+1})}(x_k - h g(t_k, x_k)).
struct Trajectory {
  std::vector<double> times;   // t_0 = 0 < ... < t_N = T
  std::vector<Point> states;   // x_k in C(t_k) within feasibility tol
  std::vector<Point> velocities;  // (x_k - x_{k-1}) / dt_k, size N
  std::vector<bool> projection_moved;  // projection displaced the pulled point
  std::vector<double> projection_shift;  // by how much
  bool x0_healed = false;
  double healing_distance = 0.0;

  int steps() const { return static_cast<int>(times.size()) - 1; }
  double dt(int k) const { return times[k] - times[k - 1]; }  // k in 1..N
  const Point& endpoint() const { return states.back(); }
  /// First grid time whose projection actively moved the state, i.e. where
  /// the constraint became binding; -1 if never.
  int first_active_step() const;
};

struct SolverOptions {
  int n_steps = 1000;
  double projection_tol = 1e-9;
  double feasibility_tol = 0.0;  // defaults to 10 * projection_tol
  std::uint64_t seed = 0;
  bool force_iterative_projection = false;
  /// Optional geometric refinement: around each listed time, extra grid
  /// points at t +- h/2^j, j = 1..refine_levels, are inserted.
  std::vector<double> refine_around;
  int refine_levels = 5;

  double feas_tol() const {
    return feasibility_tol > 0 ? feasibility_tol : 10.0 * projection_tol;
  }
};

/// Catching-up run over a uniform (optionally refined) grid. The initial
/// value is healed by projection when infeasible by more than the
/// feasibility tolerance but within the healing radius; beyond that radius
/// the problem is rejected.
Trajectory catching_up(const SweepingProblem& problem, const SolverOptions& opts);

inline Trajectory catching_up(const SweepingProblem& problem, int n_steps) {
  SolverOptions o;
  o.n_steps = n_steps;
  return catching_up(problem, o);
}

/// A-priori growth data for the unique solution:
///   M = |x0| + exp(2 int beta) * int (2 beta(s)(1+|x0|) + vdot) ds,
///   envelope(t) = (1 + M) beta(t) + vdot.
struct SolutionBound {
  double M_x0 = 0.0;
  double vdot = 0.0;
  std::function<double(double)> envelope;
};

/// Integrals are evaluated both in closed form (for the registered
/// perturbation kinds) and by Gauss-Legendre quadrature; the two must agree
/// to 1e-8 relative error.
SolutionBound solution_bound(const SweepingProblem& problem, double vdot);

/// Quadrature-only variant, for cross-checking the closed forms.
double solution_bound_quadrature(const SweepingProblem& problem, double vdot,
                                 int panels = 256);

struct VelocityBoundReport {
  bool pass = true;
  double worst_margin = -kInfinity;  // max over steps of lhs - envelope
  int worst_step = -1;
  std::vector<double> margins;  // per step, size N
};

/// Discrete velocity-bound check:
///   |(x_{k+1}-x_k)/h + g(t_k, x_k)| <= envelope(t_k) + slack  per step.
VelocityBoundReport velocity_bound_check(const Trajectory& traj,
                                         const SweepingProblem& problem,
                                         const SolutionBound& bound,
                                         double slack);

/// Throwing form of the same check.
void require_velocity_bound(const Trajectory& traj, const SweepingProblem& problem,
                            const SolutionBound& bound, double slack);

/// Sampled validation of the perturbation envelopes (growth and local
/// Lipschitz) over feasible points of the family. Returns worst slack
/// violation (<= 0 when the envelopes hold on all samples).
double perturbation_envelope_gap(const SweepingProblem& problem, int samples,
                                 std::uint64_t seed = 1);

}  // namespace sweepsim
