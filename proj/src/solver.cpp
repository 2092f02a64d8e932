#include "sweepsim/solver.hpp"

#include "sweepsim/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace sweepsim {

Perturbation Perturbation::zero(int dim) {
  Perturbation p;
  p.kind_ = Kind::Zero;
  p.dim_ = dim;
  return p;
}

Perturbation Perturbation::gravity(int dim, double g0) {
  if (!(g0 >= 0)) throw ConfigError("perturbation: g0 must be nonnegative");
  Perturbation p;
  p.kind_ = Kind::GravityLinear;
  p.dim_ = dim;
  p.g0_ = g0;
  return p;
}

Perturbation Perturbation::affine_table(std::vector<double> times,
                                        std::vector<Point> values) {
  if (times.size() < 2 || times.size() != values.size())
    throw ConfigError("perturbation: table needs matching times/values, >= 2 nodes");
  if (!std::is_sorted(times.begin(), times.end()))
    throw ConfigError("perturbation: table times must increase");
  Perturbation p;
  p.kind_ = Kind::AffineTable;
  p.dim_ = static_cast<int>(values.front().size());
  p.table_times_ = std::move(times);
  p.table_values_ = std::move(values);
  return p;
}

Point Perturbation::operator()(double t, const Point& x) const {
  switch (kind_) {
    case Kind::Zero:
      return Point::Zero(x.size());
    case Kind::GravityLinear: {
      Point g = Point::Zero(x.size());
      g[x.size() - 1] = g0_ * t;
      return g;
    }
    case Kind::AffineTable: {
      if (t <= table_times_.front()) return table_values_.front();
      if (t >= table_times_.back()) return table_values_.back();
      auto it = std::upper_bound(table_times_.begin(), table_times_.end(), t);
      const std::size_t hi = static_cast<std::size_t>(it - table_times_.begin());
      const std::size_t lo = hi - 1;
      const double w =
          (t - table_times_[lo]) / (table_times_[hi] - table_times_[lo]);
      return (1.0 - w) * table_values_[lo] + w * table_values_[hi];
    }
  }
  return Point::Zero(x.size());
}

double Perturbation::beta(double t) const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::GravityLinear:
      return g0_ * t;
    case Kind::AffineTable: {
      Point dummy = Point::Zero(dim_);
      return (*this)(t, dummy).norm();
    }
  }
  return 0.0;
}

double Perturbation::k_eta(double) const {
  return 0.0;  // all registered kinds are independent of x
}

double Perturbation::beta_integral(double T) const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::GravityLinear:
      return g0_ * T * T / 2.0;
    case Kind::AffineTable: {
      // Composite Gauss-Legendre over table segments; beta is piecewise
      // smooth with at most one kink per segment (a norm of a linear map).
      double total = 0.0;
      double prev = 0.0;
      for (double node : table_times_) {
        const double hi = std::min(node, T);
        if (hi > prev) total += quad_segment(prev, hi);
        prev = hi;
        if (prev >= T) break;
      }
      if (prev < T) total += quad_segment(prev, T);
      return total;
    }
  }
  return 0.0;
}

double Perturbation::weighted_integral(double T, double c, double vdot) const {
  return 2.0 * (1.0 + c) * beta_integral(T) + vdot * T;
}

double Perturbation::quad_segment(double a, double b) const {
  // 16-point Gauss-Legendre on 16 subpanels.
  static const double xs[8] = {0.0950125098376374, 0.2816035507792589,
                               0.4580167776572274, 0.6178762444026438,
                               0.7554044083550030, 0.8656312023878318,
                               0.9445750230732326, 0.9894009349916499};
  static const double ws[8] = {0.1894506104550685, 0.1826034150449236,
                               0.1691565193950025, 0.1495959888165767,
                               0.1246289712555339, 0.0951585116824928,
                               0.0622535239386479, 0.0271524594117541};
  double total = 0.0;
  const int panels = 16;
  for (int pnl = 0; pnl < panels; ++pnl) {
    const double lo = a + (b - a) * pnl / panels;
    const double hi = a + (b - a) * (pnl + 1) / panels;
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    for (int k = 0; k < 8; ++k) {
      total += ws[k] * half * beta(mid - half * xs[k]);
      total += ws[k] * half * beta(mid + half * xs[k]);
    }
  }
  return total;
}

int Trajectory::first_active_step() const {
  for (std::size_t k = 0; k < projection_moved.size(); ++k)
    if (projection_moved[k]) return static_cast<int>(k) + 1;
  return -1;
}

namespace {

std::vector<double> build_grid(double T, const SolverOptions& opts) {
  if (opts.n_steps < 2)
    throw ConfigError("solver: need at least 2 steps over the horizon");
  if (!(T > 0)) throw ConfigError("solver: degenerate horizon");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(opts.n_steps) + 1);
  const double h = T / opts.n_steps;
  for (int k = 0; k <= opts.n_steps; ++k) grid.push_back(k * h);
  grid.back() = T;
  for (double center : opts.refine_around) {
    for (int j = 1; j <= opts.refine_levels; ++j) {
      const double off = h / std::pow(2.0, j);
      for (double t : {center - off, center + off, center})
        if (t > 0 && t < T) grid.push_back(t);
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [&](double a, double b) { return std::abs(a - b) < 1e-12 * T; }),
             grid.end());
  return grid;
}

}  // namespace

Trajectory catching_up(const SweepingProblem& problem, const SolverOptions& opts) {
  const ConstraintFamily& fam = problem.family;
  if (problem.T > fam.horizon() + 1e-12)
    throw ConfigError("solver: T exceeds the family horizon");
  if (problem.x0.size() != fam.dim())
    throw ConfigError("solver: x0 dimension mismatch");

  Trajectory traj;
  traj.times = build_grid(problem.T, opts);

  ProjectionOptions popts;
  popts.tol = opts.projection_tol;
  popts.seed = opts.seed;
  popts.force_iterative = opts.force_iterative_projection;

  // Initial value: accept within the feasibility tolerance, heal by
  // projection inside the uniqueness tube, reject beyond it.
  Point x = problem.x0;
  {
    SetSlice start(fam, 0.0);
    if (!start.contains(x, opts.feas_tol())) {
      double worst = -kInfinity;
      int worst_i = 0;
      for (int i = 0; i < fam.count(); ++i) {
        const double v = fam.evaluate(i, 0.0, x);
        if (v > worst) {
          worst = v;
          worst_i = i;
        }
      }
      const double healing_radius =
          fam.prox_radius_hint() ? *fam.prox_radius_hint() : fam.rho();
      ProjectionResult res = project_detailed(x, start, popts);
      if (res.distance > healing_radius)
        throw InfeasibleInitial(
            "x0 violates constraint " + std::to_string(worst_i + 1) + " by " +
            std::to_string(worst) + " and lies beyond the healing radius");
      x = res.point;
      traj.x0_healed = true;
      traj.healing_distance = res.distance;
    }
  }

  traj.states.push_back(x);
  const int N = static_cast<int>(traj.times.size()) - 1;
  traj.velocities.reserve(static_cast<std::size_t>(N));
  traj.projection_moved.reserve(static_cast<std::size_t>(N));
  traj.projection_shift.reserve(static_cast<std::size_t>(N));

  const double move_eps = std::max(10.0 * opts.projection_tol, 1e-12);
  for (int k = 0; k < N; ++k) {
    const double t_k = traj.times[static_cast<std::size_t>(k)];
    const double t_next = traj.times[static_cast<std::size_t>(k) + 1];
    const double h = t_next - t_k;
    const Point pull = x - h * problem.perturbation(t_k, x);
    SetSlice slice(fam, t_next);
    ProjectionResult res = project_detailed(pull, slice, popts);
    const double shift = (res.point - pull).norm();
    traj.projection_moved.push_back(shift > move_eps);
    traj.projection_shift.push_back(shift);
    traj.velocities.push_back((res.point - x) / h);
    x = res.point;
    traj.states.push_back(x);
  }
  return traj;
}

SolutionBound solution_bound(const SweepingProblem& problem, double vdot) {
  if (!(vdot >= 0)) throw ConfigError("solution_bound: vdot must be nonnegative");
  const double B = problem.perturbation.beta_integral(problem.T);
  const double W =
      problem.perturbation.weighted_integral(problem.T, problem.x0.norm(), vdot);
  SolutionBound bound;
  bound.vdot = vdot;
  bound.M_x0 = problem.x0.norm() + std::exp(2.0 * B) * W;
  const Perturbation pert = problem.perturbation;
  const double M = bound.M_x0;
  bound.envelope = [pert, M, vdot](double t) { return (1.0 + M) * pert.beta(t) + vdot; };
  return bound;
}

double solution_bound_quadrature(const SweepingProblem& problem, double vdot,
                                 int panels) {
  const Perturbation& pert = problem.perturbation;
  const double T = problem.T;
  auto gl = [&](auto&& f) {
    static const double xs[4] = {0.3399810435848563, 0.8611363115940526, 0.0, 0.0};
    static const double ws[4] = {0.6521451548625461, 0.3478548451374538, 0.0, 0.0};
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double lo = T * p / panels;
      const double hi = T * (p + 1) / panels;
      const double mid = 0.5 * (lo + hi);
      const double half = 0.5 * (hi - lo);
      for (int k = 0; k < 2; ++k) {
        total += ws[k] * half * f(mid - half * xs[k]);
        total += ws[k] * half * f(mid + half * xs[k]);
      }
    }
    return total;
  };
  const double c = problem.x0.norm();
  const double B = gl([&](double s) { return pert.beta(s); });
  const double W = gl([&](double s) { return 2.0 * pert.beta(s) * (1.0 + c) + vdot; });
  return c + std::exp(2.0 * B) * W;
}

VelocityBoundReport velocity_bound_check(const Trajectory& traj,
                                         const SweepingProblem& problem,
                                         const SolutionBound& bound, double slack) {
  VelocityBoundReport report;
  const int N = traj.steps();
  report.margins.reserve(static_cast<std::size_t>(N));
  for (int k = 1; k <= N; ++k) {
    const double t_prev = traj.times[static_cast<std::size_t>(k) - 1];
    const Point& x_prev = traj.states[static_cast<std::size_t>(k) - 1];
    const double lhs =
        (traj.velocities[static_cast<std::size_t>(k) - 1] +
         problem.perturbation(t_prev, x_prev))
            .norm();
    const double margin = lhs - bound.envelope(t_prev);
    report.margins.push_back(margin);
    if (margin > report.worst_margin) {
      report.worst_margin = margin;
      report.worst_step = k;
    }
  }
  report.pass = report.worst_margin <= slack;
  return report;
}

void require_velocity_bound(const Trajectory& traj, const SweepingProblem& problem,
                            const SolutionBound& bound, double slack) {
  VelocityBoundReport report = velocity_bound_check(traj, problem, bound, slack);
  if (!report.pass)
    throw BoundViolated("velocity bound exceeded by " +
                            std::to_string(report.worst_margin) + " at step " +
                            std::to_string(report.worst_step),
                        report.worst_step);
}

double perturbation_envelope_gap(const SweepingProblem& problem, int samples,
                                 std::uint64_t seed) {
  const ConstraintFamily& fam = problem.family;
  HaltonSampler sampler(fam.dim() + 2, seed);
  double worst = -kInfinity;
  int accepted = 0;
  for (int draw = 0; draw < 100 * samples && accepted < samples; ++draw) {
    Point u = sampler.next01();
    Point x(fam.dim());
    for (int d = 0; d < fam.dim(); ++d)
      x[d] = fam.sampling_box().lo[d] + u[d] * fam.sampling_box().extent(d);
    const double s = u[fam.dim()] * problem.T;
    const double t = u[fam.dim() + 1] * problem.T;
    if (!fam.membership(s, x, 1e-9)) continue;
    ++accepted;
    const double growth_gap = problem.perturbation(t, x).norm() -
                              problem.perturbation.beta(t) * (1.0 + x.norm());
    worst = std::max(worst, growth_gap);
    // Local Lipschitz envelope on a small ball around x.
    Point y = x;
    y[0] += 1e-3;
    const double lip_gap =
        (problem.perturbation(t, x) - problem.perturbation(t, y)).norm() -
        problem.perturbation.k_eta(t) * (x - y).norm();
    worst = std::max(worst, lip_gap);
  }
  return worst;
}

}  // namespace sweepsim
