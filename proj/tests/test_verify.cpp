#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "families.hpp"
#include "sweepsim/oracles.hpp"
#include "sweepsim/verify.hpp"

#include <cmath>

using namespace sweepsim;

namespace {

SweepingProblem corner_problem(Point x0, double T = 3.0) {
  return SweepingProblem{testfam::cone(T), Perturbation::zero(2), std::move(x0), T};
}

ProxCertificate cone_cert() { return ProxCertificate::make(kInfinity, 1.0, 1e-6, 1.0); }

}  // namespace

TEST_CASE("residual_report: clean on a solver trajectory") {
  auto problem = corner_problem(point2(0.5, 1.0));
  auto traj = catching_up(problem, 600);
  auto report = residual_report(traj, problem, cone_cert());
  CHECK(report.feasibility_max <= 1e-12);
  CHECK(report.inclusion_max <= 1e-9);
  CHECK(report.flagged_steps.empty());
  CHECK(report.per_step.size() == 600);
  CHECK(report.bound_margin <= 1e-9);
}

TEST_CASE("residual_report: clean on the gravity oracle sampled onto the grid") {
  // Detection soundness: the closed-form solution, evaluated at the grid
  // times, must not be flagged.
  const Point x0 = point2(0.5, 1.0);
  auto problem = SweepingProblem{testfam::cone(1.0), Perturbation::gravity(2, 9.8), x0,
                                 1.0};
  const int N = 1000;
  Trajectory traj;
  for (int k = 0; k <= N; ++k) {
    const double t = 1.0 * k / N;
    traj.times.push_back(t);
    traj.states.push_back(oracles::example3(x0, t, 1.0, 9.8));
    if (k > 0) {
      traj.velocities.push_back((traj.states[k] - traj.states[k - 1]) / traj.dt(k));
      traj.projection_moved.push_back(false);
      traj.projection_shift.push_back(0.0);
    }
  }
  auto report = residual_report(traj, problem, cone_cert());
  CHECK(report.feasibility_max <= 1e-9);
  CHECK(report.inclusion_max <= 1e-2);
  CHECK(report.flagged_steps.empty());
}

TEST_CASE("residual_report: interior rest phase has zero defect") {
  auto problem = corner_problem(point2(0.5, 1.0));
  auto traj = catching_up(problem, 300);
  auto report = residual_report(traj, problem, cone_cert());
  // Until t_bar = 0.5 (k = 50) the ball rests: w == 0 exactly.
  for (int k = 1; k <= 40; ++k) {
    CHECK(report.per_step[k - 1].inclusion == 0.0);
    CHECK(report.per_step[k - 1].feasibility == 0.0);
  }
}

TEST_CASE("residual_report: outward corruption is flagged at that step") {
  auto problem = corner_problem(point2(0.5, 1.0));
  const int N = 600;
  auto traj = catching_up(problem, N);
  const int j = N / 2;
  traj.states[j] += point2(0.0, -0.1);
  traj.velocities[j - 1] = (traj.states[j] - traj.states[j - 1]) / traj.dt(j);
  traj.velocities[j] = (traj.states[j + 1] - traj.states[j]) / traj.dt(j + 1);
  auto report = residual_report(traj, problem, cone_cert());
  CHECK(report.inclusion_max > 1e-2);
  CHECK(report.per_step[j - 1].inclusion > 1e-2);
  CHECK(report.per_step[j - 1].feasibility > 1e-2);
  bool flagged_j = false;
  for (int k : report.flagged_steps) flagged_j |= (k == j);
  CHECK(flagged_j);
}

TEST_CASE("residual_report: corruptions at 100x the tolerance are still flagged") {
  auto problem = corner_problem(point2(0.5, 1.0));
  const int N = 600;
  auto traj = catching_up(problem, N);
  const int j = N / 3;
  const double magnitude = 1e-4;  // 100 * projection tol on the trajectory scale
  traj.states[j] += magnitude * point2(0.0, -1.0);
  traj.velocities[j - 1] = (traj.states[j] - traj.states[j - 1]) / traj.dt(j);
  traj.velocities[j] = (traj.states[j + 1] - traj.states[j]) / traj.dt(j + 1);
  VerifyOptions opts;
  opts.flag_threshold = 1e-6;
  auto report = residual_report(traj, problem, cone_cert(), opts);
  bool flagged_j = false;
  for (int k : report.flagged_steps) flagged_j |= (k == j);
  CHECK(flagged_j);
  CHECK(report.per_step[j - 1].feasibility >= 0.5 * magnitude);
}

TEST_CASE("inclusion_residual_step: corner ride defect lies in the normal cone") {
  auto problem = corner_problem(point2(0.0, 0.0));
  auto traj = catching_up(problem, 200);
  VerifyOptions opts;
  opts.w_tol = 1e-9;  // force evaluation (w = (0,-1) is far above any floor)
  for (int k : {1, 50, 100, 200})
    CHECK(inclusion_residual_step(traj, k, problem, cone_cert(), opts) == 0.0);
}

TEST_CASE("convergence_study: gravity run fits first order") {
  auto problem = SweepingProblem{testfam::cone(1.0), Perturbation::gravity(2, 9.8),
                                 point2(0.0, 1.0), 1.0};
  OracleFn oracle = [](double t) { return oracles::example3(point2(0.0, 1.0), t, 1.0, 9.8); };
  auto table = convergence_study(problem, oracle, {250, 500, 1000, 2000});
  REQUIRE(table.rows.size() == 4);
  CHECK_FALSE(table.at_floor);
  CHECK(table.fitted_order >= 0.9);
  for (std::size_t i = 0; i + 1 < table.rows.size(); ++i)
    CHECK(table.rows[i].n_steps < table.rows[i + 1].n_steps);
  // Errors scale like h: the biggest grid has the biggest error.
  CHECK(table.rows.front().sup_error > table.rows.back().sup_error);
}

TEST_CASE("convergence_study: exact cases sit at the floor and skip the fit") {
  auto p1 = corner_problem(point2(0.0, 0.0));
  OracleFn o1 = [](double t) { return oracles::example1(t); };
  auto t1 = convergence_study(p1, o1, {100, 200, 400});
  CHECK(t1.at_floor);
  for (const auto& row : t1.rows) CHECK(row.sup_error <= t1.floor_level);

  auto p2 = corner_problem(point2(0.5, 1.0));
  OracleFn o2 = [](double t) { return oracles::example2(point2(0.5, 1.0), t, 3.0); };
  auto t2 = convergence_study(p2, o2, {100, 200, 400});
  CHECK(t2.at_floor);
}

TEST_CASE("reachability_sample: capped family funnels to one endpoint") {
  auto fam = testfam::capped();
  const int N = 600;
  auto set = reachability_sample(fam, Perturbation::zero(2), 3.0, 25, N, 3);
  REQUIRE(set.samples.size() == 25);
  CHECK(set.failures == 0);
  const double h = 3.0 / N;
  for (const auto& s : set.samples) {
    CHECK(fam.membership(0.0, s.x0, 1e-12));
    CHECK((s.endpoint - point2(0.0, 3.0)).norm() <= 10 * h + 1e-9);
  }
  CHECK(set.diameter <= 2 * (10 * h + 1e-9));
}

TEST_CASE("reachability_sample: static set keeps every start in place") {
  auto fam = testfam::square();
  auto set = reachability_sample(fam, Perturbation::zero(2), 1.0, 20, 50, 5);
  double spread = 0.0;
  for (const auto& s : set.samples) {
    CHECK((s.endpoint - s.x0).norm() <= 1e-12);
    for (const auto& other : set.samples)
      spread = std::max(spread, (s.x0 - other.x0).norm());
  }
  CHECK(set.diameter == doctest::Approx(spread).epsilon(1e-9));
  CHECK(set.lipschitz_est == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("reachability_sample: endpoint cloud misses most of the final slice") {
  // The terminal slice C(3) of the capped family is a full triangle, while
  // the endpoint cloud collapses to its apex: the reachable set is a
  // strict subset.
  auto fam = testfam::capped();
  auto set = reachability_sample(fam, Perturbation::zero(2), 3.0, 16, 400, 7);
  SetSlice final_slice(fam, 3.0);
  auto probes = sample_slice(final_slice, 200, 11);
  double far = 0.0;
  Point far_probe;
  for (const auto& p : probes) {
    double nearest = kInfinity;
    for (const auto& s : set.samples)
      nearest = std::min(nearest, (p - s.endpoint).norm());
    if (nearest > far) {
      far = nearest;
      far_probe = p;
    }
  }
  CHECK(far > 0.5);
  CHECK(fam.membership(3.0, far_probe, 1e-9));
}

TEST_CASE("reachability_sample: parallel and serial runs agree") {
  auto fam = testfam::capped();
  auto serial = reachability_sample(fam, Perturbation::zero(2), 3.0, 12, 200, 9, 1);
  auto parallel = reachability_sample(fam, Perturbation::zero(2), 3.0, 12, 200, 9, 4);
  REQUIRE(serial.samples.size() == parallel.samples.size());
  for (std::size_t i = 0; i < serial.samples.size(); ++i) {
    CHECK(serial.samples[i].x0.isApprox(parallel.samples[i].x0));
    CHECK(serial.samples[i].endpoint.isApprox(parallel.samples[i].endpoint));
  }
}

TEST_CASE("reachability_sample: failures are recorded, not fatal") {
  // Emptying slice: every sample fails downstream but the batch returns.
  ConstraintFamily fam(2, 1.0,
                       {PieceExpr::affine(point2(1.0, 0.0), 1.0, -0.5),
                        PieceExpr::affine(point2(-1.0, 0.0), 0.0, 0.0)});
  auto set = reachability_sample(fam, Perturbation::zero(2), 1.0, 4, 20, 13);
  CHECK(set.failures == 4);
  for (const auto& s : set.samples) CHECK_FALSE(s.error.empty());
}
