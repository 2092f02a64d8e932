#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "families.hpp"
#include "sweepsim/oracles.hpp"
#include "sweepsim/sampling.hpp"

#include <cmath>

using namespace sweepsim;
using namespace sweepsim::oracles;

TEST_CASE("example1: corner ride") {
  CHECK(example1(0.0).isApprox(point2(0.0, 0.0)));
  CHECK(example1(1.0).isApprox(point2(0.0, 1.0)));
  CHECK(example1(3.0).isApprox(point2(0.0, 3.0)));
}

TEST_CASE("example2: rest, slide, corner branches") {
  const Point x0 = point2(0.5, 1.0);
  // t_bar = 0.5, slide ends at 1.5.
  CHECK(example2(x0, 0.25, 3.0).isApprox(x0));
  CHECK(example2(x0, 3.0, 3.0).isApprox(point2(0.0, 3.0)));
  // Boundary start slides immediately.
  CHECK(example2(point2(0.5, 0.5), 0.5, 3.0).isApprox(point2(0.25, 0.75)));
  // Left-wing start mirrors the right-wing one.
  CHECK(example2(point2(-0.5, 0.5), 0.5, 3.0).isApprox(point2(-0.25, 0.75)));
}

TEST_CASE("example2: infeasible starts are rejected") {
  CHECK_THROWS_AS(example2(point2(2.0, 0.0), 1.0, 3.0), InfeasibleInitial);
  CHECK_THROWS_AS(example3(point2(2.0, 0.0), 0.5, 1.0, 9.8), InfeasibleInitial);
  CHECK_THROWS_AS(example4_endpoint(point2(0.0, 1.5)), InfeasibleInitial);
  CHECK_THROWS_AS(example3(point2(0.0, 1.0), 0.5, 1.0, 0.0), ConfigError);
}

TEST_CASE("example3: free fall then corner for an axis start") {
  const Point x0 = point2(0.0, 1.0);
  const double g0 = 9.8;
  const auto bp = OracleBreakpoints::for_gravity(x0, g0);
  CHECK(bp.t_bar == doctest::Approx(1.0));
  CHECK(bp.theta1 == doctest::Approx((-1.0 + std::sqrt(1.0 + 2.0 * 9.8)) / 9.8));
  CHECK(bp.theta1 == doctest::Approx(bp.theta2));

  CHECK(example3(x0, 0.2, 1.0, g0).isApprox(point2(0.0, 0.804), 1e-12));
  CHECK(example3(x0, 0.5, 1.0, g0).isApprox(point2(0.0, 0.5), 1e-12));
}

TEST_CASE("example3: breakpoints ordered, degenerate on the boundary") {
  auto interior = OracleBreakpoints::for_gravity(point2(0.3, 1.0), 9.8);
  CHECK(interior.theta1 > 0.0);
  CHECK(interior.theta1 <= interior.theta2);
  auto boundary = OracleBreakpoints::for_gravity(point2(0.5, 0.5), 9.8);
  CHECK(boundary.t_bar == doctest::Approx(0.0));
  CHECK(boundary.theta1 == doctest::Approx(0.0));
}

TEST_CASE("oracles: continuity at every breakpoint to 1e-12") {
  auto check_continuity = [](auto&& f, double b) {
    if (b <= 0.0) return;
    const double eps = 1e-9;
    const Point lo = f(b - eps);
    const Point at = f(b);
    const Point hi = f(b + eps);
    // Left/right limits agree with the breakpoint value up to the local
    // slope times eps; the branch formulas themselves agree to 1e-12.
    CHECK((at - lo).norm() <= 20 * eps);
    CHECK((hi - at).norm() <= 20 * eps);
  };
  const double T = 10.0;
  for (const Point& x0 : {point2(0.5, 1.0), point2(-0.4, 0.9), point2(0.7, 0.7)}) {
    const auto drift = OracleBreakpoints::for_drift(x0);
    check_continuity([&](double t) { return example2(x0, t, T); }, drift.t_bar);
    check_continuity([&](double t) { return example2(x0, t, T); }, drift.theta2);
    const auto grav = OracleBreakpoints::for_gravity(x0, 9.8);
    check_continuity([&](double t) { return example3(x0, t, T, 9.8); }, grav.theta1);
    check_continuity([&](double t) { return example3(x0, t, T, 9.8); }, grav.theta2);
  }
  // Exact branch agreement at the breakpoints themselves.
  const Point x0 = point2(0.5, 1.0);
  const auto bp = OracleBreakpoints::for_gravity(x0, 9.8);
  // free fall value at theta1 equals the slide value at theta1
  const Point fall = point2(x0[0], x0[1] - 9.8 * bp.theta1 * bp.theta1 / 2.0);
  CHECK((example3(x0, bp.theta1, T, 9.8) - fall).norm() <= 1e-12);
  const Point corner = point2(0.0, bp.theta2);
  CHECK((example3(x0, bp.theta2, T, 9.8) - corner).norm() <= 1e-12);
}

TEST_CASE("oracles: trajectories stay feasible in their families") {
  auto cone = testfam::cone(10.0);
  HaltonSampler sampler(1, 5);
  for (const Point& x0 : {point2(0.5, 1.0), point2(-0.3, 0.4), point2(0.0, 2.0)}) {
    for (int i = 0; i < 200; ++i) {
      const double t = sampler.next_scalar(0.0, 10.0);
      CHECK(cone.membership(t, example2(x0, t, 10.0), 1e-9));
      CHECK(cone.membership(t, example3(x0, t, 10.0, 9.8), 1e-9));
    }
  }
}

TEST_CASE("oracles: example2 from the origin reduces to example1 exactly") {
  for (double t : {0.0, 0.7, 1.5, 2.9}) {
    CHECK((example2(point2(0.0, 0.0), t, 3.0) - example1(t)).norm() == 0.0);
  }
}

TEST_CASE("oracles: vanishing gravity recovers the drift solution") {
  const double g0 = 1e-6;
  const double T = 3.0;
  for (const Point& x0 : {point2(0.5, 1.0), point2(-0.2, 0.8), point2(0.0, 1.0)}) {
    for (int k = 0; k <= 60; ++k) {
      const double t = T * k / 60.0;
      CHECK((example3(x0, t, T, g0) - example2(x0, t, T)).norm() <= 1e-5);
    }
  }
}

TEST_CASE("oracles: sliding velocity satisfies the inclusion analytically") {
  // Along the slide, -dx/dt - g must be a nonnegative multiple of the
  // active generator (sign(x1), -1).
  const double g0 = 9.8;
  for (const Point& x0 : {point2(0.5, 1.0), point2(-0.5, 1.0)}) {
    const auto bp = OracleBreakpoints::for_gravity(x0, g0);
    const double s = sign0(x0[0]);
    for (int k = 1; k < 10; ++k) {
      const double t = bp.theta1 + (bp.theta2 - bp.theta1) * k / 10.0;
      const Point v = example3_velocity(x0, t, g0);
      // finite-difference cross-check of the analytic derivative
      const double eps = 1e-7;
      const Point fd =
          (example3(x0, t + eps, 10.0, g0) - example3(x0, t - eps, 10.0, g0)) /
          (2 * eps);
      CHECK((v - fd).norm() <= 1e-5);
      Point w = -v - point2(0.0, g0 * t);
      const double lambda = -w[1];  // multiple of (s, -1)
      CHECK(lambda >= 0.0);
      CHECK((w - lambda * point2(s, -1.0)).norm() <= 1e-12);
    }
  }
}

TEST_CASE("example4: every admissible start funnels to (0, 3)") {
  CHECK(example4_endpoint(point2(0.0, 0.0)).isApprox(point2(0.0, 3.0)));
  CHECK(example4_endpoint(point2(0.5, 1.0)).isApprox(point2(0.0, 3.0)));
  CHECK(example4_endpoint(point2(1.0, 1.0)).isApprox(point2(0.0, 3.0)));
  // The slide-until-corner time never exceeds 2 < 3 inside the capped set,
  // so the drift oracle confirms the endpoint for extreme corners too.
  CHECK(example2(point2(1.0, 1.0), 3.0, 3.0).isApprox(point2(0.0, 3.0)));
}
