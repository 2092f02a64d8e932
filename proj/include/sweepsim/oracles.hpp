#pragma once

#include "sweepsim/types.hpp"

namespace sweepsim {
namespace oracles {

/// Phase-transition times of the closed-form benchmark trajectories:
/// t_bar ends the rest / free-fall phase, theta1/theta2 bracket the sliding
/// phase under gravity. theta1 == theta2 when x0 starts on the symmetry
/// axis (no sliding), and t_bar == 0 on the boundary.
struct OracleBreakpoints {
  double t_bar = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double g0 = 9.8;

  static OracleBreakpoints for_drift(const Point& x0);
  static OracleBreakpoints for_gravity(const Point& x0, double g0);
};

/// sign with sign(0) = 0, so degenerate sliding branches collapse cleanly.
inline double sign0(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

/// Corner-frame problem started at the corner: x(t) = (0, t).
Point example1(double t);

/// Corner frame translating upward at unit speed, zero force, arbitrary
/// feasible start: rest until t_bar = x2 - |x1|, slide along one wing for
/// 2|x1| time units, then ride the corner. Values at a breakpoint use the
/// right branch (the formulas are continuous there).
Point example2(const Point& x0, double t, double T);

/// Same frame in a vertical plane with gravity g0: free fall until theta1,
/// slide until theta2, then ride the corner.
Point example3(const Point& x0, double t, double T, double g0);

/// Corner frame capped by a translating lid, horizon T = 3: every feasible
/// start funnels to the same endpoint (0, 3).
Point example4_endpoint(const Point& x0);

/// Analytic trajectory derivative of example3 (right branch at
/// breakpoints); used by inclusion checks on the sliding phase.
Point example3_velocity(const Point& x0, double t, double g0);

}  // namespace oracles
}  // namespace sweepsim
