#include "sweepsim/oracles.hpp"

#include <cmath>

namespace sweepsim {
namespace oracles {

namespace {

void require_feasible_start(const Point& x0, bool capped) {
  if (x0.size() != 2) throw ConfigError("oracle: expects a planar start");
  if (std::abs(x0[0]) > x0[1] + 1e-12)
    throw InfeasibleInitial("oracle: x0 outside the corner set (|x1| <= x2 fails)");
  if (capped && x0[1] > 1.0 + 1e-12)
    throw InfeasibleInitial("oracle: x0 above the lid (x2 <= 1 fails)");
}

}  // namespace

OracleBreakpoints OracleBreakpoints::for_drift(const Point& x0) {
  OracleBreakpoints bp;
  bp.g0 = 0.0;
  bp.t_bar = x0[1] - std::abs(x0[0]);
  bp.theta1 = bp.t_bar;
  bp.theta2 = bp.t_bar + 2.0 * std::abs(x0[0]);
  return bp;
}

OracleBreakpoints OracleBreakpoints::for_gravity(const Point& x0, double g0) {
  OracleBreakpoints bp;
  bp.g0 = g0;
  bp.t_bar = x0[1] - std::abs(x0[0]);
  bp.theta1 = (-1.0 + std::sqrt(1.0 + 2.0 * g0 * bp.t_bar)) / g0;
  bp.theta2 =
      (-1.0 + std::sqrt(1.0 + 2.0 * g0 * (bp.t_bar + 2.0 * std::abs(x0[0])))) / g0;
  return bp;
}

Point example1(double t) { return point2(0.0, t); }

Point example2(const Point& x0, double t, double T) {
  require_feasible_start(x0, false);
  if (t < -1e-12 || t > T + 1e-12) throw OutOfHorizon("oracle: t outside [0, T]");
  const double t_bar = x0[1] - std::abs(x0[0]);
  const double s = sign0(x0[0]);
  if (t < t_bar) return x0;                       // rest
  const double slide_end = t_bar + 2.0 * std::abs(x0[0]);
  if (t < slide_end)                              // slide along one wing
    return point2(x0[0] - s * (t - t_bar) / 2.0, x0[1] + (t - t_bar) / 2.0);
  return point2(0.0, t);                          // ride the corner
}

Point example3(const Point& x0, double t, double T, double g0) {
  require_feasible_start(x0, false);
  if (!(g0 > 0)) throw ConfigError("oracle: g0 must be positive");
  if (t < -1e-12 || t > T + 1e-12) throw OutOfHorizon("oracle: t outside [0, T]");
  const OracleBreakpoints bp = OracleBreakpoints::for_gravity(x0, g0);
  const double s = sign0(x0[0]);
  if (t < bp.theta1)                              // free fall
    return point2(x0[0], x0[1] - g0 * t * t / 2.0);
  if (t < bp.theta2)                              // slide along one wing
    return point2(x0[0] - s * ((t - bp.t_bar) / 2.0 + g0 * t * t / 4.0),
                  x0[1] + (t - bp.t_bar) / 2.0 - g0 * t * t / 4.0);
  return point2(0.0, t);                          // ride the corner
}

Point example3_velocity(const Point& x0, double t, double g0) {
  const OracleBreakpoints bp = OracleBreakpoints::for_gravity(x0, g0);
  const double s = sign0(x0[0]);
  if (t < bp.theta1) return point2(0.0, -g0 * t);
  if (t < bp.theta2)
    return point2(-s * (1.0 + g0 * t) / 2.0, (1.0 - g0 * t) / 2.0);
  return point2(0.0, 1.0);
}

Point example4_endpoint(const Point& x0) {
  require_feasible_start(x0, true);
  return point2(0.0, 3.0);
}

}  // namespace oracles
}  // namespace sweepsim
