#pragma once

#include <Eigen/Core>

#include <limits>
#include <stdexcept>
#include <string>

namespace sweepsim {

/// State vector in R^n. Dimension is fixed per problem.
using Point = Eigen::VectorXd;

inline Point point2(double x1, double x2) {
  Point p(2);
  p << x1, x2;
  return p;
}

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Axis-aligned sampling region used by quasi-random samplers and probes.
/// Geometric operations never depend on it; only sample placement does.
struct Box {
  Point lo;
  Point hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double extent(int k) const { return hi[k] - lo[k]; }
  double diameter() const { return (hi - lo).norm(); }
  bool contains(const Point& x) const {
    for (int k = 0; k < x.size(); ++k)
      if (x[k] < lo[k] || x[k] > hi[k]) return false;
    return true;
  }
  Point clamp(const Point& x) const {
    Point y = x;
    for (int k = 0; k < y.size(); ++k)
      y[k] = std::min(std::max(y[k], lo[k]), hi[k]);
    return y;
  }
  static Box cube(int n, double lo_v, double hi_v) {
    Box b;
    b.lo = Point::Constant(n, lo_v);
    b.hi = Point::Constant(n, hi_v);
    return b;
  }
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative sub-solver ran out of its iteration budget.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// No feasible sample could be drawn in the requested neighborhood.
class EmptySample : public Error {
 public:
  using Error::Error;
};

class OutOfHorizon : public Error {
 public:
  using Error::Error;
};

class OutOfDomain : public Error {
 public:
  using Error::Error;
};

class InfeasibleInitial : public Error {
 public:
  using Error::Error;
};

class InfeasibleSlice : public Error {
 public:
  using Error::Error;
};

/// The descent-direction search found no unit vector with positive margin.
class InfeasibleDirection : public Error {
 public:
  InfeasibleDirection(const std::string& what, double t, Point x)
      : Error(what), time(t), at(std::move(x)) {}
  double time;
  Point at;
};

class BoundViolated : public Error {
 public:
  BoundViolated(const std::string& what, int step) : Error(what), step_index(step) {}
  int step_index;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ScenarioError : public Error {
 public:
  using Error::Error;
};

inline bool lexicographic_less(const Point& a, const Point& b) {
  for (int k = 0; k < a.size(); ++k) {
    if (a[k] < b[k]) return true;
    if (a[k] > b[k]) return false;
  }
  return false;
}

}  // namespace sweepsim
