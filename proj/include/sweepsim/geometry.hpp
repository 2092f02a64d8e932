#pragma once

#include "sweepsim/constraints.hpp"
#include "sweepsim/types.hpp"

#include <optional>
#include <vector>

namespace sweepsim {

/// Certified constants of a constraint family:
///   rho    enlargement radius supplied with the family,
///   L1     Lipschitz modulus of t -> f_i(t, x),
///   gamma  hypomonotonicity constant of the subdifferentials,
///   mu     uniform descent margin of the unit direction field vbar,
///   r      prox-regularity radius, r = min(rho, mu / gamma),
///   theta  Hausdorff Lipschitz modulus of t -> C(t), theta >= L1 / mu.
struct ProxCertificate {
  double rho = kInfinity;
  double L1 = 0.0;
  double gamma = 0.0;
  double mu = 0.0;
  double r = 0.0;
  double theta = 0.0;
  std::function<Point(double, const Point&)> vbar_field;

  static ProxCertificate make(double rho, double L1, double gamma, double mu,
                              std::function<Point(double, const Point&)> vbar = {});
};

/// r = min(rho, mu / gamma).
double prox_radius(const ProxCertificate& cert);

/// One time slice C(t) of a constraint family. Construction probes the
/// slice for nonemptiness and caches a feasible witness.
class SetSlice {
 public:
  SetSlice(const ConstraintFamily& family, double time);

  const ConstraintFamily& family() const { return *family_; }
  double time() const { return time_; }
  const Point& witness() const { return witness_; }
  bool contains(const Point& x, double tol) const {
    return family_->membership(time_, x, tol);
  }

 private:
  const ConstraintFamily* family_;
  double time_;
  Point witness_;
};

struct ProjectionOptions {
  double tol = 1e-9;           // closed-form path; iterative path uses 1e-6
  int starts = 8;              // multi-start count for the iterative path
  int budget = 10000;          // total iteration budget across starts
  std::uint64_t seed = 0;      // start placement
  bool force_iterative = false;
  std::optional<double> prox_radius;  // uniqueness tube; family hint if unset
};

struct ProjectionResult {
  Point point;
  double distance = 0.0;
  /// Two equal-distance candidates separated by more than 10*tol were
  /// found with the query farther than the prox radius from the set. The
  /// lexicographically smallest candidate is returned in `point`; all
  /// equal-distance candidates are reported here.
  bool ambiguous = false;
  std::vector<Point> candidates;
  int iterations = 0;
};

/// Nearest-point projection onto a slice. Polyhedral slices are projected
/// exactly by enumerating active-constraint subsets; everything else goes
/// through a multi-start penalized proximal-gradient descent followed by a
/// Gauss-Newton polish on the locally active constraints.
ProjectionResult project_detailed(const Point& p, const SetSlice& slice,
                                  const ProjectionOptions& opts = {});

Point project(const Point& p, const SetSlice& slice, double tol = 1e-9);

/// d(p, C(t)) = |p - project(p)|; zero when p is feasible within tol.
double distance(const Point& p, const SetSlice& slice, double tol = 1e-9);

/// Normal-cone membership statistic at x for direction v:
///   max over sampled feasible x' in B(x, r/2) of
///     <v, x' - x> - |v| |x' - x|^2 / (2 r).
/// Nonpositive (up to tol) certifies v as a numerically proximal normal;
/// a clearly positive value refutes it. Throws EmptySample when no
/// feasible neighbor is found.
double proximal_normal_residual(const Point& x, const Point& v,
                                const SetSlice& slice, double r, int samples,
                                std::uint64_t seed = 1, double member_tol = 1e-9);

struct HausdorffRow {
  double s = 0.0;
  double t = 0.0;
  double estimate = 0.0;
  double bound = 0.0;  // theta * |t - s|
  double ratio = 0.0;  // estimate / bound (0 when s == t)
  bool within = true;
};

struct HausdorffReport {
  std::vector<HausdorffRow> rows;
  double worst_ratio = 0.0;
  bool passed = true;
};

/// Sampled two-sided Hausdorff estimate per time pair, asserted against
/// theta * |t - s| + tol.
HausdorffReport hausdorff_check(const ConstraintFamily& family,
                                const ProxCertificate& cert,
                                const std::vector<std::pair<double, double>>& time_pairs,
                                double tol = 1e-6, int samples_per_slice = 1000,
                                std::uint64_t seed = 1);

/// Quasi-random feasible points of a slice (rejection inside the family box).
std::vector<Point> sample_slice(const SetSlice& slice, int count,
                                std::uint64_t seed, double member_tol = 1e-9);

/// Quasi-random boundary points of a slice, obtained by projecting outside
/// box points onto the slice. Hits corners and kinks with positive
/// probability, which plain surface sampling would miss.
std::vector<Point> sample_boundary(const SetSlice& slice, int count,
                                   std::uint64_t seed, double tol = 1e-9);

}  // namespace sweepsim
