#pragma once

#include "sweepsim/constraints.hpp"
#include "sweepsim/geometry.hpp"

#include <string>
#include <vector>

namespace sweepsim {

/// Sampled checks can refute an assumption or fail to refute it at a given
/// budget; they can never prove it. Reports carry the budget so "passed"
/// always reads as "no violation found at this budget".
struct AssumptionViolation {
  std::string assumption;  // "A1".."A4"
  double t = 0.0;
  Point x1;
  Point x2;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string detail;
};

struct VbarWitness {
  double t = 0.0;
  Point x;
  Point v;        // unit direction
  double margin;  // min over active generators of -<xi, v>
};

struct AssumptionReport {
  double L1_est = 0.0;
  std::vector<double> L1_per_constraint;
  double gamma_candidate = 0.0;
  double mu_est = 0.0;
  std::vector<VbarWitness> vbar_witnesses;
  std::vector<AssumptionViolation> violations;
  bool a1_pass = false;
  bool a2_recorded = false;  // moduli come from the registered pieces
  bool a3_pass = false;
  bool a4_pass = false;
  int budget = 0;

  bool all_passed() const { return a1_pass && a3_pass && a4_pass; }
};

/// Sampled sup of |f_i(s,x) - f_i(t,x)| / |s - t| per constraint.
std::vector<double> check_A1(const ConstraintFamily& family, int sample_budget,
                             std::uint64_t seed = 1);

struct A3Result {
  bool pass = true;
  std::vector<AssumptionViolation> violations;
};

/// Hypomonotonicity test: <xi1 - xi2, x1 - x2> >= -gamma |x1 - x2|^2 over
/// sampled pairs in the rho-enlargement and all generator pairs of each
/// constraint. Convex-by-construction pieces are additionally held to plain
/// monotonicity.
A3Result check_A3(const ConstraintFamily& family, double gamma_candidate,
                  int sample_budget, std::uint64_t seed = 1, double tol = 1e-9);

struct A4Result {
  double mu_est = 0.0;
  std::vector<VbarWitness> witnesses;
};

/// Descent-margin search. Samples each constraint surface {f_i(t,.) = 0}
/// inside C(t) plus the kink loci of max pieces, and solves at every sample
///   maximize delta  s.t.  <xi, v> <= -delta  for all active generators,
///                          |v| <= 1
/// over a 64-gon inscribed in the unit circle (renormalized ascent above
/// 2D). Returns the sampled infimum and witness directions. Throws
/// InfeasibleDirection when some sample admits no positive margin.
A4Result check_A4(const ConstraintFamily& family, int sample_budget,
                  std::uint64_t seed = 1);

/// Runs A1/A3/A4 (A2 moduli are recorded from the registered pieces, not
/// estimated). Never throws on refutation; failures land in the report.
AssumptionReport certify_family(const ConstraintFamily& family,
                                double gamma_candidate, int sample_budget,
                                std::uint64_t seed = 1);

/// Certificate from a passing report: r = min(rho, mu/gamma),
/// theta = L1/mu, vbar from the per-point margin LP.
ProxCertificate make_certificate(const ConstraintFamily& family,
                                 const AssumptionReport& report);

/// Best (margin, direction) for the active generators at (t, x).
/// Used both by the A4 sweep and as the certificate's vbar field.
std::pair<double, Point> descent_direction(const ConstraintFamily& family,
                                           double t, const Point& x,
                                           double active_tol = 1e-9);

}  // namespace sweepsim
