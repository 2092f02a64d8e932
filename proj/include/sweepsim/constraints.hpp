#pragma once

#include "sweepsim/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sweepsim {

/// One half-plane a.y <= b, the atomic unit of a polyhedral slice.
struct HalfPlane {
  Point normal;
  double rhs;
  double violation(const Point& y) const { return normal.dot(y) - rhs; }
};

/// Finite generator representation of a Clarke subdifferential: the
/// subdifferential equals the convex hull of `generators`. Exact for
/// affine and pointwise-max pieces; a single gradient for smooth pieces.
struct SubdifferentialHull {
  std::vector<Point> generators;
};

/// Compositional description of one constraint function f(t, x):
///   - affine:          a.x + time_slope * t + offset
///   - smooth:          user value/gradient callbacks (gradient exact)
///   - pointwise max:   max over child pieces
/// Keeping the structure explicit makes subdifferentials exact instead of
/// estimated, which the assumption checks rely on.
class PieceExpr {
 public:
  static PieceExpr affine(Point gradient, double time_slope, double offset);
  static PieceExpr max_of(std::vector<PieceExpr> children);
  static PieceExpr smooth(std::function<double(double, const Point&)> value,
                          std::function<Point(double, const Point&)> gradient,
                          bool convex, std::string label = "smooth");
  /// radius^2 - |x - center|^2 <= 0, i.e. the complement of an open ball.
  /// The standard smooth nonconvex test constraint.
  static PieceExpr ball_complement(Point center, double radius);

  double value(double t, const Point& x) const;

  /// Generators of the Clarke subdifferential in x. Children of a max are
  /// treated as active when within `kink_tol` of the max value.
  void generators(double t, const Point& x, std::vector<Point>& out,
                  double kink_tol) const;

  bool convex() const;

  /// True when the sublevel set {f(t,.) <= 0} is an intersection of
  /// half-planes (affine, or max of polyhedral pieces).
  bool polyhedral() const;

  /// Decomposes f(t,.) <= 0 into half-planes. Requires polyhedral().
  void halfplanes(double t, std::vector<HalfPlane>& out) const;

  /// Tie hyperplanes c.x = d(t) between pairs of affine children of max
  /// nodes; the loci where the subdifferential fattens. Used by samplers
  /// that must not miss kinks.
  struct TieLine {
    Point normal;       // c = a_j - a_k
    double time_slope;  // of d: d(t) = offset + time_slope * t
    double offset;
  };
  void tie_lines(std::vector<TieLine>& out) const;

  const std::string& label() const { return label_; }

 private:
  PieceExpr() = default;

  enum class Kind { Affine, Smooth, MaxOf } kind_ = Kind::Affine;
  // affine
  Point grad_;
  double time_slope_ = 0.0;
  double offset_ = 0.0;
  // smooth
  std::function<double(double, const Point&)> value_fn_;
  std::function<Point(double, const Point&)> gradient_fn_;
  bool convex_flag_ = true;
  // max
  std::vector<PieceExpr> children_;
  std::string label_;
};

/// Time-dependent inequality system f_i(t, x) <= 0, i = 1..m, defining the
/// moving set C(t) on the horizon [0, T].
class ConstraintFamily {
 public:
  ConstraintFamily(int dim, double horizon, std::vector<PieceExpr> pieces,
                   double rho = kInfinity, std::optional<Box> sampling_box = {});

  int dim() const { return dim_; }
  int count() const { return static_cast<int>(pieces_.size()); }
  double horizon() const { return horizon_; }
  double rho() const { return rho_; }
  const Box& sampling_box() const { return box_; }
  const PieceExpr& piece(int i) const { return pieces_.at(i); }

  /// f_i(t, x). Index is 0-based; t must lie in [0, T].
  double evaluate(int i, double t, const Point& x) const;

  /// max_i f_i(t, x), the single sublevel residual.
  double max_value(double t, const Point& x) const;

  /// Exact generator hull of the Clarke subdifferential of f_i(t, .) at x.
  /// Throws OutOfDomain when rho is finite and x lies outside the
  /// rho-enlargement of C(t).
  SubdifferentialHull subdifferential(int i, double t, const Point& x,
                                      double kink_tol = 1e-12) const;

  /// x in C(t) up to tol: max_i f_i(t, x) <= tol.
  bool membership(double t, const Point& x, double tol) const;

  bool polyhedral() const;
  void halfplanes(double t, std::vector<HalfPlane>& out) const;

  /// Hypomonotonicity constant the certification should validate.
  double gamma_candidate() const { return gamma_candidate_; }
  void set_gamma_candidate(double g) { gamma_candidate_ = g; }

  /// Prox-regularity radius, once derived by certification. Consulted by
  /// the projector when deciding whether an equidistant pair is a genuine
  /// ambiguity (outside the uniqueness tube) or a tie to break silently.
  std::optional<double> prox_radius_hint() const { return prox_radius_hint_; }
  void set_prox_radius_hint(double r) { prox_radius_hint_ = r; }

  void check_time(double t) const;

 private:
  int dim_;
  double horizon_;
  std::vector<PieceExpr> pieces_;
  double rho_;
  Box box_;
  double gamma_candidate_ = 1e-6;
  std::optional<double> prox_radius_hint_;
};

}  // namespace sweepsim
