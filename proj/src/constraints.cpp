#include "sweepsim/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace sweepsim {

PieceExpr PieceExpr::affine(Point gradient, double time_slope, double offset) {
  PieceExpr p;
  p.kind_ = Kind::Affine;
  p.grad_ = std::move(gradient);
  p.time_slope_ = time_slope;
  p.offset_ = offset;
  p.label_ = "affine";
  return p;
}

PieceExpr PieceExpr::max_of(std::vector<PieceExpr> children) {
  PieceExpr p;
  p.kind_ = Kind::MaxOf;
  p.children_ = std::move(children);
  p.convex_flag_ = std::all_of(p.children_.begin(), p.children_.end(),
                               [](const PieceExpr& c) { return c.convex(); });
  p.label_ = "max";
  return p;
}

PieceExpr PieceExpr::smooth(std::function<double(double, const Point&)> value,
                            std::function<Point(double, const Point&)> gradient,
                            bool convex, std::string label) {
  PieceExpr p;
  p.kind_ = Kind::Smooth;
  p.value_fn_ = std::move(value);
  p.gradient_fn_ = std::move(gradient);
  p.convex_flag_ = convex;
  p.label_ = std::move(label);
  return p;
}

PieceExpr PieceExpr::ball_complement(Point center, double radius) {
  const Point c = std::move(center);
  const double r2 = radius * radius;
  return smooth(
      [c, r2](double, const Point& x) { return r2 - (x - c).squaredNorm(); },
      [c](double, const Point& x) -> Point { return -2.0 * (x - c); },
      /*convex=*/false, "ball_complement");
}

double PieceExpr::value(double t, const Point& x) const {
  switch (kind_) {
    case Kind::Affine:
      return grad_.dot(x) + time_slope_ * t + offset_;
    case Kind::Smooth:
      return value_fn_(t, x);
    case Kind::MaxOf: {
      double v = -kInfinity;
      for (const auto& c : children_) v = std::max(v, c.value(t, x));
      return v;
    }
  }
  return 0.0;
}

void PieceExpr::generators(double t, const Point& x, std::vector<Point>& out,
                           double kink_tol) const {
  switch (kind_) {
    case Kind::Affine:
      out.push_back(grad_);
      return;
    case Kind::Smooth:
      out.push_back(gradient_fn_(t, x));
      return;
    case Kind::MaxOf: {
      const double v = value(t, x);
      const double cut = v - kink_tol * std::max(1.0, std::abs(v));
      for (const auto& c : children_)
        if (c.value(t, x) >= cut) c.generators(t, x, out, kink_tol);
      return;
    }
  }
}

bool PieceExpr::convex() const { return convex_flag_; }

bool PieceExpr::polyhedral() const {
  switch (kind_) {
    case Kind::Affine:
      return true;
    case Kind::Smooth:
      return false;
    case Kind::MaxOf:
      return std::all_of(children_.begin(), children_.end(),
                         [](const PieceExpr& c) { return c.polyhedral(); });
  }
  return false;
}

void PieceExpr::halfplanes(double t, std::vector<HalfPlane>& out) const {
  // max(c_1, ..., c_k) <= 0  iff  every c_j <= 0, so the decomposition
  // flattens max nodes into their children's half-planes.
  switch (kind_) {
    case Kind::Affine:
      out.push_back({grad_, -(time_slope_ * t + offset_)});
      return;
    case Kind::Smooth:
      throw Error("halfplanes: piece is not polyhedral");
    case Kind::MaxOf:
      for (const auto& c : children_) c.halfplanes(t, out);
      return;
  }
}

void PieceExpr::tie_lines(std::vector<TieLine>& out) const {
  if (kind_ != Kind::MaxOf) return;
  for (std::size_t j = 0; j < children_.size(); ++j) {
    children_[j].tie_lines(out);
    for (std::size_t k = j + 1; k < children_.size(); ++k) {
      if (children_[j].kind_ != Kind::Affine || children_[k].kind_ != Kind::Affine)
        continue;
      TieLine tie;
      tie.normal = children_[j].grad_ - children_[k].grad_;
      tie.time_slope = children_[j].time_slope_ - children_[k].time_slope_;
      tie.offset = children_[j].offset_ - children_[k].offset_;
      if (tie.normal.norm() > 1e-14) out.push_back(std::move(tie));
    }
  }
}

ConstraintFamily::ConstraintFamily(int dim, double horizon,
                                   std::vector<PieceExpr> pieces, double rho,
                                   std::optional<Box> sampling_box)
    : dim_(dim), horizon_(horizon), pieces_(std::move(pieces)), rho_(rho) {
  if (dim_ < 1) throw ConfigError("constraint family: dimension must be >= 1");
  if (horizon_ <= 0) throw ConfigError("constraint family: horizon must be > 0");
  if (pieces_.empty()) throw ConfigError("constraint family: needs m >= 1 pieces");
  if (!(rho_ > 0)) throw ConfigError("constraint family: rho must be positive");
  box_ = sampling_box ? *sampling_box : Box::cube(dim_, -3.0 - horizon_, 3.0 + horizon_);
}

void ConstraintFamily::check_time(double t) const {
  if (t < -1e-12 || t > horizon_ + 1e-12)
    throw OutOfHorizon("time " + std::to_string(t) + " outside [0, " +
                       std::to_string(horizon_) + "]");
}

double ConstraintFamily::evaluate(int i, double t, const Point& x) const {
  check_time(t);
  return pieces_.at(i).value(t, x);
}

double ConstraintFamily::max_value(double t, const Point& x) const {
  double v = -kInfinity;
  for (const auto& p : pieces_) v = std::max(v, p.value(t, x));
  return v;
}

SubdifferentialHull ConstraintFamily::subdifferential(int i, double t, const Point& x,
                                                      double kink_tol) const {
  check_time(t);
  if (std::isfinite(rho_)) {
    // Enlargement membership needs a distance; the cheap sufficient check
    // f_i(t,x) <= 0 or a feasible point within rho along any axis is not
    // available here, so gate on the sublevel residual scaled by the local
    // gradient. A residual far beyond rho * |grad| cannot be inside U_rho.
    std::vector<Point> gens;
    pieces_.at(i).generators(t, x, gens, kink_tol);
    double gnorm = 0.0;
    for (const auto& g : gens) gnorm = std::max(gnorm, g.norm());
    const double v = max_value(t, x);
    if (v > rho_ * std::max(gnorm, 1.0))
      throw OutOfDomain("subdifferential: point outside the rho-enlargement");
    SubdifferentialHull hull;
    hull.generators = std::move(gens);
    return hull;
  }
  SubdifferentialHull hull;
  pieces_.at(i).generators(t, x, hull.generators, kink_tol);
  return hull;
}

bool ConstraintFamily::membership(double t, const Point& x, double tol) const {
  check_time(t);
  return max_value(t, x) <= tol;
}

bool ConstraintFamily::polyhedral() const {
  return std::all_of(pieces_.begin(), pieces_.end(),
                     [](const PieceExpr& p) { return p.polyhedral(); });
}

void ConstraintFamily::halfplanes(double t, std::vector<HalfPlane>& out) const {
  for (const auto& p : pieces_) p.halfplanes(t, out);
}

}  // namespace sweepsim
