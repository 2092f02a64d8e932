#include "sweepsim/assumptions.hpp"

#include "sweepsim/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sweepsim {

namespace {

constexpr double kActiveTol = 1e-9;

// Unit directions of the regular 64-gon, the inscribed polytope used for
// the 2D descent-margin search. Axis directions are among the vertices, so
// axis-aligned optima are found exactly.
const std::vector<Point>& polygon_directions() {
  static const std::vector<Point> dirs = [] {
    std::vector<Point> d;
    d.reserve(64);
    for (int k = 0; k < 64; ++k) {
      const double a = 2.0 * std::numbers::pi * k / 64.0;
      d.push_back(point2(std::cos(a), std::sin(a)));
    }
    return d;
  }();
  return dirs;
}

double margin_of(const std::vector<Point>& gens, const Point& v) {
  double m = kInfinity;
  for (const auto& g : gens) m = std::min(m, -g.dot(v));
  return m;
}

std::pair<double, Point> best_direction(const std::vector<Point>& gens, int dim) {
  if (gens.empty()) {
    Point v = Point::Zero(dim);
    v[0] = 1.0;
    return {kInfinity, v};
  }
  double best = -kInfinity;
  Point best_v = Point::Zero(dim);
  if (dim == 2) {
    for (const auto& v : polygon_directions()) {
      const double m = margin_of(gens, v);
      if (m > best) {
        best = m;
        best_v = v;
      }
    }
    return {best, best_v};
  }
  // Higher dimensions: seed with the normalized anti-generators, then run a
  // renormalized subgradient ascent on min_g -<g, v> over the unit sphere.
  for (const auto& g : gens) {
    if (g.norm() == 0) continue;
    Point v = -g / g.norm();
    const double m = margin_of(gens, v);
    if (m > best) {
      best = m;
      best_v = v;
    }
  }
  if (best_v.norm() == 0) {
    best_v = Point::Zero(dim);
    best_v[0] = 1.0;
  }
  Point v = best_v;
  double step = 0.5;
  for (int it = 0; it < 400; ++it) {
    const Point* active = nullptr;
    double m = kInfinity;
    for (const auto& g : gens) {
      const double mg = -g.dot(v);
      if (mg < m) {
        m = mg;
        active = &g;
      }
    }
    Point v_try = v - step * (*active);
    if (v_try.norm() < 1e-14) {
      step *= 0.5;
      continue;
    }
    v_try /= v_try.norm();
    if (margin_of(gens, v_try) > m) {
      v = v_try;
    } else {
      step *= 0.7;
    }
    if (step < 1e-10) break;
  }
  const double m = margin_of(gens, v);
  if (m > best) return {m, v};
  return {best, best_v};
}

std::vector<Point> active_generators(const ConstraintFamily& family, double t,
                                     const Point& x, double active_tol) {
  std::vector<Point> gens;
  for (int i = 0; i < family.count(); ++i) {
    if (family.evaluate(i, t, x) >= -active_tol)
      family.piece(i).generators(t, x, gens, 1e-12);
  }
  if (gens.empty()) {
    for (int i = 0; i < family.count(); ++i)
      family.piece(i).generators(t, x, gens, 1e-12);
  }
  return gens;
}

// Feasible point of the slice with the most negative residual among
// quasi-random draws; bisection anchors need strict interiority.
std::optional<Point> interior_anchor(const ConstraintFamily& family, double t,
                                     std::uint64_t seed) {
  HaltonSampler sampler(family.dim(), seed);
  std::optional<Point> best;
  double best_v = 0.0;
  for (int i = 0; i < 600; ++i) {
    Point x = sampler.next(family.sampling_box());
    const double v = family.max_value(t, x);
    if (v < best_v) {
      best_v = v;
      best = std::move(x);
    }
  }
  return best;
}

Point bisect_surface(const ConstraintFamily& family, int i, double t,
                     const Point& inside, const Point& outside) {
  Point a = inside, b = outside;
  for (int it = 0; it < 80; ++it) {
    Point mid = 0.5 * (a + b);
    if (family.evaluate(i, t, mid) <= 0)
      a = std::move(mid);
    else
      b = std::move(mid);
  }
  return 0.5 * (a + b);
}

// Points with f_i(t, .) = 0 that are feasible for the whole family.
std::vector<Point> surface_points(const ConstraintFamily& family, int i, double t,
                                  int count, std::uint64_t seed) {
  std::vector<Point> out;
  auto anchor = interior_anchor(family, t, seed ^ 0xa17cULL);
  if (!anchor) {
    // No strictly interior point found; the surface may still carry
    // measure (e.g. an equality-thin set). Fall back to near-zero draws.
    HaltonSampler sampler(family.dim(), seed);
    for (int draw = 0; draw < 100 * count && static_cast<int>(out.size()) < count;
         ++draw) {
      Point x = sampler.next(family.sampling_box());
      if (std::abs(family.evaluate(i, t, x)) <= 1e-9 &&
          family.membership(t, x, kActiveTol))
        out.push_back(std::move(x));
    }
    return out;
  }
  if (family.evaluate(i, t, *anchor) >= -1e-14) return out;  // i is tight everywhere
  HaltonSampler sampler(family.dim(), seed);
  const int max_draws = 60 * count;
  for (int draw = 0; draw < max_draws && static_cast<int>(out.size()) < count; ++draw) {
    Point p = sampler.next(family.sampling_box());
    if (family.evaluate(i, t, p) <= 0) continue;
    Point q = bisect_surface(family, i, t, *anchor, p);
    if (family.membership(t, q, kActiveTol)) out.push_back(std::move(q));
  }
  return out;
}

// Points on the kink loci of max pieces (subdifferential endpoints meet)
// intersected with the constraint surface. The margin infimum typically
// lives exactly there, so quasi-random surface sampling alone would report
// an optimistic mu.
std::vector<Point> kink_surface_points(const ConstraintFamily& family, int i,
                                       double t) {
  std::vector<Point> out;
  if (family.dim() != 2) return out;
  std::vector<PieceExpr::TieLine> ties;
  family.piece(i).tie_lines(ties);
  const Box& box = family.sampling_box();
  for (const auto& tie : ties) {
    const double d = -(tie.time_slope * t + tie.offset);
    const double n2 = tie.normal.squaredNorm();
    Point base = tie.normal * (d / n2);
    Point dir = point2(-tie.normal[1], tie.normal[0]);
    dir /= dir.norm();
    const double span = box.diameter();
    // Scan for roots of f_i along the tie line, keeping exact-zero stretches.
    const int grid = 512;
    double prev_s = -span;
    double prev_v = family.evaluate(i, t, base + prev_s * dir);
    for (int k = 1; k <= grid; ++k) {
      const double s = -span + 2.0 * span * k / grid;
      const Point x = base + s * dir;
      const double v = family.evaluate(i, t, x);
      if (std::abs(v) <= 1e-12 && family.membership(t, x, kActiveTol)) {
        out.push_back(x);
      } else if (prev_v * v < 0) {
        Point lo = base + prev_s * dir, hi = x;
        if (prev_v > 0) std::swap(lo, hi);
        Point q = bisect_surface(family, i, t, lo, hi);
        if (family.membership(t, q, kActiveTol)) out.push_back(std::move(q));
      }
      prev_s = s;
      prev_v = v;
    }
  }
  return out;
}

}  // namespace

std::vector<double> check_A1(const ConstraintFamily& family, int sample_budget,
                             std::uint64_t seed) {
  if (sample_budget < 100) throw ConfigError("check_A1: budget must be >= 100");
  const double T = family.horizon();
  const int per_i = std::max(100, sample_budget / family.count());
  HaltonSampler sampler(family.dim() + 2, seed);
  std::vector<double> sup(static_cast<std::size_t>(family.count()), 0.0);
  for (int i = 0; i < family.count(); ++i) {
    for (int k = 0; k < per_i; ++k) {
      Point u = sampler.next01();
      Point x(family.dim());
      const Box& box = family.sampling_box();
      for (int d = 0; d < family.dim(); ++d)
        x[d] = box.lo[d] + u[d] * box.extent(d);
      double s = u[family.dim()] * T;
      double t = u[family.dim() + 1] * T;
      if (std::abs(s - t) < 1e-3 * T) t = std::fmod(t + 0.5 * T, T);
      if (std::abs(s - t) < 1e-9) continue;
      const double ratio =
          std::abs(family.evaluate(i, s, x) - family.evaluate(i, t, x)) /
          std::abs(s - t);
      sup[static_cast<std::size_t>(i)] =
          std::max(sup[static_cast<std::size_t>(i)], ratio);
    }
  }
  return sup;
}

A3Result check_A3(const ConstraintFamily& family, double gamma_candidate,
                  int sample_budget, std::uint64_t seed, double tol) {
  if (!(gamma_candidate > 0)) throw ConfigError("check_A3: gamma must be positive");
  A3Result result;
  const int n_times = 8;
  const int pairs_per_time = std::max(8, sample_budget / (2 * n_times));
  const bool rho_finite = std::isfinite(family.rho());

  for (int ti = 0; ti < n_times; ++ti) {
    const double t = family.horizon() * (ti + 0.5) / n_times;
    std::optional<SetSlice> slice;
    if (rho_finite) slice.emplace(family, t);
    HaltonSampler sampler(family.dim(), seed + static_cast<std::uint64_t>(ti) * 977);

    auto in_enlargement = [&](const Point& x) {
      if (family.membership(t, x, 0.0)) return true;
      if (!rho_finite) return true;
      ProjectionOptions popts;
      popts.tol = 1e-6;
      popts.starts = 2;
      popts.budget = 400;
      try {
        return project_detailed(x, *slice, popts).distance < family.rho();
      } catch (const NonConvergence&) {
        return false;
      }
    };

    std::optional<Point> prev;
    int made = 0;
    for (int draw = 0; draw < 40 * pairs_per_time && made < pairs_per_time; ++draw) {
      Point x = sampler.next(family.sampling_box());
      if (!in_enlargement(x)) continue;
      if (!prev) {
        prev = std::move(x);
        continue;
      }
      Point x1 = *prev, x2 = std::move(x);
      prev.reset();
      ++made;
      const double dist2 = (x1 - x2).squaredNorm();
      if (dist2 < 1e-18) continue;
      for (int i = 0; i < family.count(); ++i) {
        std::vector<Point> g1, g2;
        family.piece(i).generators(t, x1, g1, 1e-12);
        family.piece(i).generators(t, x2, g2, 1e-12);
        const bool convex_piece = family.piece(i).convex();
        for (const auto& xi1 : g1) {
          for (const auto& xi2 : g2) {
            const double lhs = (xi1 - xi2).dot(x1 - x2);
            const double slack = tol * (1.0 + dist2);
            const double floor_rhs =
                convex_piece ? -slack : -gamma_candidate * dist2 - slack;
            if (lhs < floor_rhs) {
              AssumptionViolation v;
              v.assumption = "A3";
              v.t = t;
              v.x1 = x1;
              v.x2 = x2;
              v.lhs = lhs;
              v.rhs = convex_piece ? 0.0 : -gamma_candidate * dist2;
              v.detail = convex_piece ? "monotonicity of a convex piece failed"
                                      : "hypomonotonicity failed";
              result.violations.push_back(std::move(v));
              result.pass = false;
              if (result.violations.size() >= 16) return result;
            }
          }
        }
      }
    }
  }
  return result;
}

std::pair<double, Point> descent_direction(const ConstraintFamily& family, double t,
                                           const Point& x, double active_tol) {
  return best_direction(active_generators(family, t, x, active_tol), family.dim());
}

A4Result check_A4(const ConstraintFamily& family, int sample_budget,
                  std::uint64_t seed) {
  if (sample_budget < 100) throw ConfigError("check_A4: budget must be >= 100");
  A4Result result;
  result.mu_est = kInfinity;

  const int n_times = 16;
  const int per_constraint =
      std::max(8, sample_budget / (n_times * family.count()));
  for (int ti = 0; ti < n_times; ++ti) {
    const double t = family.horizon() * (ti + 0.5) / n_times;
    for (int i = 0; i < family.count(); ++i) {
      auto pts = surface_points(family, i, t, per_constraint,
                                seed + static_cast<std::uint64_t>(ti) * 131 +
                                    static_cast<std::uint64_t>(i));
      auto kinks = kink_surface_points(family, i, t);
      pts.insert(pts.end(), kinks.begin(), kinks.end());
      for (const auto& x : pts) {
        auto [delta, v] = best_direction(active_generators(family, t, x, kActiveTol),
                                         family.dim());
        if (delta <= 0)
          throw InfeasibleDirection(
              "A4 refuted: no unit direction with positive margin at t = " +
                  std::to_string(t),
              t, x);
        if (delta < result.mu_est) {
          result.mu_est = delta;
          VbarWitness w;
          w.t = t;
          w.x = x;
          w.v = v;
          w.margin = delta;
          result.witnesses.insert(result.witnesses.begin(), std::move(w));
          if (result.witnesses.size() > 32) result.witnesses.pop_back();
        }
      }
    }
  }
  return result;
}

AssumptionReport certify_family(const ConstraintFamily& family, double gamma_candidate,
                                int sample_budget, std::uint64_t seed) {
  AssumptionReport report;
  report.budget = sample_budget;
  report.gamma_candidate = gamma_candidate;

  report.L1_per_constraint = check_A1(family, sample_budget, seed);
  report.L1_est =
      *std::max_element(report.L1_per_constraint.begin(), report.L1_per_constraint.end());
  report.a1_pass = true;
  report.a2_recorded = true;

  A3Result a3 = check_A3(family, gamma_candidate, sample_budget, seed + 1);
  report.a3_pass = a3.pass;
  for (auto& v : a3.violations) report.violations.push_back(std::move(v));

  try {
    A4Result a4 = check_A4(family, sample_budget, seed + 2);
    report.mu_est = a4.mu_est;
    report.vbar_witnesses = std::move(a4.witnesses);
    report.a4_pass = true;
  } catch (const InfeasibleDirection& e) {
    report.a4_pass = false;
    AssumptionViolation v;
    v.assumption = "A4";
    v.t = e.time;
    v.x1 = e.at;
    v.detail = e.what();
    report.violations.push_back(std::move(v));
  }
  return report;
}

ProxCertificate make_certificate(const ConstraintFamily& family,
                                 const AssumptionReport& report) {
  if (!report.all_passed())
    throw ConfigError("make_certificate: assumption report has violations");
  const ConstraintFamily* fam = &family;
  auto vbar = [fam](double t, const Point& x) {
    return descent_direction(*fam, t, x, 1e-6).second;
  };
  return ProxCertificate::make(family.rho(), report.L1_est, report.gamma_candidate,
                               report.mu_est, vbar);
}

}  // namespace sweepsim
