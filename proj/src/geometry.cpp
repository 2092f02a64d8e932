#include "sweepsim/geometry.hpp"

#include "sweepsim/sampling.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace sweepsim {

ProxCertificate ProxCertificate::make(double rho, double L1, double gamma, double mu,
                                      std::function<Point(double, const Point&)> vbar) {
  if (!(rho > 0) || !(L1 >= 0) || !(gamma > 0) || !(mu > 0))
    throw ConfigError("certificate: constants must be positive (L1 >= 0)");
  ProxCertificate c;
  c.rho = rho;
  c.L1 = L1;
  c.gamma = gamma;
  c.mu = mu;
  c.r = std::min(rho, mu / gamma);
  c.theta = L1 / mu;
  c.vbar_field = std::move(vbar);
  return c;
}

double prox_radius(const ProxCertificate& cert) {
  if (!(cert.rho > 0) || !(cert.mu > 0) || !(cert.gamma > 0))
    throw ConfigError("prox_radius: certificate fields must be positive");
  return std::min(cert.rho, cert.mu / cert.gamma);
}

namespace {

// ---------------------------------------------------------------------------
// Exact projection onto an intersection of half-planes by enumerating
// active subsets of size <= n. The projection of p onto a nonempty
// polyhedron is the least-squares foot on the affine hull of some
// full-rank active subset, so scanning all subsets and keeping the nearest
// feasible candidate is exact. An empty candidate list certifies an empty
// polyhedron (any feasible candidate would witness nonemptiness).
// ---------------------------------------------------------------------------

struct Candidate {
  Point y;
  double dist;
};

bool feasible(const std::vector<HalfPlane>& planes, const Point& y, double eps) {
  for (const auto& hp : planes)
    if (hp.violation(y) > eps) return false;
  return true;
}

void enumerate_subsets(const std::vector<HalfPlane>& planes, const Point& p,
                       int max_size, std::vector<Candidate>& out) {
  const int m = static_cast<int>(planes.size());
  const int n = static_cast<int>(p.size());
  const double feas_eps = 1e-10 * (1.0 + p.norm());

  std::vector<int> subset;
  // Iterative enumeration of index subsets of size 1..max_size.
  std::function<void(int)> rec = [&](int start) {
    if (!subset.empty()) {
      const int k = static_cast<int>(subset.size());
      Eigen::MatrixXd A(k, n);
      Eigen::VectorXd b(k);
      for (int r = 0; r < k; ++r) {
        A.row(r) = planes[static_cast<std::size_t>(subset[static_cast<std::size_t>(r)])].normal;
        b[r] = planes[static_cast<std::size_t>(subset[static_cast<std::size_t>(r)])].rhs;
      }
      Eigen::MatrixXd G = A * A.transpose();
      Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
      lu.setThreshold(1e-12);
      if (lu.isInvertible()) {
        Eigen::VectorXd lambda = lu.solve(A * p - b);
        Point y = p - A.transpose() * lambda;
        if (feasible(planes, y, feas_eps + 1e-10 * y.norm()))
          out.push_back({std::move(y), 0.0});
      }
    }
    if (static_cast<int>(subset.size()) == max_size) return;
    for (int i = start; i < m; ++i) {
      subset.push_back(i);
      rec(i + 1);
      subset.pop_back();
    }
  };
  rec(0);
  for (auto& c : out) c.dist = (c.y - p).norm();
}

ProjectionResult pick_result(std::vector<Candidate> candidates, double tol,
                             double prox_r) {
  if (candidates.empty())
    throw InfeasibleSlice("projection: no feasible candidate (empty slice?)");
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.dist < b.dist; });
  const double best = candidates.front().dist;

  // Collect the near-optimal candidates, deduplicated.
  std::vector<Point> near;
  for (const auto& c : candidates) {
    if (c.dist > best + tol) break;
    bool dup = false;
    for (const auto& q : near)
      if ((q - c.y).norm() <= 10.0 * tol) { dup = true; break; }
    if (!dup) near.push_back(c.y);
  }

  ProjectionResult res;
  res.distance = best;
  res.candidates = near;
  double separation = 0.0;
  for (std::size_t i = 0; i < near.size(); ++i)
    for (std::size_t j = i + 1; j < near.size(); ++j)
      separation = std::max(separation, (near[i] - near[j]).norm());
  res.ambiguous = separation > 10.0 * tol && best > prox_r;

  Point pick = near.front();
  for (const auto& q : near)
    if (lexicographic_less(q, pick)) pick = q;
  res.point = std::move(pick);
  return res;
}

// ---------------------------------------------------------------------------
// Iterative fallback: multi-start proximal-gradient descent on
//   phi(y) = 1/2 |y - p|^2 + kappa * sum_i max(0, f_i(t, y))^2
// with penalty continuation, then a Gauss-Newton polish on the locally
// active constraints (exact subset projection when they are all affine).
// ---------------------------------------------------------------------------

struct ActiveAtom {
  bool is_affine = false;
  Point normal;  // affine
  double rhs = 0.0;
  int piece = -1;  // smooth: constraint index
};

double penalty_value(const ConstraintFamily& fam, double t, const Point& y,
                     double kappa, const Point& p) {
  double pen = 0.0;
  for (int i = 0; i < fam.count(); ++i) {
    const double v = fam.evaluate(i, t, y);
    if (v > 0) pen += v * v;
  }
  return 0.5 * (y - p).squaredNorm() + kappa * pen;
}

Point penalty_grad(const ConstraintFamily& fam, double t, const Point& y,
                   double kappa, const Point& p) {
  Point g = y - p;
  std::vector<Point> gens;
  for (int i = 0; i < fam.count(); ++i) {
    const double v = fam.evaluate(i, t, y);
    if (v > 0) {
      gens.clear();
      fam.piece(i).generators(t, y, gens, 1e-12);
      g += 2.0 * kappa * v * gens.front();
    }
  }
  return g;
}

// Gauss-Newton iterations on the KKT system of
//   min 1/2 |y - p|^2  s.t.  g_a(y) = 0 for the active atoms.
// Curvature of the constraints is dropped; near a regular projection this
// still reaches ~1e-12 in a handful of iterations.
bool kkt_polish(const ConstraintFamily& fam, double t, const Point& p, Point& y,
                double active_tol) {
  const int n = static_cast<int>(p.size());
  for (int iter = 0; iter < 40; ++iter) {
    std::vector<Point> grads;
    std::vector<double> vals;
    for (int i = 0; i < fam.count(); ++i) {
      const double v = fam.evaluate(i, t, y);
      if (std::abs(v) <= active_tol || v > 0) {
        std::vector<Point> gens;
        fam.piece(i).generators(t, y, gens, 1e-10);
        // At a kink every active child contributes its own atom.
        if (gens.size() > 1 && fam.piece(i).polyhedral()) {
          std::vector<HalfPlane> hps;
          fam.piece(i).halfplanes(t, hps);
          for (const auto& hp : hps) {
            const double hv = hp.violation(y);
            if (std::abs(hv) <= active_tol || hv > 0) {
              grads.push_back(hp.normal);
              vals.push_back(hv);
            }
          }
        } else {
          grads.push_back(gens.front());
          vals.push_back(v);
        }
      }
    }
    if (grads.empty()) return true;  // interior; y == p expected upstream
    const int k = static_cast<int>(grads.size());
    Eigen::MatrixXd A(k, n);
    Eigen::VectorXd c(k);
    for (int r = 0; r < k; ++r) {
      A.row(r) = grads[static_cast<std::size_t>(r)];
      c[r] = vals[static_cast<std::size_t>(r)];
    }
    // Solve [I A^T; A 0] [dy; lambda] = [p - y; -c] via the Schur
    // complement A A^T lambda = A (p - y) + c.
    Eigen::MatrixXd G = A * A.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) return false;
    Eigen::VectorXd lambda = lu.solve(A * (p - y) + c);
    Point dy = (p - y) - A.transpose() * lambda;
    y += dy;
    if (dy.norm() <= 1e-13 * (1.0 + y.norm())) break;
  }
  return true;
}

ProjectionResult project_iterative(const Point& p, const SetSlice& slice,
                                   const ProjectionOptions& opts, double prox_r) {
  const ConstraintFamily& fam = slice.family();
  const double t = slice.time();
  const double tol = std::max(opts.tol, 1e-6);
  const int per_start = std::max(1, opts.budget / std::max(1, opts.starts));

  std::vector<Point> starts;
  starts.push_back(p);
  if (opts.starts >= 2) starts.push_back(slice.witness());
  HaltonSampler sampler(fam.dim(), splitmix64(opts.seed) ^ 0x5eed5eedULL);
  while (static_cast<int>(starts.size()) < opts.starts)
    starts.push_back(sampler.next(fam.sampling_box()));

  std::vector<Candidate> candidates;
  int iterations = 0;
  for (const auto& s : starts) {
    Point y = s;
    double kappa = 10.0;
    double step = 0.5;
    for (int it = 0; it < per_start; ++it) {
      ++iterations;
      Point g = penalty_grad(fam, t, y, kappa, p);
      double phi = penalty_value(fam, t, y, kappa, p);
      Point y_try = y - step * g;
      // Backtracking; give up on the step when it stalls.
      int bt = 0;
      while (penalty_value(fam, t, y_try, kappa, p) > phi && bt < 30) {
        step *= 0.5;
        y_try = y - step * g;
        ++bt;
      }
      if (bt == 30) {
        kappa *= 4.0;
        step = 0.5;
        continue;
      }
      y = y_try;
      step = std::min(step * 1.3, 0.5);
      const double infeas = std::max(0.0, fam.max_value(t, y));
      if (infeas < tol && g.norm() < tol * (1.0 + y.norm())) break;
      if ((it + 1) % 50 == 0 && infeas > tol) kappa *= 4.0;
    }
    // The polish is a local refinement; a start whose descent never got
    // near the set is discarded rather than rescued.
    if (fam.max_value(t, y) > 0.1 * (1.0 + y.norm())) continue;
    if (!kkt_polish(fam, t, p, y, 1e-6)) continue;
    if (fam.membership(t, y, 10.0 * tol)) candidates.push_back({y, (y - p).norm()});
  }
  if (candidates.empty())
    throw NonConvergence("projection: iteration budget exhausted without a feasible point");
  ProjectionResult res = pick_result(std::move(candidates), tol, prox_r);
  res.iterations = iterations;
  return res;
}

double resolve_prox_radius(const SetSlice& slice, const ProjectionOptions& opts) {
  if (opts.prox_radius) return *opts.prox_radius;
  if (auto hint = slice.family().prox_radius_hint()) return *hint;
  return kInfinity;  // unknown tube: never report ambiguity
}

}  // namespace

SetSlice::SetSlice(const ConstraintFamily& family, double time)
    : family_(&family), time_(time) {
  family.check_time(time);
  // Nonemptiness probe: find any feasible point, preferring the box center.
  Point center = 0.5 * (family.sampling_box().lo + family.sampling_box().hi);
  if (family.membership(time, center, 1e-9)) {
    witness_ = std::move(center);
    return;
  }
  if (family.polyhedral()) {
    std::vector<HalfPlane> planes;
    family.halfplanes(time, planes);
    std::vector<Candidate> cands;
    enumerate_subsets(planes, center, family.dim(), cands);
    if (cands.empty())
      throw InfeasibleSlice("slice at t = " + std::to_string(time) + " is empty");
    witness_ = cands.front().y;
    return;
  }
  // General probe: quasi-random search, then a penalized descent from the
  // best point found.
  HaltonSampler sampler(family.dim(), 0x51edULL);
  Point best = center;
  double best_v = family.max_value(time, center);
  for (int i = 0; i < 512; ++i) {
    Point x = sampler.next(family.sampling_box());
    const double v = family.max_value(time, x);
    if (v < best_v) {
      best_v = v;
      best = x;
      if (v <= 0) break;
    }
  }
  if (best_v > 0) {
    ProjectionOptions popts;
    popts.force_iterative = true;
    SetSlice tmp(*this);
    tmp.witness_ = best;  // placeholder for the fallback's start list
    try {
      ProjectionResult r = project_iterative(best, tmp, popts, kInfinity);
      best = r.point;
      best_v = family.max_value(time, best);
    } catch (const NonConvergence&) {
    }
  }
  if (best_v > 1e-6)
    throw InfeasibleSlice("slice at t = " + std::to_string(time) +
                          ": no feasible point found");
  witness_ = best;
}

ProjectionResult project_detailed(const Point& p, const SetSlice& slice,
                                  const ProjectionOptions& opts) {
  const ConstraintFamily& fam = slice.family();
  const double t = slice.time();
  const double prox_r = resolve_prox_radius(slice, opts);

  if (fam.membership(t, p, 0.0)) {
    ProjectionResult res;
    res.point = p;
    res.distance = 0.0;
    res.candidates = {p};
    return res;
  }

  if (fam.polyhedral() && !opts.force_iterative) {
    std::vector<HalfPlane> planes;
    fam.halfplanes(t, planes);
    std::vector<Candidate> cands;
    enumerate_subsets(planes, p, std::min<int>(fam.dim(), static_cast<int>(planes.size())),
                      cands);
    return pick_result(std::move(cands), opts.tol, prox_r);
  }
  return project_iterative(p, slice, opts, prox_r);
}

Point project(const Point& p, const SetSlice& slice, double tol) {
  ProjectionOptions opts;
  opts.tol = tol;
  return project_detailed(p, slice, opts).point;
}

double distance(const Point& p, const SetSlice& slice, double tol) {
  if (slice.contains(p, tol)) return 0.0;
  ProjectionOptions opts;
  opts.tol = tol;
  return project_detailed(p, slice, opts).distance;
}

double proximal_normal_residual(const Point& x, const Point& v, const SetSlice& slice,
                                double r, int samples, std::uint64_t seed,
                                double member_tol) {
  if (v.norm() == 0.0) throw ConfigError("proximal_normal_residual: v must be nonzero");
  if (!(r > 0)) throw ConfigError("proximal_normal_residual: r must be positive");

  const ConstraintFamily& fam = slice.family();
  const Box& box = fam.sampling_box();
  const double radius = std::min(r / 2.0, box.diameter());

  Box ball_box;
  ball_box.lo = x.array() - radius;
  ball_box.hi = x.array() + radius;
  for (int k = 0; k < fam.dim(); ++k) {
    ball_box.lo[k] = std::max(ball_box.lo[k], box.lo[k]);
    ball_box.hi[k] = std::min(ball_box.hi[k], box.hi[k]);
    if (ball_box.lo[k] >= ball_box.hi[k]) {
      // Degenerate overlap; widen to the raw ball so EmptySample semantics
      // stay meaningful for points outside the box.
      ball_box.lo[k] = x[k] - radius;
      ball_box.hi[k] = x[k] + radius;
    }
  }

  HaltonSampler sampler(fam.dim(), seed);
  const double vnorm = v.norm();
  const double quad = vnorm / (2.0 * r);
  double best = -kInfinity;
  int accepted = 0;
  const int max_draws = 50 * samples;
  for (int draw = 0; draw < max_draws && accepted < samples; ++draw) {
    Point xp = sampler.next(ball_box);
    if ((xp - x).norm() > radius) continue;
    if (!fam.membership(slice.time(), xp, member_tol)) continue;
    ++accepted;
    const double val = v.dot(xp - x) - quad * (xp - x).squaredNorm();
    best = std::max(best, val);
  }
  if (accepted == 0)
    throw EmptySample("proximal_normal_residual: no feasible sample near x");
  return best;
}

std::vector<Point> sample_slice(const SetSlice& slice, int count, std::uint64_t seed,
                                double member_tol) {
  const ConstraintFamily& fam = slice.family();
  HaltonSampler sampler(fam.dim(), seed);
  std::vector<Point> out;
  const int max_draws = 200 * count;
  for (int draw = 0; draw < max_draws && static_cast<int>(out.size()) < count; ++draw) {
    Point x = sampler.next(fam.sampling_box());
    if (fam.membership(slice.time(), x, member_tol)) out.push_back(std::move(x));
  }
  return out;
}

std::vector<Point> sample_boundary(const SetSlice& slice, int count, std::uint64_t seed,
                                   double tol) {
  const ConstraintFamily& fam = slice.family();
  HaltonSampler sampler(fam.dim(), splitmix64(seed));
  ProjectionOptions opts;
  opts.tol = tol;
  std::vector<Point> out;
  const int max_draws = 60 * count;
  for (int draw = 0; draw < max_draws && static_cast<int>(out.size()) < count; ++draw) {
    Point p = sampler.next(fam.sampling_box());
    if (fam.membership(slice.time(), p, 0.0)) continue;  // want outside points
    ProjectionResult r = project_detailed(p, slice, opts);
    if (r.distance > tol) out.push_back(std::move(r.point));
  }
  return out;
}

HausdorffReport hausdorff_check(const ConstraintFamily& family,
                                const ProxCertificate& cert,
                                const std::vector<std::pair<double, double>>& time_pairs,
                                double tol, int samples_per_slice, std::uint64_t seed) {
  if (cert.theta + 1e-12 < cert.L1 / cert.mu)
    throw ConfigError("hausdorff_check: theta below L1 / mu");

  HausdorffReport report;
  for (const auto& [s, t] : time_pairs) {
    HausdorffRow row;
    row.s = s;
    row.t = t;
    row.bound = cert.theta * std::abs(t - s);
    if (s == t) {
      row.estimate = 0.0;
      row.ratio = 0.0;
      row.within = true;
      report.rows.push_back(row);
      continue;
    }
    SetSlice slice_s(family, s);
    SetSlice slice_t(family, t);

    auto one_sided = [&](const SetSlice& from, const SetSlice& to,
                         std::uint64_t sub_seed) {
      double sup = 0.0;
      auto boundary = sample_boundary(from, samples_per_slice / 2, sub_seed);
      auto inner = sample_slice(from, samples_per_slice / 2, sub_seed + 7);
      boundary.insert(boundary.end(), inner.begin(), inner.end());
      for (const auto& x : boundary) sup = std::max(sup, distance(x, to));
      return sup;
    };
    row.estimate = std::max(one_sided(slice_s, slice_t, seed),
                            one_sided(slice_t, slice_s, seed + 13));
    row.within = row.estimate <= row.bound + tol;
    row.ratio = row.bound > 0 ? row.estimate / row.bound : 0.0;
    report.worst_ratio = std::max(report.worst_ratio, row.ratio);
    report.passed = report.passed && row.within;
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace sweepsim
