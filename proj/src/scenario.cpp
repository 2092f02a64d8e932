#include "sweepsim/scenario.hpp"

#include "sweepsim/oracles.hpp"

#include <fstream>
#include <set>

namespace sweepsim {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& context) {
  if (!j.is_object()) throw ScenarioError(context + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ScenarioError(context + ": unknown key '" + it.key() + "'");
}

double require_number(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key) || !j[key].is_number())
    throw ScenarioError(ctx + ": missing numeric '" + key + "'");
  return j[key].get<double>();
}

std::vector<double> require_vector(const json& j, const std::string& key,
                                   const std::string& ctx) {
  if (!j.contains(key) || !j[key].is_array())
    throw ScenarioError(ctx + ": missing array '" + key + "'");
  std::vector<double> out;
  for (const auto& v : j[key]) {
    if (!v.is_number()) throw ScenarioError(ctx + ": '" + key + "' must be numeric");
    out.push_back(v.get<double>());
  }
  return out;
}

PieceDecl piece_from_json(const json& j);

json piece_to_json(const PieceDecl& p) {
  json j;
  switch (p.kind) {
    case PieceDecl::Kind::Affine:
      j["kind"] = "affine";
      j["a"] = p.a;
      j["time_slope"] = p.time_slope;
      j["offset"] = p.offset;
      break;
    case PieceDecl::Kind::MaxOf: {
      j["kind"] = "max";
      json parts = json::array();
      for (const auto& c : p.parts) parts.push_back(piece_to_json(c));
      j["parts"] = std::move(parts);
      break;
    }
    case PieceDecl::Kind::BallComplement:
      j["kind"] = "ball_complement";
      j["center"] = p.center;
      j["radius"] = p.radius;
      break;
  }
  return j;
}

PieceDecl piece_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw ScenarioError("constraint piece: missing 'kind'");
  const std::string kind = j["kind"].get<std::string>();
  PieceDecl p;
  if (kind == "affine") {
    check_keys(j, {"kind", "a", "time_slope", "offset"}, "affine piece");
    p.kind = PieceDecl::Kind::Affine;
    p.a = require_vector(j, "a", "affine piece");
    p.time_slope = require_number(j, "time_slope", "affine piece");
    p.offset = require_number(j, "offset", "affine piece");
  } else if (kind == "max") {
    check_keys(j, {"kind", "parts"}, "max piece");
    if (!j.contains("parts") || !j["parts"].is_array() || j["parts"].empty())
      throw ScenarioError("max piece: needs nonempty 'parts'");
    p.kind = PieceDecl::Kind::MaxOf;
    for (const auto& c : j["parts"]) p.parts.push_back(piece_from_json(c));
  } else if (kind == "ball_complement") {
    check_keys(j, {"kind", "center", "radius"}, "ball_complement piece");
    p.kind = PieceDecl::Kind::BallComplement;
    p.center = require_vector(j, "center", "ball_complement piece");
    p.radius = require_number(j, "radius", "ball_complement piece");
    if (!(p.radius > 0)) throw ScenarioError("ball_complement: radius must be > 0");
  } else {
    throw ScenarioError("constraint piece: unknown kind '" + kind + "'");
  }
  return p;
}

}  // namespace

PieceExpr PieceDecl::build() const {
  switch (kind) {
    case Kind::Affine: {
      Point g(static_cast<int>(a.size()));
      for (std::size_t i = 0; i < a.size(); ++i) g[static_cast<int>(i)] = a[i];
      return PieceExpr::affine(std::move(g), time_slope, offset);
    }
    case Kind::MaxOf: {
      std::vector<PieceExpr> children;
      children.reserve(parts.size());
      for (const auto& c : parts) children.push_back(c.build());
      return PieceExpr::max_of(std::move(children));
    }
    case Kind::BallComplement: {
      Point c(static_cast<int>(center.size()));
      for (std::size_t i = 0; i < center.size(); ++i) c[static_cast<int>(i)] = center[i];
      return PieceExpr::ball_complement(std::move(c), radius);
    }
  }
  throw ScenarioError("constraint piece: bad kind");
}

ConstraintFamily FamilyDecl::build() const {
  std::vector<PieceExpr> pieces;
  pieces.reserve(constraints.size());
  for (const auto& c : constraints) pieces.push_back(c.build());
  std::optional<Box> box;
  if (!box_lo.empty()) {
    Box b;
    b.lo = Point(static_cast<int>(box_lo.size()));
    b.hi = Point(static_cast<int>(box_hi.size()));
    for (std::size_t i = 0; i < box_lo.size(); ++i) {
      b.lo[static_cast<int>(i)] = box_lo[i];
      b.hi[static_cast<int>(i)] = box_hi[i];
    }
    box = std::move(b);
  }
  ConstraintFamily fam(dim, horizon, std::move(pieces), rho, box);
  fam.set_gamma_candidate(gamma);
  return fam;
}

Perturbation PerturbationDecl::build(int dim) const {
  switch (kind) {
    case Perturbation::Kind::Zero:
      return Perturbation::zero(dim);
    case Perturbation::Kind::GravityLinear:
      return Perturbation::gravity(dim, g0);
    case Perturbation::Kind::AffineTable: {
      std::vector<Point> vals;
      vals.reserve(values.size());
      for (const auto& v : values) {
        Point p(static_cast<int>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) p[static_cast<int>(i)] = v[i];
        vals.push_back(std::move(p));
      }
      return Perturbation::affine_table(times, std::move(vals));
    }
  }
  return Perturbation::zero(dim);
}

Point Scenario::initial_point() const {
  if (has_sampler())
    throw ScenarioError("scenario '" + name + "' samples x0; a single point is required");
  const auto& v = std::get<std::vector<double>>(x0);
  Point p(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p[static_cast<int>(i)] = v[i];
  return p;
}

SweepingProblem Scenario::build_problem() const { return build_problem(initial_point()); }

SweepingProblem Scenario::build_problem(const Point& start) const {
  ConstraintFamily fam = family.build();
  Perturbation pert = perturbation.build(fam.dim());
  return SweepingProblem{std::move(fam), std::move(pert), start, family.horizon};
}

SolverOptions Scenario::build_solver_options() const {
  SolverOptions opts;
  opts.n_steps = solver.n_steps;
  opts.projection_tol = solver.tol;
  opts.seed = solver.seed;
  return opts;
}

std::optional<OracleFn> Scenario::oracle_fn() const {
  if (has_sampler()) return std::nullopt;
  return oracle_fn(initial_point());
}

std::optional<OracleFn> Scenario::oracle_fn(const Point& start) const {
  const double T = family.horizon;
  if (oracle == "example1") return OracleFn([](double t) { return oracles::example1(t); });
  if (oracle == "example2")
    return OracleFn([start, T](double t) { return oracles::example2(start, t, T); });
  if (oracle == "example3") {
    const double g0 = perturbation.g0;
    return OracleFn(
        [start, T, g0](double t) { return oracles::example3(start, t, T, g0); });
  }
  if (oracle == "example4")
    // The lid never binds along the solution, so the full path coincides
    // with the uncapped drift solution; the endpoint oracle pins x(T).
    return OracleFn([start, T](double t) { return oracles::example2(start, t, T); });
  return std::nullopt;
}

Scenario scenario_from_json(const json& j) {
  check_keys(j, {"name", "family", "perturbation", "x0", "solver", "oracle", "outputs"},
             "scenario");
  Scenario s;
  if (!j.contains("name") || !j["name"].is_string())
    throw ScenarioError("scenario: missing 'name'");
  s.name = j["name"].get<std::string>();

  if (!j.contains("family")) throw ScenarioError("scenario: missing 'family'");
  const json& fam = j["family"];
  check_keys(fam, {"dim", "horizon", "rho", "gamma", "box", "constraints"}, "family");
  s.family.dim = static_cast<int>(require_number(fam, "dim", "family"));
  s.family.horizon = require_number(fam, "horizon", "family");
  if (fam.contains("rho")) {
    if (fam["rho"].is_string()) {
      if (fam["rho"].get<std::string>() != "inf")
        throw ScenarioError("family: rho must be a number or \"inf\"");
      s.family.rho = kInfinity;
    } else if (fam["rho"].is_number()) {
      s.family.rho = fam["rho"].get<double>();
    } else {
      throw ScenarioError("family: rho must be a number or \"inf\"");
    }
  }
  if (fam.contains("gamma")) s.family.gamma = require_number(fam, "gamma", "family");
  if (fam.contains("box")) {
    check_keys(fam["box"], {"lo", "hi"}, "family.box");
    s.family.box_lo = require_vector(fam["box"], "lo", "family.box");
    s.family.box_hi = require_vector(fam["box"], "hi", "family.box");
    if (s.family.box_lo.size() != s.family.box_hi.size())
      throw ScenarioError("family.box: lo/hi size mismatch");
  }
  if (!fam.contains("constraints") || !fam["constraints"].is_array() ||
      fam["constraints"].empty())
    throw ScenarioError("family: needs a nonempty 'constraints' array");
  for (const auto& c : fam["constraints"])
    s.family.constraints.push_back(piece_from_json(c));

  if (!j.contains("perturbation")) throw ScenarioError("scenario: missing 'perturbation'");
  const json& pert = j["perturbation"];
  check_keys(pert, {"kind", "g0", "times", "values"}, "perturbation");
  if (!pert.contains("kind") || !pert["kind"].is_string())
    throw ScenarioError("perturbation: missing 'kind'");
  const std::string pk = pert["kind"].get<std::string>();
  if (pk == "zero") {
    s.perturbation.kind = Perturbation::Kind::Zero;
  } else if (pk == "gravity") {
    s.perturbation.kind = Perturbation::Kind::GravityLinear;
    s.perturbation.g0 = require_number(pert, "g0", "perturbation");
  } else if (pk == "affine_table") {
    s.perturbation.kind = Perturbation::Kind::AffineTable;
    s.perturbation.times = require_vector(pert, "times", "perturbation");
    if (!pert.contains("values") || !pert["values"].is_array())
      throw ScenarioError("perturbation: missing 'values'");
    for (const auto& row : pert["values"]) {
      std::vector<double> v;
      for (const auto& e : row) v.push_back(e.get<double>());
      s.perturbation.values.push_back(std::move(v));
    }
  } else {
    throw ScenarioError("perturbation: unknown kind '" + pk + "'");
  }

  if (!j.contains("x0")) throw ScenarioError("scenario: missing 'x0'");
  const json& x0 = j["x0"];
  check_keys(x0, {"point", "sampler"}, "x0");
  if (x0.contains("point") == x0.contains("sampler"))
    throw ScenarioError("x0: exactly one of 'point' or 'sampler' required");
  if (x0.contains("point")) {
    s.x0 = require_vector(x0, "point", "x0");
  } else {
    check_keys(x0["sampler"], {"count"}, "x0.sampler");
    SamplerDecl sampler;
    sampler.count = static_cast<int>(require_number(x0["sampler"], "count", "x0.sampler"));
    if (sampler.count < 1) throw ScenarioError("x0.sampler: count must be >= 1");
    s.x0 = sampler;
  }

  if (j.contains("solver")) {
    const json& sol = j["solver"];
    check_keys(sol, {"n_steps", "tol", "seed"}, "solver");
    if (sol.contains("n_steps"))
      s.solver.n_steps = static_cast<int>(require_number(sol, "n_steps", "solver"));
    if (sol.contains("tol")) s.solver.tol = require_number(sol, "tol", "solver");
    if (sol.contains("seed"))
      s.solver.seed = static_cast<std::uint64_t>(require_number(sol, "seed", "solver"));
  }

  if (j.contains("oracle")) {
    if (!j["oracle"].is_string()) throw ScenarioError("scenario: 'oracle' must be a string");
    s.oracle = j["oracle"].get<std::string>();
    static const std::set<std::string> known = {"none", "example1", "example2",
                                                "example3", "example4"};
    if (!known.count(s.oracle))
      throw ScenarioError("scenario: unknown oracle '" + s.oracle + "'");
  }

  if (j.contains("outputs")) {
    if (!j["outputs"].is_array()) throw ScenarioError("scenario: 'outputs' must be an array");
    static const std::set<std::string> known_artifacts = {"trajectory", "residuals",
                                                          "metadata", "endpoints"};
    std::vector<std::string> outs;
    for (const auto& o : j["outputs"]) {
      if (!o.is_string() || !known_artifacts.count(o.get<std::string>()))
        throw ScenarioError("scenario: unknown output artifact");
      outs.push_back(o.get<std::string>());
    }
    s.outputs = std::move(outs);
  }
  return s;
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  json fam;
  fam["dim"] = s.family.dim;
  fam["horizon"] = s.family.horizon;
  if (std::isfinite(s.family.rho))
    fam["rho"] = s.family.rho;
  else
    fam["rho"] = "inf";
  fam["gamma"] = s.family.gamma;
  if (!s.family.box_lo.empty())
    fam["box"] = {{"lo", s.family.box_lo}, {"hi", s.family.box_hi}};
  json constraints = json::array();
  for (const auto& c : s.family.constraints) constraints.push_back(piece_to_json(c));
  fam["constraints"] = std::move(constraints);
  j["family"] = std::move(fam);

  json pert;
  switch (s.perturbation.kind) {
    case Perturbation::Kind::Zero:
      pert["kind"] = "zero";
      break;
    case Perturbation::Kind::GravityLinear:
      pert["kind"] = "gravity";
      pert["g0"] = s.perturbation.g0;
      break;
    case Perturbation::Kind::AffineTable:
      pert["kind"] = "affine_table";
      pert["times"] = s.perturbation.times;
      pert["values"] = s.perturbation.values;
      break;
  }
  j["perturbation"] = std::move(pert);

  json x0;
  if (s.has_sampler())
    x0["sampler"] = {{"count", s.sampler().count}};
  else
    x0["point"] = std::get<std::vector<double>>(s.x0);
  j["x0"] = std::move(x0);

  j["solver"] = {{"n_steps", s.solver.n_steps},
                 {"tol", s.solver.tol},
                 {"seed", static_cast<double>(s.solver.seed)}};
  j["oracle"] = s.oracle;
  if (s.outputs) j["outputs"] = *s.outputs;
  return j;
}

namespace {

const char* kExample1 = R"json({
  "name": "example1",
  "family": {
    "dim": 2,
    "horizon": 3.0,
    "rho": "inf",
    "gamma": 1e-6,
    "box": {"lo": [-4.0, -2.0], "hi": [4.0, 5.0]},
    "constraints": [
      {"kind": "max", "parts": [
        {"kind": "affine", "a": [1.0, -1.0], "time_slope": 1.0, "offset": 0.0},
        {"kind": "affine", "a": [-1.0, -1.0], "time_slope": 1.0, "offset": 0.0}
      ]}
    ]
  },
  "perturbation": {"kind": "zero"},
  "x0": {"point": [0.0, 0.0]},
  "solver": {"n_steps": 1000, "tol": 1e-9, "seed": 1},
  "oracle": "example1"
})json";

const char* kExample2Interior = R"json({
  "name": "example2-interior",
  "family": {
    "dim": 2,
    "horizon": 3.0,
    "rho": "inf",
    "gamma": 1e-6,
    "box": {"lo": [-4.0, -2.0], "hi": [4.0, 5.0]},
    "constraints": [
      {"kind": "max", "parts": [
        {"kind": "affine", "a": [1.0, -1.0], "time_slope": 1.0, "offset": 0.0},
        {"kind": "affine", "a": [-1.0, -1.0], "time_slope": 1.0, "offset": 0.0}
      ]}
    ]
  },
  "perturbation": {"kind": "zero"},
  "x0": {"point": [0.5, 1.0]},
  "solver": {"n_steps": 3000, "tol": 1e-9, "seed": 1},
  "oracle": "example2"
})json";

const char* kExample3 = R"json({
  "name": "example3",
  "family": {
    "dim": 2,
    "horizon": 1.0,
    "rho": "inf",
    "gamma": 1e-6,
    "box": {"lo": [-3.0, -2.0], "hi": [3.0, 3.0]},
    "constraints": [
      {"kind": "max", "parts": [
        {"kind": "affine", "a": [1.0, -1.0], "time_slope": 1.0, "offset": 0.0},
        {"kind": "affine", "a": [-1.0, -1.0], "time_slope": 1.0, "offset": 0.0}
      ]}
    ]
  },
  "perturbation": {"kind": "gravity", "g0": 9.8},
  "x0": {"point": [0.0, 1.0]},
  "solver": {"n_steps": 3000, "tol": 1e-9, "seed": 1},
  "oracle": "example3"
})json";

const char* kExample4 = R"json({
  "name": "example4",
  "family": {
    "dim": 2,
    "horizon": 3.0,
    "rho": "inf",
    "gamma": 1e-6,
    "box": {"lo": [-2.0, -1.0], "hi": [2.0, 5.0]},
    "constraints": [
      {"kind": "max", "parts": [
        {"kind": "affine", "a": [1.0, -1.0], "time_slope": 1.0, "offset": 0.0},
        {"kind": "affine", "a": [-1.0, -1.0], "time_slope": 1.0, "offset": 0.0}
      ]},
      {"kind": "affine", "a": [0.0, 1.0], "time_slope": -1.0, "offset": -1.0}
    ]
  },
  "perturbation": {"kind": "zero"},
  "x0": {"sampler": {"count": 100}},
  "solver": {"n_steps": 3000, "tol": 1e-9, "seed": 1},
  "oracle": "example4"
})json";

}  // namespace

const std::vector<std::string>& builtin_scenario_names() {
  static const std::vector<std::string> names = {"example1", "example2-interior",
                                                 "example3", "example4"};
  return names;
}

bool is_builtin_scenario(const std::string& name) {
  for (const auto& n : builtin_scenario_names())
    if (n == name) return true;
  return false;
}

Scenario builtin_scenario(const std::string& name) {
  const char* text = nullptr;
  if (name == "example1") text = kExample1;
  if (name == "example2-interior") text = kExample2Interior;
  if (name == "example3") text = kExample3;
  if (name == "example4") text = kExample4;
  if (!text) throw ScenarioError("unknown built-in scenario '" + name + "'");
  return scenario_from_json(json::parse(text));
}

Scenario load_scenario(const std::string& path_or_builtin) {
  if (is_builtin_scenario(path_or_builtin)) return builtin_scenario(path_or_builtin);
  std::ifstream f(path_or_builtin);
  if (!f)
    throw ScenarioError("scenario '" + path_or_builtin +
                        "' is neither a built-in name nor a readable file");
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ScenarioError("scenario parse error: " + std::string(e.what()));
  }
  return scenario_from_json(j);
}

}  // namespace sweepsim
