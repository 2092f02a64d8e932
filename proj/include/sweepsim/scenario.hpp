#pragma once

#include "sweepsim/solver.hpp"
#include "sweepsim/verify.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace sweepsim {

/// Declarative constraint piece, the JSON-facing mirror of PieceExpr.
struct PieceDecl {
  enum class Kind { Affine, MaxOf, BallComplement } kind = Kind::Affine;
  // affine
  std::vector<double> a;
  double time_slope = 0.0;
  double offset = 0.0;
  // max_of
  std::vector<PieceDecl> parts;
  // ball_complement
  std::vector<double> center;
  double radius = 0.0;

  PieceExpr build() const;
};

struct FamilyDecl {
  int dim = 2;
  double horizon = 1.0;
  double rho = kInfinity;  // serialized as "inf" or a number
  double gamma = 1e-6;
  std::vector<double> box_lo;
  std::vector<double> box_hi;
  std::vector<PieceDecl> constraints;

  ConstraintFamily build() const;
};

struct PerturbationDecl {
  Perturbation::Kind kind = Perturbation::Kind::Zero;
  double g0 = 9.8;
  std::vector<double> times;
  std::vector<std::vector<double>> values;

  Perturbation build(int dim) const;
};

struct SamplerDecl {
  int count = 100;
};

struct SolverDecl {
  int n_steps = 1000;
  double tol = 1e-9;
  std::uint64_t seed = 1;
};

/// One runnable problem description. Parses losslessly; unknown keys are
/// rejected so typos cannot silently change a run.
struct Scenario {
  std::string name;
  FamilyDecl family;
  PerturbationDecl perturbation;
  std::variant<std::vector<double>, SamplerDecl> x0;
  SolverDecl solver;
  std::string oracle = "none";  // none | example1 | example2 | example3 | example4
  std::optional<std::vector<std::string>> outputs;

  bool has_sampler() const { return std::holds_alternative<SamplerDecl>(x0); }
  const SamplerDecl& sampler() const { return std::get<SamplerDecl>(x0); }
  Point initial_point() const;

  SweepingProblem build_problem() const;
  SweepingProblem build_problem(const Point& start) const;
  SolverOptions build_solver_options() const;
  /// Oracle trajectory function, if this scenario names one.
  std::optional<OracleFn> oracle_fn() const;
  std::optional<OracleFn> oracle_fn(const Point& start) const;
};

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);

Scenario load_scenario(const std::string& path_or_builtin);

/// Built-in scenarios: example1, example2-interior, example3, example4.
const std::vector<std::string>& builtin_scenario_names();
bool is_builtin_scenario(const std::string& name);
Scenario builtin_scenario(const std::string& name);

}  // namespace sweepsim
