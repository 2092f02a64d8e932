#pragma once

#include "sweepsim/scenario.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace sweepsim {

// Process exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSolverFailure = 3;
inline constexpr int kExitRefuted = 4;
inline constexpr int kExitOrderFailure = 5;

struct CommandOverrides {
  std::optional<int> n_steps;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
};

/// solve: trajectory CSV + residual report + run metadata (endpoint files
/// when the scenario samples its initial value).
int cmd_solve(const std::string& scenario_ref, const std::string& out_dir,
              const CommandOverrides& ov, std::ostream& out, std::ostream& err);

/// certify: assumption report with derived r and theta; exit 4 on refutation.
int cmd_certify(const std::string& scenario_ref, const CommandOverrides& ov,
                std::ostream& out, std::ostream& err);

/// converge: error table against the scenario oracle over a ladder of grid
/// sizes; exit 5 when the fitted order falls below 0.9 (skipped with a
/// notice when the errors sit at the tolerance floor).
int cmd_converge(const std::string& scenario_ref, const std::vector<int>& n_list,
                 const std::string& out_dir, const CommandOverrides& ov,
                 std::ostream& out, std::ostream& err);

/// reach: endpoint cloud over sampled initial values.
int cmd_reach(const std::string& scenario_ref, const std::string& out_dir,
              const CommandOverrides& ov, std::ostream& out, std::ostream& err);

}  // namespace sweepsim
