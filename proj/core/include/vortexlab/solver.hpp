#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vortexlab/energy.hpp"

namespace vortexlab {

struct SolveOptions {
  int max_iterations = 0;  // 0 -> 50 * sqrt(dof), capped at 200000
  double grad_tolerance = 1e-8;
  double ls_shrink = 0.5;               // backtracking factor, in (0,1)
  double ls_sufficient_decrease = 1e-4; // Armijo constant, in (0, 0.5]
  int restart_period = 50;              // CG restart + Coulomb re-fix cadence
  std::uint64_t seed = 1;
  std::string progress_log;             // optional CSV path

  void validate() const;
  int resolved_max_iterations(int dof) const;
};

struct MinimizeResult {
  Configuration config;
  int iterations = 0;
  std::vector<double> energy_history;  // nonincreasing, accepted steps
  double final_grad_norm = 0.0;
  bool converged = false;
  double gauge_fix_energy_drift = 0.0;  // largest |dE| seen across re-fixes
};

// u iid complex normal scaled so E|u|^2 = 1, A iid uniform in [-0.1, 0.1],
// on top of the degree-d background connection. Deterministic in the seed.
Configuration random_configuration(const MeshPtr& mesh, int d, double epsilon,
                                   std::uint64_t seed);

// Polak-Ribiere nonlinear conjugate gradient with Armijo backtracking.
// Stops when the star-weighted gradient norm drops below
// grad_tolerance * max(1, min(E, 10)). Iteration cap is not an error.
MinimizeResult minimize(const Configuration& initial, const SolveOptions& opts);

// Warm-started sweep over an epsilon schedule.
std::vector<MinimizeResult> continue_in_epsilon(
    const Configuration& config, const std::vector<double>& epsilon_schedule,
    const SolveOptions& opts);

}  // namespace vortexlab
