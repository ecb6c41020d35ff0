#pragma once

#include <vector>

#include "vortexlab/solver.hpp"

namespace vortexlab {

struct SpectrumResult {
  std::vector<double> eigenvalues;  // smallest k, ascending
  int gauge_mode_count = 0;         // deflated gauge directions
  int iterations = 0;               // Krylov basis size (0 for dense solves)
  double max_residual = 0.0;        // max ||A x - lambda x|| over reported pairs
  double op_norm_estimate = 0.0;
  bool converged = true;
};

// Smallest eigenvalues of the energy Hessian in the star-weighted metric,
// restricted to the orthogonal complement of the gauge subspace
// span{(i theta u, d0 theta)}. Uses block Lanczos with full
// reorthogonalization, or a dense solve below 4000 unknowns.
SpectrumResult smallest_hessian_eigs(const Configuration& config, int k,
                                     double tol);

// Smallest eigenvalues of the twisted Laplacian star0^-1 d_A^H star1 d_A.
SpectrumResult magnetic_laplacian_eigs(const Connection& conn, int k);

struct VerdictTolerances {
  double stability_rel = 1e-6;     // lambda1 >= -stability_rel * max(1, E)
  double vortex_defect_rel = 0.02; // defect <= rel * max(1, E) counts as vortex
  double zero_section_sup = 1e-3;  // sup|u| below this tags the zero section
  int spectrum_k = 6;
  double spectrum_tol = 1e-8;
};

struct StabilityVerdict {
  bool is_stable = false;
  double lambda1 = 0.0;
  double energy_total = 0.0;
  double defect_plus = 0.0;
  double defect_minus = 0.0;
  double vortex_residual = 0.0;  // defect on the branch selected by sign(d)
  bool satisfies_vortex = false;
  bool zero_section_tag = false;
  // must hold for every converged run: stable solutions satisfy a vortex
  // branch unless they sit on the zero section
  bool theorem_consistent = false;
  SpectrumResult spectrum;
};

// Stability and vortex check of (0, background connection) at coupling eps.
StabilityVerdict zero_section_report(const MeshPtr& mesh, int d, double epsilon,
                                     const VerdictTolerances& tol = {});

// Full check of a converged minimizer. Rejects unconverged input.
StabilityVerdict theorem_verdict(const MinimizeResult& result,
                                 const VerdictTolerances& tol = {});

}  // namespace vortexlab
