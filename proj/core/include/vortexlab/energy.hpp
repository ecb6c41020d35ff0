#pragma once

#include <array>
#include <utility>
#include <vector>

#include "vortexlab/bundle.hpp"

namespace vortexlab {

// Discrete Yang-Mills-Higgs action:
//   curvature  eps^2 * sum_f F_f^2 / area_f
//   kinetic    sum_e w_e |u_head - U_e u_tail|^2      (w_e = star1)
//   potential  sum_v (1 - |u_v|^2)^2 / (4 eps^2) * dual_area_v
struct EnergyBreakdown {
  double curvature_term = 0.0;
  double kinetic_term = 0.0;
  double potential_term = 0.0;
  double total = 0.0;
};

EnergyBreakdown energy(const Configuration& config);

// A tangent direction (or gradient) at a configuration: a section
// perturbation v per vertex plus a real 1-form perturbation per edge.
struct Variation {
  std::vector<Complex> u;
  std::vector<double> a;
};

Variation zero_variation(const Mesh& mesh);

// L^2 (star-weighted) inner product on variations.
double inner(const Mesh& mesh, const Variation& x, const Variation& y);
double norm(const Mesh& mesh, const Variation& x);
void axpy(double alpha, const Variation& x, Variation& y);  // y += alpha x

// Riesz representative of the first variation: <grad, (v,a)> equals the
// directional derivative of the energy along (v,a).
Variation gradient(const Configuration& config);

// Exact second differential: <hessian_apply(x), y> is the polarized second
// derivative of the discrete energy. Symmetric in the weighted product.
Variation hessian_apply(const Configuration& config, const Variation& dir);

// Covariant gradient of u reconstructed per face by least squares over the
// boundary edges, expressed in the face's oriented orthonormal frame.
struct FaceGradient {
  Complex w1, w2;
};
std::vector<FaceGradient> covariant_gradient(const Configuration& config);

// area-weighted transfers between vertex and face fields
std::vector<double> vertex_to_face_average(const Mesh& mesh,
                                           const std::vector<double>& vertex);
std::vector<double> face_to_vertex_average(const Mesh& mesh,
                                           const std::vector<double>& face);

struct DiagnosticsReport {
  std::vector<double> h;                    // (1 - |u|^2) / (2 eps^2), per vertex
  std::vector<double> f;                    // F_f / area_f, per face
  std::vector<double> sigma_norm_sq_plus;   // |d_A u + i * d_A u|^2, per face
  std::vector<double> sigma_norm_sq_minus;  // |d_A u - i * d_A u|^2, per face
  double max_f_minus_h = 0.0;
  double max_negf_minus_h = 0.0;
};

DiagnosticsReport diagnostics(const Configuration& config);

// Bogomol'nyi decomposition. defect_plus vanishes exactly on the vortex
// branch, defect_minus on the anti-vortex branch, and
// defect_minus - defect_plus tends to 2 * topological under refinement.
struct BogomolnySplit {
  double defect_plus = 0.0;
  double defect_minus = 0.0;
  double topological = 0.0;  // 2 pi d
};

BogomolnySplit bogomolny_split(const Configuration& config);

// Star-weighted gradient norms split by block; zero at discrete critical
// points.
std::pair<double, double> el_residual(const Configuration& config);

// Signed maxima of (f - h) and (-f - h) over faces, with h averaged to faces.
std::pair<double, double> pointwise_bound_check(const Configuration& config);

struct VortexCensus {
  std::vector<std::pair<int, int>> zeros;  // (face id, winding), winding != 0
  int total_winding = 0;
  bool degenerate_warning = false;
  std::vector<int> flagged_faces;  // faces touching a near-zero vertex
};

// Transport-corrected winding of arg(u) per face. Totals the degree for
// configurations near vortex solutions.
VortexCensus vortex_census(const Configuration& config);

// Residual norms of three pointwise identities satisfied by smooth
// solutions:
//   (a) laplace h = |d_A u|^2 / eps^2 - |u|^2 h / eps^2
//   (d) d* phi = Re<i u, sigma> / eps^2
//   (e) d_A sigma = -phi i u
// Small only near solutions, up to discretization error.
struct IdentityResiduals {
  double res_a = 0.0;
  double res_d = 0.0;
  double res_e = 0.0;
};

IdentityResiduals identity_residuals(const Configuration& config);

}  // namespace vortexlab
