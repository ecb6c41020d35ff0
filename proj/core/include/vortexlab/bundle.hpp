#pragma once

#include <complex>
#include <vector>

#include "vortexlab/mesh.hpp"

namespace vortexlab {

using Complex = std::complex<double>;

// Degree-d Hermitian line bundle with metric connection. The degree lives in
// the fixed background transports; the fluctuation A is a real edge 1-form.
// The total per-edge transport is background * exp(i * A_e), and the face
// curvature integral F_f = F0_f + (d1 A)_f is tracked in R with no angle
// wrapping, so sum_f F_f = 2*pi*degree for every fluctuation.
struct Connection {
  MeshPtr mesh;
  std::vector<Complex> background_transport;  // per edge, unit modulus
  std::vector<double> background_curvature;   // per face, sums to 2*pi*d
  std::vector<double> fluctuation;            // A, per oriented edge
  int degree = 0;
};

// One complex fiber value per vertex.
struct Section {
  MeshPtr mesh;
  std::vector<Complex> value;
};

struct Configuration {
  Section section;
  Connection connection;
  double epsilon = 1.0;

  const MeshPtr& mesh() const { return connection.mesh; }
};

// Background connection with the harmonic (constant-density) curvature
// representative: F0_f = 2*pi*d * area_f / |Sigma|.
Connection background_connection(const MeshPtr& mesh, int d);

// Per-face integral of sqrt(-1) F_A.
std::vector<double> curvature(const Connection& conn);

// Total flux / 2*pi, rounded; throws NumericError if the flux is further
// than 1e-8 from an integer.
int degree_of(const Connection& conn);

// Holonomy of the full connection along the stored edge orientation.
Complex transport(const Connection& conn, int edge);

// u -> exp(i theta) u, A -> A + d0 theta.
Configuration apply_gauge(const Configuration& config,
                          const std::vector<double>& theta);

struct GaugeFixResult {
  std::vector<double> theta;  // weighted mean zero
  Configuration fixed;        // gauge-equivalent, discrete Coulomb condition
  int cg_iterations = 0;
  double residual = 0.0;
};

// Solves the weighted graph-Laplacian Poisson problem L theta = d0^T star1 A
// and returns the representative with d0^T star1 (A - d0 theta) = 0.
GaugeFixResult coulomb_gauge_fix(const Configuration& config);

// max_e |d0^T star1 (A)|, the divergence residual used by the fix.
double coulomb_residual(const Connection& conn);

}  // namespace vortexlab
