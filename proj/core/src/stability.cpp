#include "vortexlab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "vortexlab/errors.hpp"
#include "vortexlab/rng.hpp"

namespace vortexlab {

namespace {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct EigResult {
  std::vector<double> eigenvalues;
  int basis_size = 0;
  double max_residual = 0.0;
  double op_norm_estimate = 0.0;
  bool converged = true;
};

template <typename Scalar>
void fill_random(DenseVector<Scalar>& v, Rng& rng);

template <>
void fill_random<double>(DenseVector<double>& v, Rng& rng) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
}

template <>
void fill_random<Complex>(DenseVector<Complex>& v, Rng& rng) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = Complex(rng.normal(), rng.normal());
}

// Dense route: materialize the operator column by column.
template <typename Scalar>
EigResult<Scalar> dense_smallest(
    int n, const std::function<void(const DenseVector<Scalar>&, DenseVector<Scalar>&)>& apply,
    int k) {
  DenseMatrix<Scalar> mat(n, n);
  DenseVector<Scalar> basis = DenseVector<Scalar>::Zero(n);
  DenseVector<Scalar> out(n);
  for (int j = 0; j < n; ++j) {
    basis[j] = Scalar(1.0);
    apply(basis, out);
    mat.col(j) = out;
    basis[j] = Scalar(0.0);
  }
  // symmetrize against roundoff
  mat = Scalar(0.5) * (mat + mat.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> solver(mat);

  EigResult<Scalar> result;
  const int kk = std::min(k, n);
  result.eigenvalues.assign(solver.eigenvalues().data(),
                            solver.eigenvalues().data() + kk);
  result.op_norm_estimate =
      std::max(std::abs(solver.eigenvalues()(0)),
               std::abs(solver.eigenvalues()(n - 1)));
  for (int j = 0; j < kk; ++j) {
    DenseVector<Scalar> x = solver.eigenvectors().col(j);
    apply(x, out);
    out -= solver.eigenvalues()(j) * x;
    result.max_residual = std::max(result.max_residual, out.norm());
  }
  return result;
}

// Block Lanczos with full reorthogonalization. Finds the smallest k
// eigenvalues of a self-adjoint operator; every vector stays in the Krylov
// basis so clustered and repeated eigenvalues up to the block size resolve.
template <typename Scalar>
EigResult<Scalar> block_lanczos_smallest(
    int n, const std::function<void(const DenseVector<Scalar>&, DenseVector<Scalar>&)>& apply,
    int k, double rel_tol, int max_basis, std::uint64_t seed) {
  const int block = std::min({std::max(2, k), 12, n});
  max_basis = std::min(max_basis, n);

  DenseMatrix<Scalar> basis(n, max_basis);
  DenseMatrix<Scalar> tmat = DenseMatrix<Scalar>::Zero(max_basis, max_basis);

  Rng rng(seed);
  DenseMatrix<Scalar> block_vecs(n, block);
  for (int j = 0; j < block; ++j) {
    DenseVector<Scalar> col(n);
    fill_random<Scalar>(col, rng);
    block_vecs.col(j) = col;
  }

  int m = 0;  // current basis size
  auto reorthogonalize = [&](DenseMatrix<Scalar>& w) {
    if (m == 0) return;
    auto q = basis.leftCols(m);
    w -= q * (q.adjoint() * w).eval();
    w -= q * (q.adjoint() * w).eval();
  };

  auto append_block = [&](DenseMatrix<Scalar>& w) -> int {
    // orthonormalize w in place, replacing rank-deficient columns with
    // fresh random directions
    int added = 0;
    for (int j = 0; j < w.cols() && m + added < max_basis; ++j) {
      DenseVector<Scalar> col = w.col(j);
      for (int attempt = 0; attempt < 3; ++attempt) {
        if (m + added > 0) {
          auto q = basis.leftCols(m + added);
          col -= q * (q.adjoint() * col).eval();
          col -= q * (q.adjoint() * col).eval();
        }
        const double nrm = col.norm();
        if (nrm > 1e-10) {
          basis.col(m + added) = col / nrm;
          ++added;
          break;
        }
        fill_random<Scalar>(col, rng);
      }
    }
    return added;
  };

  EigResult<Scalar> result;
  result.converged = false;

  {
    DenseMatrix<Scalar> w = block_vecs;
    m += append_block(w);
  }

  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> small_solver;
  DenseVector<Scalar> out(n);

  int prev_m = 0;
  while (m < max_basis) {
    // apply the operator to the newest columns
    const int fresh = m - prev_m;
    if (fresh == 0) break;
    DenseMatrix<Scalar> w(n, fresh);
    for (int j = 0; j < fresh; ++j) {
      apply(basis.col(prev_m + j), out);
      w.col(j) = out;
    }
    // project the Gram block before orthogonalizing
    auto q = basis.leftCols(m);
    tmat.block(0, prev_m, m, fresh) = q.adjoint() * w;
    tmat.block(prev_m, 0, fresh, m) =
        tmat.block(0, prev_m, m, fresh).adjoint();
    prev_m = m;
    reorthogonalize(w);
    const int added = append_block(w);
    if (added == 0) break;
    m += added;

    // convergence check on the k smallest Ritz pairs
    if (m >= std::max(3 * k, 2 * block) && (m % (2 * block) == 0 || m >= max_basis)) {
      DenseMatrix<Scalar> tm = tmat.topLeftCorner(prev_m, prev_m);
      tm = Scalar(0.5) * (tm + tm.adjoint()).eval();
      small_solver.compute(tm);
      const auto& vals = small_solver.eigenvalues();
      result.op_norm_estimate =
          std::max(std::abs(vals(0)), std::abs(vals(prev_m - 1)));
      const int kk = std::min(k, prev_m);
      double worst = 0.0;
      std::vector<double> eigs(kk);
      for (int j = 0; j < kk; ++j) {
        eigs[j] = vals(j);
        DenseVector<Scalar> x =
            basis.leftCols(prev_m) * small_solver.eigenvectors().col(j);
        apply(x, out);
        out -= DenseVector<Scalar>(vals(j) * x);
        worst = std::max(worst, out.norm());
      }
      result.eigenvalues = eigs;
      result.max_residual = worst;
      result.basis_size = prev_m;
      if (worst <= rel_tol * std::max(result.op_norm_estimate, 1e-30)) {
        result.converged = true;
        return result;
      }
    }
  }
  return result;
}

// Packs a variation into sqrt-weighted real coordinates so the weighted
// inner product becomes Euclidean.
struct HessianOperator {
  const Configuration* config;
  std::vector<double> sqrt_w;  // per real dof
  int nv, ne;

  explicit HessianOperator(const Configuration& c) : config(&c) {
    const Mesh& mesh = *c.mesh();
    nv = mesh.vertex_count();
    ne = mesh.edge_count();
    sqrt_w.resize(2 * nv + ne);
    for (int v = 0; v < nv; ++v) {
      const double s = std::sqrt(mesh.star0(v));
      sqrt_w[2 * v] = s;
      sqrt_w[2 * v + 1] = s;
    }
    for (int e = 0; e < ne; ++e) sqrt_w[2 * nv + e] = std::sqrt(mesh.star1(e));
  }

  int dim() const { return 2 * nv + ne; }

  Variation unpack(const DenseVector<double>& y) const {
    Variation x = zero_variation(*config->mesh());
    for (int v = 0; v < nv; ++v)
      x.u[v] = Complex(y[2 * v] / sqrt_w[2 * v], y[2 * v + 1] / sqrt_w[2 * v + 1]);
    for (int e = 0; e < ne; ++e) x.a[e] = y[2 * nv + e] / sqrt_w[2 * nv + e];
    return x;
  }

  void pack(const Variation& x, DenseVector<double>& y) const {
    y.resize(dim());
    for (int v = 0; v < nv; ++v) {
      y[2 * v] = x.u[v].real() * sqrt_w[2 * v];
      y[2 * v + 1] = x.u[v].imag() * sqrt_w[2 * v + 1];
    }
    for (int e = 0; e < ne; ++e) y[2 * nv + e] = x.a[e] * sqrt_w[2 * nv + e];
  }

  void apply(const DenseVector<double>& y, DenseVector<double>& out) const {
    const Variation x = unpack(y);
    const Variation hx = hessian_apply(*config, x);
    pack(hx, out);
  }
};

// Orthogonal projector onto the complement of the gauge subspace
// span{(i theta_b u, d0 theta_b)}, applied through a sparse normal-equation
// solve; the basis columns are sparse so this stays cheap.
class GaugeProjector {
public:
  GaugeProjector(const Configuration& config, const HessianOperator& op) {
    const Mesh& mesh = *config.mesh();
    const auto& u = config.section.value;
    const int nv = mesh.vertex_count();

    double sup_u = 0.0;
    for (const Complex& c : u) sup_u = std::max(sup_u, std::abs(c));
    const bool zero_section = sup_u <= 1e-10;

    // for the zero section the section part of the gauge direction
    // vanishes and constants map to zero, so one vertex is dropped
    const int first = zero_section ? 1 : 0;
    mode_count_ = nv - first;
    if (mode_count_ == 0) return;

    std::vector<Eigen::Triplet<double>> trips;
    for (int b = first; b < nv; ++b) {
      const int col = b - first;
      if (!zero_section) {
        const Complex iu = Complex(0.0, 1.0) * u[b];
        trips.emplace_back(2 * b, col, iu.real() * op.sqrt_w[2 * b]);
        trips.emplace_back(2 * b + 1, col, iu.imag() * op.sqrt_w[2 * b + 1]);
      }
      // d0 of the vertex indicator
    }
    for (int e = 0; e < mesh.edge_count(); ++e) {
      const Edge& ed = mesh.edges[e];
      const double w = op.sqrt_w[2 * nv + e];
      if (ed.head >= first)
        trips.emplace_back(2 * nv + e, ed.head - first, w);
      if (ed.tail >= first)
        trips.emplace_back(2 * nv + e, ed.tail - first, -w);
    }
    basis_.resize(op.dim(), mode_count_);
    basis_.setFromTriplets(trips.begin(), trips.end());

    Eigen::SparseMatrix<double> gram = (basis_.transpose() * basis_).pruned();
    solver_.compute(gram);
    if (solver_.info() != Eigen::Success)
      throw NumericError("gauge projector: Gram factorization failed");
  }

  int mode_count() const { return mode_count_; }

  void project(DenseVector<double>& y) const {
    if (mode_count_ == 0) return;
    const DenseVector<double> coeff = solver_.solve(basis_.transpose() * y);
    y -= basis_ * coeff;
  }

private:
  int mode_count_ = 0;
  Eigen::SparseMatrix<double> basis_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

}  // namespace

SpectrumResult smallest_hessian_eigs(const Configuration& config, int k,
                                     double tol) {
  if (k < 1) throw ConfigError("spectrum: k must be >= 1");
  const HessianOperator op(config);
  const GaugeProjector projector(config, op);
  const int n = op.dim();

  // crude operator norm estimate for the gauge-mode sentinel shift
  double norm_est = 1.0;
  {
    Rng rng(12345);
    DenseVector<double> x(n), y(n);
    fill_random<double>(x, rng);
    projector.project(x);
    x.normalize();
    for (int it = 0; it < 15; ++it) {
      op.apply(x, y);
      projector.project(y);
      norm_est = y.norm();
      if (norm_est <= 0.0) break;
      x = y / norm_est;
    }
  }
  const double sentinel = 10.0 * std::max(1.0, norm_est);

  // projected operator, with deflated directions parked at +sentinel
  auto apply = [&](const DenseVector<double>& x, DenseVector<double>& out) {
    DenseVector<double> px = x;
    projector.project(px);
    op.apply(px, out);
    projector.project(out);
    out += sentinel * (x - px);
  };

  SpectrumResult result;
  result.gauge_mode_count = projector.mode_count();
  if (n <= 4000) {
    const auto dense = dense_smallest<double>(n, apply, k);
    result.eigenvalues = dense.eigenvalues;
    result.max_residual = dense.max_residual;
    result.op_norm_estimate = dense.op_norm_estimate;
    result.converged = true;
    return result;
  }

  const int max_basis = std::min(n, std::max(600, 20 * k));
  const auto lz =
      block_lanczos_smallest<double>(n, apply, k, tol, max_basis, 777);
  result.eigenvalues = lz.eigenvalues;
  result.iterations = lz.basis_size;
  result.max_residual = lz.max_residual;
  result.op_norm_estimate = lz.op_norm_estimate;
  result.converged = lz.converged;
  return result;
}

SpectrumResult magnetic_laplacian_eigs(const Connection& conn, int k) {
  if (k < 1) throw ConfigError("spectrum: k must be >= 1");
  const Mesh& mesh = *conn.mesh;
  const int nv = mesh.vertex_count();

  std::vector<Complex> transports(mesh.edge_count());
  for (int e = 0; e < mesh.edge_count(); ++e) transports[e] = transport(conn, e);
  std::vector<double> sqrt_mu(nv);
  for (int v = 0; v < nv; ++v) sqrt_mu[v] = std::sqrt(mesh.star0(v));

  auto apply = [&](const DenseVector<Complex>& y, DenseVector<Complex>& out) {
    out = DenseVector<Complex>::Zero(nv);
    for (int e = 0; e < mesh.edge_count(); ++e) {
      const Edge& ed = mesh.edges[e];
      const Complex vh = y[ed.head] / sqrt_mu[ed.head];
      const Complex vt = y[ed.tail] / sqrt_mu[ed.tail];
      const Complex d = vh - transports[e] * vt;
      const double w = mesh.star1(e);
      out[ed.head] += w * d;
      out[ed.tail] -= w * std::conj(transports[e]) * d;
    }
    for (int v = 0; v < nv; ++v) out[v] /= mesh.star0(v) / sqrt_mu[v];
  };

  SpectrumResult result;
  if (nv <= 2000) {
    const auto dense = dense_smallest<Complex>(nv, apply, k);
    result.eigenvalues = dense.eigenvalues;
    result.max_residual = dense.max_residual;
    result.op_norm_estimate = dense.op_norm_estimate;
    result.converged = true;
    return result;
  }
  const int max_basis = std::min(nv, std::max(700, 20 * k));
  const auto lz =
      block_lanczos_smallest<Complex>(nv, apply, k, 1e-8, max_basis, 999);
  result.eigenvalues = lz.eigenvalues;
  result.iterations = lz.basis_size;
  result.max_residual = lz.max_residual;
  result.op_norm_estimate = lz.op_norm_estimate;
  result.converged = lz.converged;
  return result;
}

namespace {

StabilityVerdict verdict_for(const Configuration& config,
                             const VerdictTolerances& tol) {
  StabilityVerdict verdict;
  verdict.spectrum =
      smallest_hessian_eigs(config, tol.spectrum_k, tol.spectrum_tol);
  verdict.lambda1 = verdict.spectrum.eigenvalues.front();
  verdict.energy_total = energy(config).total;

  const BogomolnySplit split = bogomolny_split(config);
  verdict.defect_plus = split.defect_plus;
  verdict.defect_minus = split.defect_minus;
  verdict.vortex_residual = (config.connection.degree >= 0)
                                ? split.defect_plus
                                : split.defect_minus;

  const double scale = std::max(1.0, verdict.energy_total);
  verdict.is_stable = verdict.lambda1 >= -tol.stability_rel * scale;
  verdict.satisfies_vortex =
      std::min(split.defect_plus, split.defect_minus) <=
      tol.vortex_defect_rel * scale;

  double sup_u = 0.0;
  for (const Complex& c : config.section.value)
    sup_u = std::max(sup_u, std::abs(c));
  verdict.zero_section_tag = sup_u <= tol.zero_section_sup;

  verdict.theorem_consistent = !verdict.is_stable || verdict.satisfies_vortex ||
                               verdict.zero_section_tag;
  return verdict;
}

}  // namespace

StabilityVerdict zero_section_report(const MeshPtr& mesh, int d, double epsilon,
                                     const VerdictTolerances& tol) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  Configuration config;
  config.connection = background_connection(mesh, d);
  config.section.mesh = mesh;
  config.section.value.assign(mesh->vertex_count(), Complex(0.0, 0.0));
  config.epsilon = epsilon;
  return verdict_for(config, tol);
}

StabilityVerdict theorem_verdict(const MinimizeResult& result,
                                 const VerdictTolerances& tol) {
  if (!result.converged)
    throw NumericError("theorem verdict: input minimization did not converge");
  return verdict_for(result.config, tol);
}

}  // namespace vortexlab
