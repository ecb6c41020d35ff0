#include "vortexlab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vortexlab/reduction.hpp"

namespace vortexlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr Complex kI(0.0, 1.0);

// total per-edge transports, fluctuation included
std::vector<Complex> edge_transports(const Connection& conn) {
  std::vector<Complex> out(conn.mesh->edge_count());
  for (int e = 0; e < conn.mesh->edge_count(); ++e) out[e] = transport(conn, e);
  return out;
}

std::vector<Complex> covariant_differences(const Configuration& config,
                                           const std::vector<Complex>& U) {
  const Mesh& mesh = *config.mesh();
  const auto& u = config.section.value;
  std::vector<Complex> d(mesh.edge_count());
  for (int e = 0; e < mesh.edge_count(); ++e)
    d[e] = u[mesh.edges[e].head] - U[e] * u[mesh.edges[e].tail];
  return d;
}

}  // namespace

EnergyBreakdown energy(const Configuration& config) {
  const Mesh& mesh = *config.mesh();
  const double eps = config.epsilon;
  const auto& u = config.section.value;

  const std::vector<double> flux = curvature(config.connection);
  PairwiseAccumulator curv(mesh.face_count());
  for (int f = 0; f < mesh.face_count(); ++f)
    curv.add(flux[f] * flux[f] / mesh.faces[f].area);

  const std::vector<Complex> U = edge_transports(config.connection);
  PairwiseAccumulator kin(mesh.edge_count());
  for (int e = 0; e < mesh.edge_count(); ++e) {
    const Complex d = u[mesh.edges[e].head] - U[e] * u[mesh.edges[e].tail];
    kin.add(mesh.star1(e) * std::norm(d));
  }

  PairwiseAccumulator pot(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const double g = 1.0 - std::norm(u[v]);
    pot.add(g * g * mesh.star0(v));
  }

  EnergyBreakdown out;
  out.curvature_term = eps * eps * curv.total();
  out.kinetic_term = kin.total();
  out.potential_term = pot.total() / (4.0 * eps * eps);
  out.total = out.curvature_term + out.kinetic_term + out.potential_term;
  return out;
}

Variation zero_variation(const Mesh& mesh) {
  Variation x;
  x.u.assign(mesh.vertex_count(), Complex(0.0, 0.0));
  x.a.assign(mesh.edge_count(), 0.0);
  return x;
}

double inner(const Mesh& mesh, const Variation& x, const Variation& y) {
  PairwiseAccumulator acc(x.u.size() + x.a.size());
  for (int v = 0; v < mesh.vertex_count(); ++v)
    acc.add((x.u[v].real() * y.u[v].real() + x.u[v].imag() * y.u[v].imag()) *
            mesh.star0(v));
  for (int e = 0; e < mesh.edge_count(); ++e)
    acc.add(x.a[e] * y.a[e] * mesh.star1(e));
  return acc.total();
}

double norm(const Mesh& mesh, const Variation& x) {
  return std::sqrt(inner(mesh, x, x));
}

void axpy(double alpha, const Variation& x, Variation& y) {
  for (std::size_t i = 0; i < y.u.size(); ++i) y.u[i] += alpha * x.u[i];
  for (std::size_t i = 0; i < y.a.size(); ++i) y.a[i] += alpha * x.a[i];
}

Variation gradient(const Configuration& config) {
  const Mesh& mesh = *config.mesh();
  const double eps = config.epsilon;
  const auto& u = config.section.value;
  const std::vector<Complex> U = edge_transports(config.connection);
  const std::vector<Complex> D = covariant_differences(config, U);
  const std::vector<double> flux = curvature(config.connection);

  Variation g = zero_variation(mesh);

  for (int e = 0; e < mesh.edge_count(); ++e) {
    const Edge& ed = mesh.edges[e];
    const double w = mesh.star1(e);
    g.u[ed.head] += 2.0 * w * D[e];
    g.u[ed.tail] -= 2.0 * w * std::conj(U[e]) * D[e];
    // curvature pull-back plus the minimal-coupling term
    g.a[e] = 2.0 * std::imag(std::conj(D[e]) * U[e] * u[ed.tail]);
  }
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Face& face = mesh.faces[f];
    const double fd = flux[f] / face.area;
    for (std::size_t k = 0; k < face.edges.size(); ++k)
      g.a[face.edges[k]] += 2.0 * eps * eps * face.signs[k] * fd /
                            mesh.star1(face.edges[k]);
  }
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    g.u[v] /= mesh.star0(v);
    g.u[v] += (std::norm(u[v]) - 1.0) / (eps * eps) * u[v];
  }
  return g;
}

Variation hessian_apply(const Configuration& config, const Variation& dir) {
  const Mesh& mesh = *config.mesh();
  const double eps = config.epsilon;
  const auto& u = config.section.value;
  const auto& v = dir.u;
  const auto& a = dir.a;
  const std::vector<Complex> U = edge_transports(config.connection);
  const std::vector<Complex> D = covariant_differences(config, U);

  Variation h = zero_variation(mesh);

  for (int e = 0; e < mesh.edge_count(); ++e) {
    const Edge& ed = mesh.edges[e];
    const double w = mesh.star1(e);
    const Complex Ut = U[e] * u[ed.tail];
    const Complex Dv = v[ed.head] - U[e] * v[ed.tail];
    const Complex P = Dv - kI * a[e] * Ut;
    h.u[ed.head] += 2.0 * w * P;
    h.u[ed.tail] +=
        2.0 * w * (-std::conj(U[e]) * P + kI * a[e] * std::conj(U[e]) * D[e]);
    h.a[e] = 2.0 * (std::imag(std::conj(P) * Ut) +
                    a[e] * std::real(std::conj(D[e]) * Ut) +
                    std::imag(std::conj(D[e]) * U[e] * v[ed.tail]));
  }

  // curvature block: 2 eps^2 d1^T ( d1 a / area )
  std::vector<double> da(mesh.face_count(), 0.0);
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Face& face = mesh.faces[f];
    double acc = 0.0;
    for (std::size_t k = 0; k < face.edges.size(); ++k)
      acc += face.signs[k] * a[face.edges[k]];
    da[f] = acc / face.area;
  }
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Face& face = mesh.faces[f];
    for (std::size_t k = 0; k < face.edges.size(); ++k)
      h.a[face.edges[k]] += 2.0 * eps * eps * face.signs[k] * da[f] /
                            mesh.star1(face.edges[k]);
  }

  for (int vtx = 0; vtx < mesh.vertex_count(); ++vtx) {
    h.u[vtx] /= mesh.star0(vtx);
    const double re_uv = std::real(std::conj(u[vtx]) * v[vtx]);
    h.u[vtx] += (2.0 * re_uv * u[vtx] - (1.0 - std::norm(u[vtx])) * v[vtx]) /
                (eps * eps);
  }
  return h;
}

std::vector<FaceGradient> covariant_gradient(const Configuration& config) {
  const Mesh& mesh = *config.mesh();
  const std::vector<Complex> U = edge_transports(config.connection);
  const std::vector<Complex> D = covariant_differences(config, U);

  std::vector<FaceGradient> out(mesh.face_count());
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Face& face = mesh.faces[f];
    // least squares for w with  w . t_k = D_k / len_k  over boundary edges
    double g11 = 0.0, g12 = 0.0, g22 = 0.0;
    Complex b1(0.0, 0.0), b2(0.0, 0.0);
    for (std::size_t k = 0; k < face.edges.size(); ++k) {
      const int e = face.edges[k];
      const double t1 = face.edge_tangents[k][0];
      const double t2 = face.edge_tangents[k][1];
      const Complex s = D[e] / mesh.edges[e].primal_length;
      g11 += t1 * t1;
      g12 += t1 * t2;
      g22 += t2 * t2;
      b1 += t1 * s;
      b2 += t2 * s;
    }
    const double det = g11 * g22 - g12 * g12;
    out[f].w1 = (g22 * b1 - g12 * b2) / det;
    out[f].w2 = (g11 * b2 - g12 * b1) / det;
  }
  return out;
}

std::vector<double> vertex_to_face_average(const Mesh& mesh,
                                           const std::vector<double>& vertex) {
  std::vector<double> out(mesh.face_count(), 0.0);
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Face& face = mesh.faces[f];
    double acc = 0.0;
    for (int v : face.vertices) acc += vertex[v];
    out[f] = acc / static_cast<double>(face.vertices.size());
  }
  return out;
}

std::vector<double> face_to_vertex_average(const Mesh& mesh,
                                           const std::vector<double>& face) {
  std::vector<double> out(mesh.vertex_count(), 0.0);
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Face& fc = mesh.faces[f];
    const double share = fc.area / static_cast<double>(fc.vertices.size());
    for (int v : fc.vertices) out[v] += share * face[f];
  }
  for (int v = 0; v < mesh.vertex_count(); ++v) out[v] /= mesh.star0(v);
  return out;
}

DiagnosticsReport diagnostics(const Configuration& config) {
  const Mesh& mesh = *config.mesh();
  const double eps = config.epsilon;
  const auto& u = config.section.value;

  DiagnosticsReport rep;
  rep.h.resize(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v)
    rep.h[v] = (1.0 - std::norm(u[v])) / (2.0 * eps * eps);

  const std::vector<double> flux = curvature(config.connection);
  rep.f.resize(mesh.face_count());
  for (int f = 0; f < mesh.face_count(); ++f)
    rep.f[f] = flux[f] / mesh.faces[f].area;

  const std::vector<FaceGradient> grad = covariant_gradient(config);
  rep.sigma_norm_sq_plus.resize(mesh.face_count());
  rep.sigma_norm_sq_minus.resize(mesh.face_count());
  for (int f = 0; f < mesh.face_count(); ++f) {
    rep.sigma_norm_sq_plus[f] = 2.0 * std::norm(grad[f].w1 - kI * grad[f].w2);
    rep.sigma_norm_sq_minus[f] = 2.0 * std::norm(grad[f].w1 + kI * grad[f].w2);
  }

  const std::vector<double> h_face = vertex_to_face_average(mesh, rep.h);
  double max_p = -std::numeric_limits<double>::infinity();
  double max_m = -std::numeric_limits<double>::infinity();
  for (int f = 0; f < mesh.face_count(); ++f) {
    max_p = std::max(max_p, rep.f[f] - h_face[f]);
    max_m = std::max(max_m, -rep.f[f] - h_face[f]);
  }
  rep.max_f_minus_h = max_p;
  rep.max_negf_minus_h = max_m;
  return rep;
}

BogomolnySplit bogomolny_split(const Configuration& config) {
  const Mesh& mesh = *config.mesh();
  const double eps = config.epsilon;
  const DiagnosticsReport rep = diagnostics(config);
  const std::vector<double> h_face = vertex_to_face_average(mesh, rep.h);

  PairwiseAccumulator plus(mesh.face_count()), minus(mesh.face_count());
  for (int f = 0; f < mesh.face_count(); ++f) {
    const double area = mesh.faces[f].area;
    const double dp = rep.f[f] - h_face[f];
    const double dm = rep.f[f] + h_face[f];
    plus.add((0.5 * rep.sigma_norm_sq_minus[f] + eps * eps * dp * dp) * area);
    minus.add((0.5 * rep.sigma_norm_sq_plus[f] + eps * eps * dm * dm) * area);
  }

  BogomolnySplit split;
  split.defect_plus = plus.total();
  split.defect_minus = minus.total();
  split.topological = kTwoPi * config.connection.degree;
  return split;
}

std::pair<double, double> el_residual(const Configuration& config) {
  const Mesh& mesh = *config.mesh();
  const Variation g = gradient(config);
  PairwiseAccumulator nu(g.u.size()), na(g.a.size());
  for (int v = 0; v < mesh.vertex_count(); ++v)
    nu.add(std::norm(g.u[v]) * mesh.star0(v));
  for (int e = 0; e < mesh.edge_count(); ++e)
    na.add(g.a[e] * g.a[e] * mesh.star1(e));
  return {std::sqrt(nu.total()), std::sqrt(na.total())};
}

std::pair<double, double> pointwise_bound_check(const Configuration& config) {
  const DiagnosticsReport rep = diagnostics(config);
  return {rep.max_f_minus_h, rep.max_negf_minus_h};
}

VortexCensus vortex_census(const Configuration& config) {
  const Mesh& mesh = *config.mesh();
  const auto& u = config.section.value;
  const std::vector<Complex> U = edge_transports(config.connection);
  const std::vector<double> flux = curvature(config.connection);

  VortexCensus census;
  std::vector<char> degenerate(mesh.vertex_count(), 0);
  for (int v = 0; v < mesh.vertex_count(); ++v)
    if (std::abs(u[v]) < 1e-12) {
      degenerate[v] = 1;
      census.degenerate_warning = true;
    }

  // transport-corrected phase increment along an edge; exactly gauge
  // invariant since u_head conj(U_e u_tail) is
  std::vector<double> increment(mesh.edge_count());
  for (int e = 0; e < mesh.edge_count(); ++e)
    increment[e] =
        std::arg(u[mesh.edges[e].head] * std::conj(U[e] * u[mesh.edges[e].tail]));

  for (int f = 0; f < mesh.face_count(); ++f) {
    const Face& face = mesh.faces[f];
    bool flagged = false;
    for (int v : face.vertices) flagged = flagged || degenerate[v];
    if (flagged) census.flagged_faces.push_back(f);

    double total = flux[f];
    for (std::size_t k = 0; k < face.edges.size(); ++k)
      total += face.signs[k] * increment[face.edges[k]];
    const int winding = static_cast<int>(std::lround(total / kTwoPi));
    if (winding != 0) census.zeros.emplace_back(f, winding);
    census.total_winding += winding;
  }
  return census;
}

IdentityResiduals identity_residuals(const Configuration& config) {
  const Mesh& mesh = *config.mesh();
  const double eps = config.epsilon;
  const auto& u = config.section.value;
  const double eps2 = eps * eps;

  const DiagnosticsReport rep = diagnostics(config);
  const std::vector<FaceGradient> grad = covariant_gradient(config);
  const std::vector<double> h_face = vertex_to_face_average(mesh, rep.h);
  const std::vector<Complex> U = edge_transports(config.connection);
  const std::vector<Complex> D = covariant_differences(config, U);

  IdentityResiduals out;

  // (a)  d*d h - (|d_A u|^2 - |u|^2 h) / eps^2, measured at vertices
  {
    std::vector<double> lap(mesh.vertex_count(), 0.0);
    for (int e = 0; e < mesh.edge_count(); ++e) {
      const double g =
          mesh.star1(e) * (rep.h[mesh.edges[e].head] - rep.h[mesh.edges[e].tail]);
      lap[mesh.edges[e].head] += g;
      lap[mesh.edges[e].tail] -= g;
    }
    std::vector<double> grad_sq_face(mesh.face_count());
    for (int f = 0; f < mesh.face_count(); ++f)
      grad_sq_face[f] = std::norm(grad[f].w1) + std::norm(grad[f].w2);
    const std::vector<double> grad_sq = face_to_vertex_average(mesh, grad_sq_face);

    PairwiseAccumulator acc(mesh.vertex_count());
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      const double r = lap[v] / mesh.star0(v) -
                       (grad_sq[v] - std::norm(u[v]) * rep.h[v]) / eps2;
      acc.add(r * r * mesh.star0(v));
    }
    out.res_a = std::sqrt(acc.total());
  }

  // sigma = d_A u - i * d_A u per face, in face frame components
  std::vector<std::array<Complex, 2>> sigma(mesh.face_count());
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Complex s = grad[f].w1 + kI * grad[f].w2;
    sigma[f] = {s, -kI * s};
  }

  // edge samples of sigma and of u, averaged over the adjacent faces
  std::vector<Complex> sigma_edge(mesh.edge_count(), Complex(0.0, 0.0));
  std::vector<double> edge_face_count(mesh.edge_count(), 0.0);
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Face& face = mesh.faces[f];
    for (std::size_t k = 0; k < face.edges.size(); ++k) {
      const int e = face.edges[k];
      const Complex along = sigma[f][0] * face.edge_tangents[k][0] +
                            sigma[f][1] * face.edge_tangents[k][1];
      sigma_edge[e] += along * mesh.edges[e].primal_length;
      edge_face_count[e] += 1.0;
    }
  }
  for (int e = 0; e < mesh.edge_count(); ++e) sigma_edge[e] /= edge_face_count[e];

  // (d)  d* phi = Re<i u, sigma> / eps^2 as integrated edge 1-forms
  {
    std::vector<double> p(mesh.face_count());
    for (int f = 0; f < mesh.face_count(); ++f) p[f] = rep.f[f] - h_face[f];

    std::vector<double> lhs(mesh.edge_count(), 0.0);
    for (int f = 0; f < mesh.face_count(); ++f) {
      const Face& face = mesh.faces[f];
      for (std::size_t k = 0; k < face.edges.size(); ++k)
        lhs[face.edges[k]] += face.signs[k] * p[f];
    }
    PairwiseAccumulator acc(mesh.edge_count());
    for (int e = 0; e < mesh.edge_count(); ++e) {
      const Edge& ed = mesh.edges[e];
      const Complex u_mid = 0.5 * (u[ed.head] + U[e] * u[ed.tail]);
      const double rhs = std::real(kI * u_mid * std::conj(sigma_edge[e])) / eps2;
      const double r = lhs[e] / mesh.star1(e) - rhs;
      acc.add(r * r * mesh.star1(e));
    }
    out.res_d = std::sqrt(acc.total());
  }

  // (e)  d_A sigma + phi i u, integrated per face
  {
    PairwiseAccumulator acc(mesh.face_count());
    for (int f = 0; f < mesh.face_count(); ++f) {
      const Face& face = mesh.faces[f];
      Complex loop(0.0, 0.0);
      for (std::size_t k = 0; k < face.edges.size(); ++k)
        loop += static_cast<double>(face.signs[k]) * sigma_edge[face.edges[k]];
      Complex u_face(0.0, 0.0);
      for (int v : face.vertices) u_face += u[v];
      u_face /= static_cast<double>(face.vertices.size());
      const Complex r =
          loop + (rep.f[f] - h_face[f]) * kI * u_face * mesh.faces[f].area;
      acc.add(std::norm(r) / mesh.faces[f].area);
    }
    out.res_e = std::sqrt(acc.total());
  }

  return out;
}

}  // namespace vortexlab
