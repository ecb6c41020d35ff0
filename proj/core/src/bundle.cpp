#include "vortexlab/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <sstream>

#include "vortexlab/errors.hpp"
#include "vortexlab/reduction.hpp"

namespace vortexlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// directed phase helper: stores exp(i*beta) for the edge traversed
// from `a` to `b`, conjugating if the stored orientation is (b, a)
void set_directed_phase(const Mesh& mesh, std::vector<Complex>& transports,
                        int edge, int a, double beta) {
  const double sign = (mesh.edges[edge].tail == a) ? 1.0 : -1.0;
  transports[edge] = std::polar(1.0, sign * beta);
}

void torus_background(const Mesh& mesh, int d, std::vector<Complex>& transports) {
  const int nx = mesh.param_nx, ny = mesh.param_ny;
  const double flux = kTwoPi * d / (static_cast<double>(nx) * ny);
  auto vid = [nx](int ix, int iy) { return iy * nx + ix; };
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const int xe = 2 * vid(ix, iy);
      const int ye = xe + 1;
      // +y link carries phase flux*ix; +x links are trivial except on the
      // wrap column, which compensates so every plaquette sees `flux`
      const double beta_x = (ix == nx - 1) ? -iy * flux * nx : 0.0;
      set_directed_phase(mesh, transports, xe, vid(ix, iy), beta_x);
      set_directed_phase(mesh, transports, ye, vid(ix, iy), flux * ix);
    }
  }
}

void sphere_background(const Mesh& mesh, const std::vector<double>& target_flux,
                       std::vector<Complex>& transports) {
  const int nv = mesh.vertex_count();
  const int ne = mesh.edge_count();
  const int nf = mesh.face_count();

  // primal spanning tree: BFS from vertex 0, edges scanned in id order
  std::vector<std::vector<int>> vertex_edges(nv);
  for (int e = 0; e < ne; ++e) {
    vertex_edges[mesh.edges[e].tail].push_back(e);
    vertex_edges[mesh.edges[e].head].push_back(e);
  }
  std::vector<char> in_tree(ne, 0), seen(nv, 0);
  std::queue<int> bfs;
  bfs.push(0);
  seen[0] = 1;
  while (!bfs.empty()) {
    const int v = bfs.front();
    bfs.pop();
    for (int e : vertex_edges[v]) {
      const int w = (mesh.edges[e].tail == v) ? mesh.edges[e].head
                                              : mesh.edges[e].tail;
      if (!seen[w]) {
        seen[w] = 1;
        in_tree[e] = 1;
        bfs.push(w);
      }
    }
  }

  // faces adjacent to each edge
  std::vector<std::array<int, 2>> edge_faces(ne, {-1, -1});
  for (int f = 0; f < nf; ++f)
    for (int e : mesh.faces[f].edges)
      edge_faces[e][edge_faces[e][0] < 0 ? 0 : 1] = f;

  // the co-tree edges form a spanning tree of the dual graph; walk it from
  // face 0 and assign each face's parent arc from its flux equation
  std::vector<int> parent_arc(nf, -1), order;
  std::vector<char> face_seen(nf, 0);
  order.reserve(nf);
  std::queue<int> dual_bfs;
  dual_bfs.push(0);
  face_seen[0] = 1;
  while (!dual_bfs.empty()) {
    const int f = dual_bfs.front();
    dual_bfs.pop();
    order.push_back(f);
    for (int e : mesh.faces[f].edges) {
      if (in_tree[e]) continue;
      const int g = (edge_faces[e][0] == f) ? edge_faces[e][1] : edge_faces[e][0];
      if (!face_seen[g]) {
        face_seen[g] = 1;
        parent_arc[g] = e;
        dual_bfs.push(g);
      }
    }
  }

  std::vector<double> beta(ne, 0.0);  // phase along stored orientation
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int f = *it;
    if (parent_arc[f] < 0) continue;  // root closes automatically
    const Face& face = mesh.faces[f];
    double partial = 0.0;
    int arc_sign = 0;
    for (std::size_t k = 0; k < face.edges.size(); ++k) {
      if (face.edges[k] == parent_arc[f])
        arc_sign = face.signs[k];
      else
        partial += face.signs[k] * beta[face.edges[k]];
    }
    beta[parent_arc[f]] = (target_flux[f] - partial) / arc_sign;
  }

  for (int e = 0; e < ne; ++e)
    transports[e] = std::polar(1.0, std::remainder(beta[e], kTwoPi));
}

}  // namespace

Connection background_connection(const MeshPtr& mesh, int d) {
  Connection conn;
  conn.mesh = mesh;
  conn.degree = d;
  conn.fluctuation.assign(mesh->edge_count(), 0.0);
  conn.background_curvature.resize(mesh->face_count());
  for (int f = 0; f < mesh->face_count(); ++f)
    conn.background_curvature[f] =
        kTwoPi * d * mesh->faces[f].area / mesh->total_area;

  conn.background_transport.assign(mesh->edge_count(), Complex(1.0, 0.0));
  if (d != 0) {
    if (mesh->topology == Topology::Torus)
      torus_background(*mesh, d, conn.background_transport);
    else
      sphere_background(*mesh, conn.background_curvature,
                        conn.background_transport);
  }
  return conn;
}

std::vector<double> curvature(const Connection& conn) {
  const Mesh& mesh = *conn.mesh;
  std::vector<double> flux(mesh.face_count());
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Face& face = mesh.faces[f];
    double da = 0.0;
    for (std::size_t k = 0; k < face.edges.size(); ++k)
      da += face.signs[k] * conn.fluctuation[face.edges[k]];
    flux[f] = conn.background_curvature[f] + da;
  }
  return flux;
}

int degree_of(const Connection& conn) {
  const std::vector<double> flux = curvature(conn);
  const double total = pairwise_sum(flux) / kTwoPi;
  const double rounded = std::round(total);
  if (std::abs(total - rounded) > 1e-8) {
    std::ostringstream msg;
    msg << "corrupted connection: total flux " << total
        << " * 2*pi is not an integer";
    throw NumericError(msg.str());
  }
  return static_cast<int>(rounded);
}

Complex transport(const Connection& conn, int edge) {
  return conn.background_transport[edge] *
         std::polar(1.0, conn.fluctuation[edge]);
}

Configuration apply_gauge(const Configuration& config,
                          const std::vector<double>& theta) {
  const Mesh& mesh = *config.mesh();
  Configuration out = config;
  for (int v = 0; v < mesh.vertex_count(); ++v)
    out.section.value[v] *= std::polar(1.0, theta[v]);
  for (int e = 0; e < mesh.edge_count(); ++e)
    out.connection.fluctuation[e] +=
        theta[mesh.edges[e].head] - theta[mesh.edges[e].tail];
  return out;
}

namespace {

// weighted divergence d0^T star1 a
std::vector<double> weighted_divergence(const Mesh& mesh,
                                        const std::vector<double>& a) {
  std::vector<double> div(mesh.vertex_count(), 0.0);
  for (int e = 0; e < mesh.edge_count(); ++e) {
    const double g = mesh.star1(e) * a[e];
    div[mesh.edges[e].head] += g;
    div[mesh.edges[e].tail] -= g;
  }
  return div;
}

void remove_mean(std::vector<double>& x) {
  double mean = pairwise_sum(x) / static_cast<double>(x.size());
  for (double& v : x) v -= mean;
}

}  // namespace

double coulomb_residual(const Connection& conn) {
  const std::vector<double> div =
      weighted_divergence(*conn.mesh, conn.fluctuation);
  double r = 0.0;
  for (double v : div) r = std::max(r, std::abs(v));
  return r;
}

GaugeFixResult coulomb_gauge_fix(const Configuration& config) {
  const Mesh& mesh = *config.mesh();
  const int nv = mesh.vertex_count();

  std::vector<double> rhs =
      weighted_divergence(mesh, config.connection.fluctuation);
  remove_mean(rhs);

  auto apply_laplacian = [&mesh](const std::vector<double>& x) {
    std::vector<double> y(x.size(), 0.0);
    for (int e = 0; e < mesh.edge_count(); ++e) {
      const double g = mesh.star1(e) * (x[mesh.edges[e].head] - x[mesh.edges[e].tail]);
      y[mesh.edges[e].head] += g;
      y[mesh.edges[e].tail] -= g;
    }
    return y;
  };

  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> prod(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) prod[i] = a[i] * b[i];
    return pairwise_sum(prod);
  };

  GaugeFixResult result;
  result.theta.assign(nv, 0.0);

  const double rhs_norm = std::sqrt(dot(rhs, rhs));
  const double tol = 1e-12 * std::max(rhs_norm, 1e-300);
  const int max_iter = std::max(1000, 100 * static_cast<int>(std::sqrt(nv)));

  std::vector<double> r = rhs, p = rhs, x(nv, 0.0);
  double rr = dot(r, r);
  int iter = 0;
  while (std::sqrt(rr) > tol && iter < max_iter) {
    const std::vector<double> lp = apply_laplacian(p);
    const double alpha = rr / dot(p, lp);
    for (int v = 0; v < nv; ++v) {
      x[v] += alpha * p[v];
      r[v] -= alpha * lp[v];
    }
    remove_mean(r);
    const double rr_next = dot(r, r);
    const double beta = rr_next / rr;
    rr = rr_next;
    for (int v = 0; v < nv; ++v) p[v] = r[v] + beta * p[v];
    ++iter;
  }
  result.cg_iterations = iter;
  result.residual = std::sqrt(rr);
  if (std::sqrt(rr) > tol) {
    std::ostringstream msg;
    msg << "coulomb gauge fix: CG stalled after " << iter
        << " iterations, residual " << std::sqrt(rr) << " (target " << tol << ")";
    throw NumericError(msg.str());
  }

  // weighted mean zero representative
  std::vector<double> weighted(nv);
  for (int v = 0; v < nv; ++v) weighted[v] = x[v] * mesh.star0(v);
  const double shift = pairwise_sum(weighted) / mesh.total_area;
  for (int v = 0; v < nv; ++v) x[v] -= shift;

  result.theta = x;
  std::vector<double> neg(nv);
  for (int v = 0; v < nv; ++v) neg[v] = -x[v];
  result.fixed = apply_gauge(config, neg);
  return result;
}

}  // namespace vortexlab
