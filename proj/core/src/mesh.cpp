#include "vortexlab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vortexlab/errors.hpp"
#include "vortexlab/reduction.hpp"

namespace vortexlab {

namespace {

Vec3 sub(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3 add(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 scale(const Vec3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }
double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
Vec3 normalize(const Vec3& a) { return scale(a, 1.0 / norm(a)); }

double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(norm(cross(a, b)), dot(a, b));
}

// spherical triangle area on the radius-r sphere (L'Huilier)
double spherical_triangle_area(const Vec3& pa, const Vec3& pb, const Vec3& pc,
                               double radius) {
  const Vec3 a = normalize(pa), b = normalize(pb), c = normalize(pc);
  const double sa = angle_between(b, c);
  const double sb = angle_between(a, c);
  const double sc = angle_between(a, b);
  const double s = 0.5 * (sa + sb + sc);
  const double t = std::tan(0.5 * s) * std::tan(0.5 * (s - sa)) *
                   std::tan(0.5 * (s - sb)) * std::tan(0.5 * (s - sc));
  const double excess = 4.0 * std::atan(std::sqrt(std::max(t, 0.0)));
  return excess * radius * radius;
}

double cotangent_at(const Vec3& apex, const Vec3& p, const Vec3& q) {
  const Vec3 u = sub(p, apex);
  const Vec3 v = sub(q, apex);
  return dot(u, v) / norm(cross(u, v));
}

void finalize_face_frames(Mesh& mesh) {
  for (Face& face : mesh.faces) {
    face.edge_tangents.resize(face.edges.size());
    for (std::size_t k = 0; k < face.edges.size(); ++k) {
      const Edge& e = mesh.edges[face.edges[k]];
      const Vec3 t = sub(mesh.positions[e.head], mesh.positions[e.tail]);
      face.edge_tangents[k] = {dot(t, face.frame1) / norm(t),
                               dot(t, face.frame2) / norm(t)};
    }
  }
}

}  // namespace

MeshPtr build_torus_mesh(int nx, int ny, double lx, double ly) {
  if (nx < 2 || ny < 2)
    throw ConfigError("invalid mesh: torus grid needs nx, ny >= 2");
  if (!(lx > 0.0) || !(ly > 0.0))
    throw ConfigError("invalid mesh: torus side lengths must be positive");

  auto mesh = std::make_shared<Mesh>();
  mesh->topology = Topology::Torus;
  mesh->param_nx = nx;
  mesh->param_ny = ny;
  mesh->param_lx = lx;
  mesh->param_ly = ly;

  const double hx = lx / nx;
  const double hy = ly / ny;
  const int nv = nx * ny;
  auto vid = [nx, ny](int ix, int iy) {
    return ((iy % ny + ny) % ny) * nx + ((ix % nx + nx) % nx);
  };

  mesh->positions.resize(nv);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix)
      mesh->positions[vid(ix, iy)] = {ix * hx, iy * hy, 0.0};

  // two edges per vertex: +x at even slot, +y at odd slot; stored orientation
  // is lexicographic (smaller vertex id is the tail)
  mesh->edges.resize(2 * nv);
  auto xedge = [vid](int ix, int iy) { return 2 * vid(ix, iy); };
  auto yedge = [vid](int ix, int iy) { return 2 * vid(ix, iy) + 1; };
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const int a = vid(ix, iy);
      const int bx = vid(ix + 1, iy);
      const int by = vid(ix, iy + 1);
      Edge& ex = mesh->edges[xedge(ix, iy)];
      ex.tail = std::min(a, bx);
      ex.head = std::max(a, bx);
      ex.primal_length = hx;
      ex.dual_length = hy;
      Edge& ey = mesh->edges[yedge(ix, iy)];
      ey.tail = std::min(a, by);
      ey.head = std::max(a, by);
      ey.primal_length = hy;
      ey.dual_length = hx;
    }
  }

  mesh->faces.resize(nv);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      Face& face = mesh->faces[vid(ix, iy)];
      const int v00 = vid(ix, iy), v10 = vid(ix + 1, iy);
      const int v11 = vid(ix + 1, iy + 1), v01 = vid(ix, iy + 1);
      face.vertices = {v00, v10, v11, v01};
      face.edges = {xedge(ix, iy), yedge(ix + 1, iy), xedge(ix, iy + 1),
                    yedge(ix, iy)};
      // counterclockwise traversal v00 -> v10 -> v11 -> v01 -> v00
      const std::array<std::pair<int, int>, 4> walk = {
          std::pair{v00, v10}, {v10, v11}, {v11, v01}, {v01, v00}};
      face.signs.resize(4);
      for (int k = 0; k < 4; ++k) {
        const Edge& e = mesh->edges[face.edges[k]];
        face.signs[k] = (e.tail == walk[k].first && e.head == walk[k].second)
                            ? 1
                            : -1;
      }
      face.area = hx * hy;
      face.frame1 = {1.0, 0.0, 0.0};
      face.frame2 = {0.0, 1.0, 0.0};
    }
  }

  mesh->dual_area.assign(nv, hx * hy);
  mesh->total_area = lx * ly;

  // tangents come from lattice steps, not positions, so wrap edges behave
  for (Face& face : mesh->faces) {
    face.edge_tangents.resize(4);
    for (int k = 0; k < 4; ++k) {
      const int e = face.edges[k];
      const bool is_x = (e % 2 == 0);
      // stored orientation runs tail -> head; for wrap edges that is the
      // negative lattice direction
      const Edge& ed = mesh->edges[e];
      const int tail_ix = ed.tail % nx, head_ix = ed.head % nx;
      const int tail_iy = ed.tail / nx, head_iy = ed.head / nx;
      double sgn;
      if (is_x)
        sgn = (head_ix == (tail_ix + 1) % nx) ? 1.0 : -1.0;
      else
        sgn = (head_iy == (tail_iy + 1) % ny) ? 1.0 : -1.0;
      face.edge_tangents[k] = is_x ? std::array<double, 2>{sgn, 0.0}
                                   : std::array<double, 2>{0.0, sgn};
    }
  }

  return mesh;
}

MeshPtr build_sphere_mesh(int subdivisions, double radius) {
  if (subdivisions < 0)
    throw ConfigError("invalid mesh: sphere subdivisions must be >= 0");
  if (!(radius > 0.0))
    throw ConfigError("invalid mesh: sphere radius must be positive");

  const double t = 0.5 * (1.0 + std::sqrt(5.0));
  std::vector<Vec3> pos = {
      {-1, t, 0}, {1, t, 0},   {-1, -t, 0}, {1, -t, 0},
      {0, -1, t}, {0, 1, t},   {0, -1, -t}, {0, 1, -t},
      {t, 0, -1}, {t, 0, 1},   {-t, 0, -1}, {-t, 0, 1},
  };
  std::vector<std::array<int, 3>> tris = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
  };

  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      pos.push_back(scale(add(pos[a], pos[b]), 0.5));
      const int id = static_cast<int>(pos.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(tris.size() * 4);
    for (const auto& tr : tris) {
      const int ab = mid(tr[0], tr[1]);
      const int bc = mid(tr[1], tr[2]);
      const int ca = mid(tr[2], tr[0]);
      next.push_back({tr[0], ab, ca});
      next.push_back({tr[1], bc, ab});
      next.push_back({tr[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    tris = std::move(next);
  }

  auto mesh = std::make_shared<Mesh>();
  mesh->topology = Topology::Sphere;
  mesh->param_subdivisions = subdivisions;
  mesh->param_radius = radius;

  mesh->positions.resize(pos.size());
  for (std::size_t i = 0; i < pos.size(); ++i)
    mesh->positions[i] = scale(normalize(pos[i]), radius);

  // edges in lexicographic order of their (tail, head) vertex pair
  std::map<std::pair<int, int>, int> edge_id;
  for (const auto& tr : tris)
    for (int k = 0; k < 3; ++k)
      edge_id.emplace(std::minmax(tr[k], tr[(k + 1) % 3]), 0);
  {
    int id = 0;
    for (auto& kv : edge_id) kv.second = id++;
  }

  mesh->edges.resize(edge_id.size());
  for (const auto& [pair, id] : edge_id) {
    Edge& e = mesh->edges[id];
    e.tail = pair.first;
    e.head = pair.second;
    e.primal_length = norm(sub(mesh->positions[e.head], mesh->positions[e.tail]));
  }

  mesh->faces.resize(tris.size());
  std::vector<double> cot_sum(mesh->edges.size(), 0.0);
  for (std::size_t f = 0; f < tris.size(); ++f) {
    Face& face = mesh->faces[f];
    const auto& tr = tris[f];
    face.vertices = {tr[0], tr[1], tr[2]};
    face.edges.resize(3);
    face.signs.resize(3);
    for (int k = 0; k < 3; ++k) {
      const int a = tr[k], b = tr[(k + 1) % 3];
      face.edges[k] = edge_id.at(std::minmax(a, b));
      face.signs[k] = (a < b) ? 1 : -1;
      const int opposite = tr[(k + 2) % 3];
      cot_sum[face.edges[k]] += cotangent_at(
          mesh->positions[opposite], mesh->positions[a], mesh->positions[b]);
    }
    const Vec3 pa = mesh->positions[tr[0]];
    const Vec3 pb = mesh->positions[tr[1]];
    const Vec3 pc = mesh->positions[tr[2]];
    face.area = spherical_triangle_area(pa, pb, pc, radius);
    Vec3 n = cross(sub(pb, pa), sub(pc, pa));
    if (dot(n, add(add(pa, pb), pc)) <= 0.0)
      throw NumericError("sphere mesh: face orientation is not outward");
    n = normalize(n);
    face.frame1 = normalize(sub(pb, pa));
    face.frame2 = cross(n, face.frame1);
  }

  for (std::size_t e = 0; e < mesh->edges.size(); ++e) {
    const double w = 0.5 * cot_sum[e];
    if (!(w > 0.0))
      throw NumericError("sphere mesh: non-positive DEC edge weight");
    mesh->edges[e].dual_length = w * mesh->edges[e].primal_length;
  }

  mesh->dual_area.assign(mesh->positions.size(), 0.0);
  for (const Face& face : mesh->faces)
    for (int v : face.vertices) mesh->dual_area[v] += face.area / 3.0;

  {
    PairwiseAccumulator acc(mesh->faces.size());
    for (const Face& face : mesh->faces) acc.add(face.area);
    mesh->total_area = acc.total();
  }

  finalize_face_frames(*mesh);
  return mesh;
}

std::uint64_t Mesh::incidence_checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  mix(topology == Topology::Torus ? 1 : 2);
  mix(static_cast<std::uint64_t>(vertex_count()));
  mix(static_cast<std::uint64_t>(edge_count()));
  mix(static_cast<std::uint64_t>(face_count()));
  for (const Edge& e : edges) {
    mix(static_cast<std::uint64_t>(e.tail));
    mix(static_cast<std::uint64_t>(e.head));
  }
  for (const Face& f : faces)
    for (std::size_t k = 0; k < f.edges.size(); ++k) {
      mix(static_cast<std::uint64_t>(f.edges[k]));
      mix(static_cast<std::uint64_t>(f.signs[k] > 0 ? 1 : 0));
    }
  return h;
}

nlohmann::json Mesh::summary_json() const {
  std::ostringstream checksum;
  checksum << "0x" << std::hex << incidence_checksum();
  return nlohmann::json{
      {"topology", topology == Topology::Torus ? "torus" : "sphere"},
      {"vertices", vertex_count()},
      {"edges", edge_count()},
      {"faces", face_count()},
      {"euler_characteristic", euler_characteristic()},
      {"total_area", total_area},
      {"incidence_checksum", checksum.str()},
  };
}

DecOperators dec_operators(const MeshPtr& mesh) {
  DecOperators ops;
  ops.mesh = mesh;
  ops.star0.resize(mesh->vertex_count());
  ops.star1.resize(mesh->edge_count());
  ops.star2.resize(mesh->face_count());
  for (int v = 0; v < mesh->vertex_count(); ++v) ops.star0[v] = mesh->star0(v);
  for (int e = 0; e < mesh->edge_count(); ++e) ops.star1[e] = mesh->star1(e);
  for (int f = 0; f < mesh->face_count(); ++f) ops.star2[f] = mesh->star2(f);
  return ops;
}

}  // namespace vortexlab
