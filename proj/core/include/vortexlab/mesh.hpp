#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace vortexlab {

enum class Topology { Torus, Sphere };

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

struct Edge {
  int tail = -1;
  int head = -1;
  double primal_length = 0.0;
  double dual_length = 0.0;
};

struct Face {
  std::vector<int> edges;       // boundary edge ids, in traversal order
  std::vector<int> signs;       // +1 if stored edge direction agrees with the boundary
  std::vector<int> vertices;    // corner vertex ids, in traversal order
  double area = 0.0;
  // orthonormal frame of the face plane, oriented with the surface
  Vec3 frame1, frame2;
  // boundary edge tangent components in (frame1, frame2), per boundary edge,
  // for the stored edge orientation
  std::vector<std::array<double, 2>> edge_tangents;
};

// Immutable oriented surface discretization with DEC weights.
// star0 = vertex dual area, star1 = dual length / primal length,
// star2 = 1 / face area.
struct Mesh {
  Topology topology = Topology::Torus;
  std::vector<Vec3> positions;
  std::vector<double> dual_area;
  std::vector<Edge> edges;
  std::vector<Face> faces;
  double total_area = 0.0;

  // builder parameters, kept for snapshot descriptors
  int param_nx = 0, param_ny = 0;
  double param_lx = 0.0, param_ly = 0.0;
  int param_subdivisions = 0;
  double param_radius = 0.0;

  int vertex_count() const { return static_cast<int>(positions.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }
  int face_count() const { return static_cast<int>(faces.size()); }
  int euler_characteristic() const {
    return vertex_count() - edge_count() + face_count();
  }

  double star0(int v) const { return dual_area[v]; }
  double star1(int e) const {
    return edges[e].dual_length / edges[e].primal_length;
  }
  double star2(int f) const { return 1.0 / faces[f].area; }

  std::uint64_t incidence_checksum() const;
  nlohmann::json summary_json() const;
};

using MeshPtr = std::shared_ptr<const Mesh>;

// nx-by-ny periodic grid of rectangles on a flat lx-by-ly torus.
MeshPtr build_torus_mesh(int nx, int ny, double lx, double ly);

// Icosahedron subdivided `subdivisions` times, vertices on the radius-r
// sphere, face areas by spherical excess so they partition 4*pi*r^2.
MeshPtr build_sphere_mesh(int subdivisions, double radius);

// Diagonal Hodge weights plus the incidence maps, bundled for callers that
// want the operators as one object.
struct DecOperators {
  MeshPtr mesh;
  std::vector<double> star0, star1, star2;

  // d0: vertex functions -> edge values (head minus tail)
  template <class T>
  std::vector<T> d0(const std::vector<T>& vert) const {
    std::vector<T> out(mesh->edges.size());
    for (std::size_t e = 0; e < mesh->edges.size(); ++e)
      out[e] = vert[mesh->edges[e].head] - vert[mesh->edges[e].tail];
    return out;
  }

  // d1: edge values -> face values (signed boundary sum)
  template <class T>
  std::vector<T> d1(const std::vector<T>& edge) const {
    std::vector<T> out(mesh->faces.size(), T{});
    for (std::size_t f = 0; f < mesh->faces.size(); ++f) {
      const Face& face = mesh->faces[f];
      T acc{};
      for (std::size_t k = 0; k < face.edges.size(); ++k)
        acc += static_cast<double>(face.signs[k]) * edge[face.edges[k]];
      out[f] = acc;
    }
    return out;
  }

  // transpose maps (plain incidence transposes, no Hodge weights)
  template <class T>
  std::vector<T> d0t(const std::vector<T>& edge) const {
    std::vector<T> out(mesh->positions.size(), T{});
    for (std::size_t e = 0; e < mesh->edges.size(); ++e) {
      out[mesh->edges[e].head] += edge[e];
      out[mesh->edges[e].tail] -= edge[e];
    }
    return out;
  }

  template <class T>
  std::vector<T> d1t(const std::vector<T>& face) const {
    std::vector<T> out(mesh->edges.size(), T{});
    for (std::size_t f = 0; f < mesh->faces.size(); ++f) {
      const Face& fc = mesh->faces[f];
      for (std::size_t k = 0; k < fc.edges.size(); ++k)
        out[fc.edges[k]] += static_cast<double>(fc.signs[k]) * face[f];
    }
    return out;
  }
};

DecOperators dec_operators(const MeshPtr& mesh);

}  // namespace vortexlab
