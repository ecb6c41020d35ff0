#include "vortexlab/snapshot.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vortexlab/errors.hpp"

namespace vortexlab {

namespace {

constexpr int kFormatVersion = 1;

std::string checksum_hex(const Mesh& mesh) {
  std::ostringstream out;
  out << "0x" << std::hex << mesh.incidence_checksum();
  return out.str();
}

nlohmann::json mesh_descriptor(const Mesh& mesh) {
  nlohmann::json desc;
  if (mesh.topology == Topology::Torus) {
    desc["type"] = "torus";
    desc["nx"] = mesh.param_nx;
    desc["ny"] = mesh.param_ny;
    desc["lx"] = mesh.param_lx;
    desc["ly"] = mesh.param_ly;
  } else {
    desc["type"] = "sphere";
    desc["subdivisions"] = mesh.param_subdivisions;
    desc["radius"] = mesh.param_radius;
  }
  desc["checksum"] = checksum_hex(mesh);
  return desc;
}

MeshPtr rebuild_mesh(const nlohmann::json& desc) {
  const std::string type = desc.at("type").get<std::string>();
  if (type == "torus")
    return build_torus_mesh(desc.at("nx").get<int>(), desc.at("ny").get<int>(),
                            desc.at("lx").get<double>(),
                            desc.at("ly").get<double>());
  if (type == "sphere")
    return build_sphere_mesh(desc.at("subdivisions").get<int>(),
                             desc.at("radius").get<double>());
  throw SnapshotError(SnapshotError::Kind::Malformed,
                      "snapshot: unknown mesh type '" + type + "'");
}

}  // namespace

void save_snapshot(const Snapshot& snapshot, const std::string& path) {
  const Mesh& mesh = *snapshot.config.mesh();
  nlohmann::json doc;
  doc["format_version"] = snapshot.format_version;
  doc["mesh"] = mesh_descriptor(mesh);
  doc["degree"] = snapshot.config.connection.degree;
  doc["epsilon"] = snapshot.config.epsilon;

  nlohmann::json a = nlohmann::json::array();
  for (double v : snapshot.config.connection.fluctuation) a.push_back(v);
  doc["a"] = std::move(a);

  nlohmann::json u = nlohmann::json::array();
  for (const Complex& c : snapshot.config.section.value) {
    u.push_back(c.real());
    u.push_back(c.imag());
  }
  doc["u"] = std::move(u);

  doc["provenance"] = {{"command", snapshot.provenance.command},
                       {"seed", snapshot.provenance.seed},
                       {"timestamp", snapshot.provenance.timestamp}};

  std::ofstream out(path);
  if (!out) throw ConfigError("snapshot: cannot open '" + path + "' for writing");
  out << doc.dump(2) << '\n';
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("snapshot: cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& err) {
    throw SnapshotError(SnapshotError::Kind::Truncated,
                        std::string("snapshot: unreadable file: ") + err.what());
  }

  Snapshot snapshot;
  try {
    snapshot.format_version = doc.at("format_version").get<int>();
    if (snapshot.format_version != kFormatVersion) {
      std::ostringstream msg;
      msg << "snapshot: format version " << snapshot.format_version
          << " is not supported (expected " << kFormatVersion << ")";
      throw SnapshotError(SnapshotError::Kind::VersionMismatch, msg.str());
    }

    const MeshPtr mesh = rebuild_mesh(doc.at("mesh"));
    const std::string expected = checksum_hex(*mesh);
    const std::string stored = doc.at("mesh").at("checksum").get<std::string>();
    if (stored != expected)
      throw SnapshotError(SnapshotError::Kind::ChecksumMismatch,
                          "snapshot: mesh checksum " + stored +
                              " does not match rebuilt mesh " + expected);

    const int d = doc.at("degree").get<int>();
    snapshot.config.connection = background_connection(mesh, d);
    snapshot.config.epsilon = doc.at("epsilon").get<double>();
    if (!(snapshot.config.epsilon > 0.0))
      throw SnapshotError(SnapshotError::Kind::Malformed,
                          "snapshot: epsilon must be positive");

    const auto& a = doc.at("a");
    if (static_cast<int>(a.size()) != mesh->edge_count())
      throw SnapshotError(SnapshotError::Kind::Truncated,
                          "snapshot: fluctuation array has wrong length");
    for (int e = 0; e < mesh->edge_count(); ++e)
      snapshot.config.connection.fluctuation[e] = a[e].get<double>();

    const auto& u = doc.at("u");
    if (static_cast<int>(u.size()) != 2 * mesh->vertex_count())
      throw SnapshotError(SnapshotError::Kind::Truncated,
                          "snapshot: section array has wrong length");
    snapshot.config.section.mesh = mesh;
    snapshot.config.section.value.resize(mesh->vertex_count());
    for (int v = 0; v < mesh->vertex_count(); ++v)
      snapshot.config.section.value[v] =
          Complex(u[2 * v].get<double>(), u[2 * v + 1].get<double>());

    const auto& prov = doc.at("provenance");
    snapshot.provenance.command = prov.at("command").get<std::string>();
    snapshot.provenance.seed = prov.at("seed").get<std::uint64_t>();
    snapshot.provenance.timestamp = prov.at("timestamp").get<std::string>();
  } catch (const nlohmann::json::exception& err) {
    throw SnapshotError(SnapshotError::Kind::Malformed,
                        std::string("snapshot: malformed document: ") + err.what());
  }
  return snapshot;
}

}  // namespace vortexlab
