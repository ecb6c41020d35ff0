#include "vortexlab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "vortexlab/errors.hpp"

namespace vortexlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_keys(const nlohmann::json& obj, const std::string& where,
                const std::vector<std::string>& allowed,
                std::vector<std::string>& problems) {
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      problems.push_back(where + ": unknown key '" + item.key() + "'");
  }
}

template <typename T>
void read_field(const nlohmann::json& obj, const std::string& where,
                const std::string& key, T& target,
                std::vector<std::string>& problems) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    problems.push_back(where + "." + key + ": wrong type");
  }
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& doc) {
  ExperimentConfig config;
  std::vector<std::string> problems;

  check_keys(doc, "config",
             {"geometry", "degree", "epsilon", "seed", "solve", "spectrum",
              "output"},
             problems);

  if (!doc.contains("geometry")) {
    problems.push_back("config.geometry: missing");
  } else {
    const auto& geo = doc.at("geometry");
    check_keys(geo, "geometry", {"torus", "sphere"}, problems);
    const bool has_torus = geo.contains("torus");
    const bool has_sphere = geo.contains("sphere");
    if (has_torus && has_sphere)
      problems.push_back("geometry: both torus and sphere blocks present");
    else if (!has_torus && !has_sphere)
      problems.push_back("geometry: one of torus or sphere is required");
    else if (has_torus) {
      config.geometry.is_torus = true;
      const auto& t = geo.at("torus");
      check_keys(t, "geometry.torus", {"nx", "ny", "lx", "ly"}, problems);
      read_field(t, "geometry.torus", "nx", config.geometry.nx, problems);
      read_field(t, "geometry.torus", "ny", config.geometry.ny, problems);
      read_field(t, "geometry.torus", "lx", config.geometry.lx, problems);
      read_field(t, "geometry.torus", "ly", config.geometry.ly, problems);
      if (config.geometry.nx < 2) problems.push_back("geometry.torus.nx: must be >= 2");
      if (config.geometry.ny < 2) problems.push_back("geometry.torus.ny: must be >= 2");
      if (config.geometry.lx < 0.0) problems.push_back("geometry.torus.lx: must be positive");
      if (config.geometry.ly < 0.0) problems.push_back("geometry.torus.ly: must be positive");
    } else {
      config.geometry.is_torus = false;
      const auto& s = geo.at("sphere");
      check_keys(s, "geometry.sphere", {"subdivisions", "radius"}, problems);
      read_field(s, "geometry.sphere", "subdivisions",
                 config.geometry.subdivisions, problems);
      read_field(s, "geometry.sphere", "radius", config.geometry.radius,
                 problems);
      if (config.geometry.subdivisions < 0)
        problems.push_back("geometry.sphere.subdivisions: must be >= 0");
      if (!(config.geometry.radius > 0.0))
        problems.push_back("geometry.sphere.radius: must be positive");
    }
  }

  read_field(doc, "config", "degree", config.degree, problems);
  read_field(doc, "config", "epsilon", config.epsilon, problems);
  read_field(doc, "config", "seed", config.seed, problems);
  if (!(config.epsilon > 0.0)) problems.push_back("config.epsilon: must be positive");

  if (doc.contains("solve")) {
    const auto& s = doc.at("solve");
    check_keys(s, "solve",
               {"max_iterations", "grad_tolerance", "ls_shrink",
                "ls_sufficient_decrease", "restart_period"},
               problems);
    read_field(s, "solve", "max_iterations", config.solve.max_iterations, problems);
    read_field(s, "solve", "grad_tolerance", config.solve.grad_tolerance, problems);
    read_field(s, "solve", "ls_shrink", config.solve.ls_shrink, problems);
    read_field(s, "solve", "ls_sufficient_decrease",
               config.solve.ls_sufficient_decrease, problems);
    read_field(s, "solve", "restart_period", config.solve.restart_period, problems);
    if (!(config.solve.grad_tolerance > 0.0))
      problems.push_back("solve.grad_tolerance: must be positive");
    if (!(config.solve.ls_shrink > 0.0 && config.solve.ls_shrink < 1.0))
      problems.push_back("solve.ls_shrink: must lie in (0, 1)");
    if (!(config.solve.ls_sufficient_decrease > 0.0 &&
          config.solve.ls_sufficient_decrease <= 0.5))
      problems.push_back("solve.ls_sufficient_decrease: must lie in (0, 0.5]");
    if (config.solve.restart_period < 1)
      problems.push_back("solve.restart_period: must be >= 1");
    if (config.solve.max_iterations < 0)
      problems.push_back("solve.max_iterations: must be >= 0");
  }

  if (doc.contains("spectrum")) {
    const auto& s = doc.at("spectrum");
    check_keys(s, "spectrum", {"k", "tolerance"}, problems);
    read_field(s, "spectrum", "k", config.spectrum.k, problems);
    read_field(s, "spectrum", "tolerance", config.spectrum.tolerance, problems);
    if (config.spectrum.k < 1) problems.push_back("spectrum.k: must be >= 1");
    if (!(config.spectrum.tolerance > 0.0))
      problems.push_back("spectrum.tolerance: must be positive");
  }

  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    check_keys(o, "output", {"out", "fields_dir", "log"}, problems);
    read_field(o, "output", "out", config.output.out, problems);
    read_field(o, "output", "fields_dir", config.output.fields_dir, problems);
    read_field(o, "output", "log", config.output.log, problems);
  }

  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "invalid config (" << problems.size() << " problem"
        << (problems.size() > 1 ? "s" : "") << "):";
    for (const auto& p : problems) msg << "\n  - " << p;
    throw ConfigError(msg.str());
  }
  return config;
}

MeshPtr build_mesh(const GeometryConfig& geometry) {
  if (geometry.is_torus) {
    const double lx = geometry.lx > 0.0 ? geometry.lx : kTwoPi;
    const double ly = geometry.ly > 0.0 ? geometry.ly : kTwoPi;
    return build_torus_mesh(geometry.nx, geometry.ny, lx, ly);
  }
  return build_sphere_mesh(geometry.subdivisions, geometry.radius);
}

nlohmann::json resolved_config_json(const ExperimentConfig& config) {
  nlohmann::json geo;
  if (config.geometry.is_torus) {
    geo["torus"] = {{"nx", config.geometry.nx},
                    {"ny", config.geometry.ny},
                    {"lx", config.geometry.lx > 0.0 ? config.geometry.lx : kTwoPi},
                    {"ly", config.geometry.ly > 0.0 ? config.geometry.ly : kTwoPi}};
  } else {
    geo["sphere"] = {{"subdivisions", config.geometry.subdivisions},
                     {"radius", config.geometry.radius}};
  }
  return nlohmann::json{
      {"geometry", geo},
      {"degree", config.degree},
      {"epsilon", config.epsilon},
      {"seed", config.seed},
      {"threads", config.threads},
      {"solve",
       {{"max_iterations", config.solve.max_iterations},
        {"grad_tolerance", config.solve.grad_tolerance},
        {"ls_shrink", config.solve.ls_shrink},
        {"ls_sufficient_decrease", config.solve.ls_sufficient_decrease},
        {"restart_period", config.solve.restart_period}}},
      {"spectrum",
       {{"k", config.spectrum.k}, {"tolerance", config.spectrum.tolerance}}},
  };
}

std::vector<double> parse_epsilon_range(const std::string& text) {
  double start = 0.0, stop = 0.0;
  int count = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> start >> c1 >> stop >> c2 >> count) || c1 != ':' || c2 != ':' ||
      !in.eof())
    throw ConfigError("epsilon range: expected start:stop:count, got '" + text + "'");
  if (count < 1) throw ConfigError("epsilon range: count must be >= 1");
  if (!(start > 0.0) || !(stop > 0.0))
    throw ConfigError("epsilon range: endpoints must be positive");
  std::vector<double> values(count);
  if (count == 1) {
    values[0] = start;
  } else {
    for (int i = 0; i < count; ++i)
      values[i] = start + (stop - start) * i / (count - 1);
  }
  return values;
}

namespace {

double sup_abs(const std::vector<Complex>& u) {
  double s = 0.0;
  for (const Complex& c : u) s = std::max(s, std::abs(c));
  return s;
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

nlohmann::json energy_json(const EnergyBreakdown& e) {
  return {{"curvature_term", e.curvature_term},
          {"kinetic_term", e.kinetic_term},
          {"potential_term", e.potential_term},
          {"total", e.total}};
}

nlohmann::json defects_json(const BogomolnySplit& split) {
  return {{"defect_plus", split.defect_plus},
          {"defect_minus", split.defect_minus},
          {"topological", split.topological}};
}

nlohmann::json census_json(const VortexCensus& census) {
  nlohmann::json zeros = nlohmann::json::array();
  for (const auto& [face, winding] : census.zeros)
    zeros.push_back({{"face", face}, {"winding", winding}});
  return {{"total_winding", census.total_winding},
          {"zeros", zeros},
          {"degenerate_warning", census.degenerate_warning}};
}

nlohmann::json spectrum_json(const SpectrumResult& spec) {
  return {{"eigenvalues", spec.eigenvalues},
          {"gauge_mode_count", spec.gauge_mode_count},
          {"iterations", spec.iterations},
          {"max_residual", spec.max_residual},
          {"op_norm_estimate", spec.op_norm_estimate},
          {"converged", spec.converged},
          {"variation_space", "finite-dimensional lattice"}};
}

nlohmann::json verdict_json(const StabilityVerdict& verdict) {
  return {{"is_stable", verdict.is_stable},
          {"lambda1", verdict.lambda1},
          {"energy_total", verdict.energy_total},
          {"defect_plus", verdict.defect_plus},
          {"defect_minus", verdict.defect_minus},
          {"vortex_residual", verdict.vortex_residual},
          {"satisfies_vortex", verdict.satisfies_vortex},
          {"zero_section_tag", verdict.zero_section_tag},
          {"theorem_consistent", verdict.theorem_consistent},
          {"spectrum", spectrum_json(verdict.spectrum)}};
}

void emit_report(const nlohmann::json& report, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << report.dump(2) << std::endl;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw ConfigError("cannot open report path '" + out_path + "'");
  out << report.dump(2) << '\n';
}

Vec3 face_centroid(const Mesh& mesh, int f) {
  Vec3 c;
  for (int v : mesh.faces[f].vertices) {
    c.x += mesh.positions[v].x;
    c.y += mesh.positions[v].y;
    c.z += mesh.positions[v].z;
  }
  const double n = static_cast<double>(mesh.faces[f].vertices.size());
  return {c.x / n, c.y / n, c.z / n};
}

// gnuplot-style whitespace columns: id x y z value
void write_vertex_field(const Mesh& mesh, const std::vector<double>& value,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open field dump '" + path + "'");
  out.precision(17);
  out << "# id x y z value\n";
  for (int v = 0; v < mesh.vertex_count(); ++v)
    out << v << ' ' << mesh.positions[v].x << ' ' << mesh.positions[v].y << ' '
        << mesh.positions[v].z << ' ' << value[v] << '\n';
}

void write_face_field(const Mesh& mesh, const std::vector<double>& value,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open field dump '" + path + "'");
  out.precision(17);
  out << "# id x y z value\n";
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Vec3 c = face_centroid(mesh, f);
    out << f << ' ' << c.x << ' ' << c.y << ' ' << c.z << ' ' << value[f] << '\n';
  }
}

std::vector<double> read_field_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open field dump '" + path + "'");
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    long id;
    double x, y, z, value;
    if (!(row >> id >> x >> y >> z >> value))
      throw ConfigError("field dump '" + path + "': malformed row");
    values.push_back(value);
  }
  return values;
}

void dump_fields(const Configuration& config, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const Mesh& mesh = *config.mesh();
  const DiagnosticsReport rep = diagnostics(config);
  write_vertex_field(mesh, rep.h, dir + "/h.csv");
  write_face_field(mesh, rep.f, dir + "/f.csv");
  write_face_field(mesh, rep.sigma_norm_sq_plus, dir + "/sigma_plus.csv");
  write_face_field(mesh, rep.sigma_norm_sq_minus, dir + "/sigma_minus.csv");
}

ExperimentConfig config_from_snapshot(const Snapshot& snapshot) {
  ExperimentConfig config;
  const Mesh& mesh = *snapshot.config.mesh();
  if (mesh.topology == Topology::Torus) {
    config.geometry.is_torus = true;
    config.geometry.nx = mesh.param_nx;
    config.geometry.ny = mesh.param_ny;
    config.geometry.lx = mesh.param_lx;
    config.geometry.ly = mesh.param_ly;
  } else {
    config.geometry.is_torus = false;
    config.geometry.subdivisions = mesh.param_subdivisions;
    config.geometry.radius = mesh.param_radius;
  }
  config.degree = snapshot.config.connection.degree;
  config.epsilon = snapshot.config.epsilon;
  config.seed = snapshot.provenance.seed;
  return config;
}

// flags shared by the geometry-driven subcommands
struct CommonFlags {
  std::string config_path;
  std::string geometry;
  int nx = 0, ny = 0, subdiv = -1;
  double lx = 0.0, ly = 0.0, radius = 0.0;
  int degree = 0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  double grad_tol = 0.0;
  int max_iters = -1;
  int restart_period = 0;
  int k = 0;
  double spectrum_tol = 0.0;
  std::string out, fields_dir, log;

  CLI::App* cmd = nullptr;

  void attach(CLI::App* sub, bool with_solver, bool with_spectrum) {
    cmd = sub;
    sub->add_option("--config", config_path, "JSON experiment config");
    sub->add_option("--geometry", geometry, "torus or sphere")
        ->check(CLI::IsMember({"torus", "sphere"}));
    sub->add_option("--nx", nx, "torus grid size in x");
    sub->add_option("--ny", ny, "torus grid size in y");
    sub->add_option("--lx", lx, "torus length in x (default 2*pi)");
    sub->add_option("--ly", ly, "torus length in y (default 2*pi)");
    sub->add_option("--subdiv", subdiv, "icosphere subdivision level");
    sub->add_option("--radius", radius, "sphere radius");
    sub->add_option("--degree", degree, "bundle degree d");
    sub->add_option("--epsilon", epsilon, "coupling epsilon");
    sub->add_option("--seed", seed, "random seed");
    if (with_solver) {
      sub->add_option("--grad-tol", grad_tol, "solver gradient tolerance");
      sub->add_option("--max-iters", max_iters, "solver iteration cap");
      sub->add_option("--restart-period", restart_period,
                      "CG restart / gauge re-fix cadence");
      sub->add_option("--log", log, "per-iteration progress CSV");
    }
    if (with_spectrum) {
      sub->add_option("--k", k, "number of eigenvalues");
      sub->add_option("--tol", spectrum_tol, "eigensolver residual tolerance");
    }
    sub->add_option("--out", out, "report JSON path (stdout when omitted)");
    sub->add_option("--fields-dir", fields_dir, "directory for field dumps");
  }

  bool passed(const std::string& name) const {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  }

  ExperimentConfig resolve(bool default_sphere = false) const {
    ExperimentConfig config;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot open config '" + config_path + "'");
      nlohmann::json doc;
      try {
        in >> doc;
      } catch (const nlohmann::json::exception& err) {
        throw ConfigError(std::string("config parse failure: ") + err.what());
      }
      config = parse_config(doc);
    } else if (default_sphere) {
      config.geometry.is_torus = false;
    }
    if (passed("--geometry")) config.geometry.is_torus = (geometry == "torus");
    if (passed("--nx")) config.geometry.nx = nx;
    if (passed("--ny")) config.geometry.ny = ny;
    if (passed("--lx")) config.geometry.lx = lx;
    if (passed("--ly")) config.geometry.ly = ly;
    if (passed("--subdiv")) config.geometry.subdivisions = subdiv;
    if (passed("--radius")) config.geometry.radius = radius;
    if (passed("--degree")) config.degree = degree;
    if (passed("--epsilon")) config.epsilon = epsilon;
    if (passed("--seed")) config.seed = seed;
    if (passed("--grad-tol")) config.solve.grad_tolerance = grad_tol;
    if (passed("--max-iters")) config.solve.max_iterations = max_iters;
    if (passed("--restart-period")) config.solve.restart_period = restart_period;
    if (passed("--k")) config.spectrum.k = k;
    if (passed("--tol")) config.spectrum.tolerance = spectrum_tol;
    if (passed("--out")) config.output.out = out;
    if (passed("--fields-dir")) config.output.fields_dir = fields_dir;
    if (passed("--log")) config.output.log = log;

    if (!(config.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    config.solve.seed = config.seed;
    config.solve.progress_log = config.output.log;

    const char* threads_env = std::getenv("VORTEXLAB_THREADS");
    if (threads_env) config.threads = std::max(1, std::atoi(threads_env));
    return config;
  }
};

nlohmann::json minimize_report_body(const MinimizeResult& result) {
  const Configuration& config = result.config;
  nlohmann::json body;
  body["converged"] = result.converged;
  body["iterations"] = result.iterations;
  body["final_grad_norm"] = result.final_grad_norm;
  body["gauge_fix_energy_drift"] = result.gauge_fix_energy_drift;
  body["energy"] = energy_json(energy(config));
  body["defects"] = defects_json(bogomolny_split(config));
  const auto [res_u, res_a] = el_residual(config);
  body["el_residual"] = {{"u", res_u}, {"a", res_a}};
  body["census"] = census_json(vortex_census(config));
  const auto [max_p, max_m] = pointwise_bound_check(config);
  body["pointwise"] = {{"max_f_minus_h", max_p}, {"max_negf_minus_h", max_m}};
  body["sup_u"] = sup_abs(config.section.value);
  return body;
}

int cmd_mesh_info(const ExperimentConfig& config) {
  const MeshPtr mesh = build_mesh(config.geometry);
  nlohmann::json report;
  report["command"] = "mesh-info";
  report["resolved_config"] = resolved_config_json(config);
  report["mesh"] = mesh->summary_json();
  emit_report(report, config.output.out);
  return 0;
}

int cmd_minimize(const ExperimentConfig& config, const std::string& snapshot_out,
                 const std::vector<std::string>& args) {
  const MeshPtr mesh = build_mesh(config.geometry);
  const Configuration initial =
      random_configuration(mesh, config.degree, config.epsilon, config.seed);
  const MinimizeResult result = minimize(initial, config.solve);

  nlohmann::json report;
  report["command"] = "minimize";
  report["resolved_config"] = resolved_config_json(config);
  report["result"] = minimize_report_body(result);

  if (!snapshot_out.empty()) {
    Snapshot snapshot;
    snapshot.config = result.config;
    std::string cmdline = "vortexlab";
    for (const auto& a : args) cmdline += " " + a;
    snapshot.provenance = {cmdline, config.seed, utc_timestamp()};
    save_snapshot(snapshot, snapshot_out);
    report["snapshot_path"] = snapshot_out;
  }
  if (!config.output.fields_dir.empty()) {
    dump_fields(result.config, config.output.fields_dir);
    report["fields_dir"] = config.output.fields_dir;
  }
  emit_report(report, config.output.out);
  return result.converged ? 0 : 2;
}

int cmd_spectrum(const ExperimentConfig& overrides, const std::string& snapshot_path) {
  const Snapshot snapshot = load_snapshot(snapshot_path);
  ExperimentConfig config = config_from_snapshot(snapshot);
  config.spectrum = overrides.spectrum;
  config.output = overrides.output;
  config.threads = overrides.threads;

  const SpectrumResult spec = smallest_hessian_eigs(
      snapshot.config, config.spectrum.k, config.spectrum.tolerance);
  nlohmann::json report;
  report["command"] = "spectrum";
  report["resolved_config"] = resolved_config_json(config);
  report["snapshot"] = snapshot_path;
  report["spectrum"] = spectrum_json(spec);
  emit_report(report, config.output.out);
  return spec.converged ? 0 : 2;
}

int cmd_kuwabara(const ExperimentConfig& config) {
  const MeshPtr mesh = build_mesh(config.geometry);
  const Connection conn = background_connection(mesh, config.degree);
  const SpectrumResult spec = magnetic_laplacian_eigs(conn, config.spectrum.k);

  nlohmann::json report;
  report["command"] = "kuwabara";
  report["resolved_config"] = resolved_config_json(config);
  report["spectrum"] = spectrum_json(spec);
  report["lambda1"] = spec.eigenvalues.front();
  emit_report(report, config.output.out);
  return spec.converged ? 0 : 2;
}

int cmd_zero_section(const ExperimentConfig& config) {
  const MeshPtr mesh = build_mesh(config.geometry);
  VerdictTolerances tol;
  tol.spectrum_k = config.spectrum.k;
  tol.spectrum_tol = config.spectrum.tolerance;
  const StabilityVerdict verdict =
      zero_section_report(mesh, config.degree, config.epsilon, tol);

  nlohmann::json report;
  report["command"] = "zero-section";
  report["resolved_config"] = resolved_config_json(config);
  report["verdict"] = verdict_json(verdict);
  emit_report(report, config.output.out);
  return 0;
}

int cmd_bradlow_scan(const ExperimentConfig& config, const std::string& epsilons) {
  const std::vector<double> schedule = parse_epsilon_range(epsilons);
  const MeshPtr mesh = build_mesh(config.geometry);
  const Configuration initial =
      random_configuration(mesh, config.degree, schedule.front(), config.seed);
  const std::vector<MinimizeResult> stages =
      continue_in_epsilon(initial, schedule, config.solve);

  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const MinimizeResult& stage = stages[i];
    const BogomolnySplit split = bogomolny_split(stage.config);
    rows.push_back({{"epsilon", schedule[i]},
                    {"sup_u", sup_abs(stage.config.section.value)},
                    {"energy", energy(stage.config).total},
                    {"defect_plus", split.defect_plus},
                    {"converged", stage.converged}});
  }

  nlohmann::json report;
  report["command"] = "bradlow-scan";
  report["resolved_config"] = resolved_config_json(config);
  report["rows"] = rows;

  if (!config.output.fields_dir.empty()) {
    std::filesystem::create_directories(config.output.fields_dir);
    const std::string csv = config.output.fields_dir + "/bradlow_scan.csv";
    std::ofstream out(csv);
    if (!out) throw ConfigError("cannot open '" + csv + "'");
    out.precision(17);
    out << "# epsilon sup_u energy defect_plus\n";
    for (const auto& row : rows)
      out << row["epsilon"].get<double>() << ' ' << row["sup_u"].get<double>()
          << ' ' << row["energy"].get<double>() << ' '
          << row["defect_plus"].get<double>() << '\n';
    report["csv_path"] = csv;
  }
  emit_report(report, config.output.out);

  bool all_converged = true;
  for (const auto& stage : stages) all_converged = all_converged && stage.converged;
  return all_converged ? 0 : 2;
}

int cmd_diagnose(const ExperimentConfig& overrides, const std::string& snapshot_path) {
  const Snapshot snapshot = load_snapshot(snapshot_path);
  ExperimentConfig config = config_from_snapshot(snapshot);
  config.output = overrides.output;
  config.threads = overrides.threads;
  const Configuration& state = snapshot.config;

  nlohmann::json report;
  report["command"] = "diagnose";
  report["resolved_config"] = resolved_config_json(config);
  report["snapshot"] = snapshot_path;
  report["energy"] = energy_json(energy(state));
  report["defects"] = defects_json(bogomolny_split(state));
  const auto [res_u, res_a] = el_residual(state);
  report["el_residual"] = {{"u", res_u}, {"a", res_a}};
  const auto [max_p, max_m] = pointwise_bound_check(state);
  report["pointwise"] = {{"max_f_minus_h", max_p}, {"max_negf_minus_h", max_m}};
  report["census"] = census_json(vortex_census(state));
  const IdentityResiduals ids = identity_residuals(state);
  report["identity_residuals"] = {
      {"res_a", ids.res_a},
      {"res_d", ids.res_d},
      {"res_e", ids.res_e},
      {"note", "identities for the curvature and covariant-derivative "
               "Laplacians are monitored qualitatively only"}};
  report["sup_u"] = sup_abs(state.section.value);

  int exit_code = 0;
  if (!overrides.output.fields_dir.empty()) {
    const std::string dir = overrides.output.fields_dir;
    const DiagnosticsReport rep = diagnostics(state);
    double max_diff = 0.0;
    auto compare = [&max_diff](const std::vector<double>& expected,
                               const std::vector<double>& loaded,
                               const std::string& name) {
      if (expected.size() != loaded.size())
        throw ConfigError("field dump '" + name + "' has wrong length");
      for (std::size_t i = 0; i < expected.size(); ++i)
        max_diff = std::max(max_diff, std::abs(expected[i] - loaded[i]));
    };
    compare(rep.h, read_field_values(dir + "/h.csv"), "h");
    compare(rep.f, read_field_values(dir + "/f.csv"), "f");
    compare(rep.sigma_norm_sq_plus, read_field_values(dir + "/sigma_plus.csv"),
            "sigma_plus");
    compare(rep.sigma_norm_sq_minus, read_field_values(dir + "/sigma_minus.csv"),
            "sigma_minus");
    const bool match = max_diff <= 1e-12;
    report["fields_comparison"] = {
        {"dir", dir}, {"max_abs_diff", max_diff}, {"match", match}};
    if (!match) exit_code = 2;
  }
  emit_report(report, config.output.out);
  return exit_code;
}

int cmd_verdict(const ExperimentConfig& overrides, const std::string& snapshot_path,
                double residual_tol) {
  const Snapshot snapshot = load_snapshot(snapshot_path);
  ExperimentConfig config = config_from_snapshot(snapshot);
  config.spectrum = overrides.spectrum;
  config.output = overrides.output;
  config.threads = overrides.threads;

  const auto [res_u, res_a] = el_residual(snapshot.config);
  const double scale = std::max(1.0, energy(snapshot.config).total);
  MinimizeResult as_result;
  as_result.config = snapshot.config;
  as_result.converged = std::max(res_u, res_a) <= residual_tol * scale;
  as_result.final_grad_norm = std::max(res_u, res_a);

  VerdictTolerances tol;
  tol.spectrum_k = config.spectrum.k;
  tol.spectrum_tol = config.spectrum.tolerance;
  const StabilityVerdict verdict = theorem_verdict(as_result, tol);

  nlohmann::json report;
  report["command"] = "verdict";
  report["resolved_config"] = resolved_config_json(config);
  report["snapshot"] = snapshot_path;
  report["el_residual"] = {{"u", res_u}, {"a", res_a}};
  report["verdict"] = verdict_json(verdict);
  emit_report(report, config.output.out);
  return 0;
}

void emit_error(const std::string& kind, const std::string& message) {
  nlohmann::json err;
  err["error"] = {{"kind", kind}, {"message", message}};
  std::cerr << err.dump() << std::endl;
}

std::string snapshot_kind(SnapshotError::Kind kind) {
  switch (kind) {
    case SnapshotError::Kind::ChecksumMismatch: return "snapshot-checksum-mismatch";
    case SnapshotError::Kind::VersionMismatch: return "snapshot-version-mismatch";
    case SnapshotError::Kind::Truncated: return "snapshot-truncated";
    case SnapshotError::Kind::Malformed: return "snapshot-malformed";
  }
  return "snapshot";
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"Numerical laboratory for the self-dual abelian Yang-Mills-Higgs "
               "functional on line bundles over the flat torus and round sphere"};
  app.require_subcommand(1);

  CommonFlags mesh_flags, minimize_flags, kuwabara_flags, zero_flags, scan_flags;
  CommonFlags spectrum_flags, diagnose_flags, verdict_flags;

  auto* info = app.add_subcommand("mesh-info", "Mesh summary as JSON");
  mesh_flags.attach(info, false, false);

  auto* mini = app.add_subcommand(
      "minimize", "Minimize the energy from a seeded random configuration");
  minimize_flags.attach(mini, true, false);
  std::string snapshot_out;
  mini->add_option("--snapshot-out", snapshot_out, "write final state here");

  auto* spect = app.add_subcommand(
      "spectrum", "Smallest gauge-orthogonal Hessian eigenvalues at a snapshot");
  spectrum_flags.attach(spect, false, true);
  std::string spectrum_snapshot;
  spect->add_option("--snapshot", spectrum_snapshot, "state to analyze")
      ->required();

  auto* kuwa = app.add_subcommand(
      "kuwabara", "Lowest magnetic Laplacian eigenvalues of the background");
  kuwabara_flags.attach(kuwa, false, true);

  auto* zero = app.add_subcommand(
      "zero-section", "Stability verdict for the zero section");
  zero_flags.attach(zero, false, true);

  auto* scan = app.add_subcommand(
      "bradlow-scan", "Warm-started minimization sweep over an epsilon range");
  scan_flags.attach(scan, true, false);
  std::string epsilons;
  scan->add_option("--epsilons", epsilons, "start:stop:count inclusive")
      ->required();

  auto* diag = app.add_subcommand("diagnose",
                                  "Recompute all diagnostics from a snapshot");
  diagnose_flags.attach(diag, false, false);
  std::string diagnose_snapshot;
  diag->add_option("--snapshot", diagnose_snapshot, "state to analyze")
      ->required();

  auto* verd = app.add_subcommand(
      "verdict", "Stability + vortex verdict for a converged snapshot");
  verdict_flags.attach(verd, false, true);
  std::string verdict_snapshot;
  double residual_tol = 1e-6;
  verd->add_option("--snapshot", verdict_snapshot, "state to judge")->required();
  verd->add_option("--residual-tol", residual_tol,
                   "largest relative EL residual accepted as converged");

  std::vector<char*> argv;
  std::vector<std::string> storage = args;
  storage.insert(storage.begin(), "vortexlab");
  argv.reserve(storage.size());
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (info->parsed()) return cmd_mesh_info(mesh_flags.resolve());
    if (mini->parsed()) return cmd_minimize(minimize_flags.resolve(), snapshot_out, args);
    if (spect->parsed()) return cmd_spectrum(spectrum_flags.resolve(), spectrum_snapshot);
    if (kuwa->parsed()) return cmd_kuwabara(kuwabara_flags.resolve(true));
    if (zero->parsed()) return cmd_zero_section(zero_flags.resolve(true));
    if (scan->parsed()) return cmd_bradlow_scan(scan_flags.resolve(), epsilons);
    if (diag->parsed()) return cmd_diagnose(diagnose_flags.resolve(), diagnose_snapshot);
    if (verd->parsed())
      return cmd_verdict(verdict_flags.resolve(), verdict_snapshot, residual_tol);
  } catch (const ConfigError& e) {
    emit_error("config", e.what());
    return 1;
  } catch (const SnapshotError& e) {
    emit_error(snapshot_kind(e.kind()), e.what());
    return 1;
  } catch (const NumericError& e) {
    emit_error("numeric", e.what());
    return 2;
  }
  return 0;
}

}  // namespace vortexlab
