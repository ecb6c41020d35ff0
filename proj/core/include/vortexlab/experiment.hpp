#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vortexlab/snapshot.hpp"
#include "vortexlab/stability.hpp"

namespace vortexlab {

struct GeometryConfig {
  bool is_torus = true;
  int nx = 64, ny = 64;
  double lx = 0.0, ly = 0.0;  // zero means 2*pi
  int subdivisions = 4;
  double radius = 1.0;
};

struct SpectrumOptions {
  int k = 6;
  double tolerance = 1e-8;
};

struct OutputOptions {
  std::string out;         // report JSON path; stdout when empty
  std::string fields_dir;  // per-field gnuplot-style dumps
  std::string log;         // solver progress CSV
};

struct ExperimentConfig {
  GeometryConfig geometry;
  int degree = 1;
  double epsilon = 0.5;
  std::uint64_t seed = 1;
  SolveOptions solve;
  SpectrumOptions spectrum;
  OutputOptions output;
  int threads = 1;
};

// Strict parse: unknown keys are rejected, every violated field is listed in
// the error message, exactly one geometry block must be present.
ExperimentConfig parse_config(const nlohmann::json& doc);

nlohmann::json resolved_config_json(const ExperimentConfig& config);

MeshPtr build_mesh(const GeometryConfig& geometry);

// "start:stop:count" inclusive linear spacing
std::vector<double> parse_epsilon_range(const std::string& text);

// Full command-line front end; returns the process exit code
// (0 success, 1 validation error, 2 numerical failure).
int run_command(const std::vector<std::string>& args);

}  // namespace vortexlab
