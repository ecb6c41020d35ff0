#pragma once

#include <cstdint>
#include <string>

#include "vortexlab/bundle.hpp"

namespace vortexlab {

struct SnapshotProvenance {
  std::string command;
  std::uint64_t seed = 0;
  std::string timestamp;
};

// Versioned on-disk state: mesh descriptor + checksum, (d, eps), flat field
// arrays. Floats survive the decimal round trip bit-exactly, so
// save -> load -> save reproduces the file byte for byte.
struct Snapshot {
  int format_version = 1;
  Configuration config;
  SnapshotProvenance provenance;
};

void save_snapshot(const Snapshot& snapshot, const std::string& path);
Snapshot load_snapshot(const std::string& path);

}  // namespace vortexlab
