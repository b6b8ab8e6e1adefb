// Binary field container. Layout in docs/snapshot_format.md.
#pragma once

#include "lowmach/incompressible_mhd.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace lowmach {

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SnapshotField {
  std::string name;
  /// Grid-point major: sample i, component c at data[i * components + c].
  int components = 1;
  std::vector<double> data;
};

struct Snapshot {
  /// Free-form header; kind, grid and time keys are filled by the
  /// state converters below.
  nlohmann::json metadata = nlohmann::json::object();
  int dim = 2;
  Index n = 0;
  std::vector<SnapshotField> fields;

  const SnapshotField& field(const std::string& name) const;
};

void write_snapshot(const std::filesystem::path& path, const Snapshot& snap);
Snapshot read_snapshot(const std::filesystem::path& path);

Snapshot to_snapshot(const SpectralGrid& grid, const CompressibleState& state);
Snapshot to_snapshot(const SpectralGrid& grid, const IncompressibleState& state);

/// Throw SnapshotError when the kind or grid does not match.
CompressibleState compressible_from_snapshot(const SpectralGrid& grid, const Snapshot& snap);
IncompressibleState incompressible_from_snapshot(const SpectralGrid& grid, const Snapshot& snap);

}  // namespace lowmach
