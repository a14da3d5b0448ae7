#pragma once

#include "kinflow/mesh.hpp"
#include "kinflow/state.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace kinflow {

/// Legacy ASCII VTK unstructured grid of the listed cells with cell data
/// density, velocity, pressure and Mach number. `fields[k]` belongs to
/// `cells[k]`.
void write_vtk(const std::filesystem::path& path, const Mesh& mesh, std::span<const int> cells,
               std::span<const State<double>> fields, double gamma);

struct CheckpointHeader {
  std::uint64_t cells = 0;
  double time = 0.0;
  std::uint64_t step = 0;
  double gamma = 1.4;
  std::string precision = "fp64";
};

/// One line of JSON followed by cells x 5 little-endian float64 values.
void write_checkpoint(const std::filesystem::path& path, const CheckpointHeader& header,
                      std::span<const State<double>> fields);

struct Checkpoint {
  CheckpointHeader header;
  std::vector<State<double>> fields;
};

Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace kinflow
