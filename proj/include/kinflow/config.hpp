#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kinflow {

enum class CaseKind { AdvectionBox, Sphere, Custom };
enum class Precision { FP32, FP64 };
enum class TimeStepMode { Fixed, Adaptive };
enum class TransportKind { Threads, Mpi };

struct RunConfig {
  CaseKind caseKind = CaseKind::AdvectionBox;
  /// Cubes per axis (advection box) or cells per block edge (sphere shell).
  int n = 10;
  /// Mesh file for the custom case; generated meshes are used otherwise.
  std::filesystem::path mesh;
  int parts = 1;
  /// One partition id per cell; replaces the built-in bisection.
  std::filesystem::path partitionFile;
  Precision precision = Precision::FP64;
  /// Defaults to 0.3 on tetrahedral and 0.5 on hexahedral meshes.
  std::optional<double> cfl;
  double stopTime = 2.0;
  /// Zero means unlimited.
  long maxSteps = 0;
  /// Zero disables interval output (final output is still written).
  double outputInterval = 0.0;
  /// Output directory; empty disables files.
  std::filesystem::path output;
  bool checkpoint = false;
  /// Checkpoint holding the initial fields of the custom case.
  std::filesystem::path initial;

  double gamma = 1.4;
  double mach = 0.2535;
  double reynolds = 118.0;
  double diameter = 1.0;
  double viscosityExponent = 0.7;
  /// Numerical collision-time coefficient; 0 for the advection box and 1
  /// otherwise when unset.
  std::optional<double> c1;
  /// Fixed uses the step of the initial field throughout; the default is
  /// fixed for the advection box and adaptive otherwise.
  std::optional<TimeStepMode> timeStep;
  double outerRadius = 20.0;
  double firstHeight = 0.01;
  /// Treatment of the sphere surface: "noslip" or "farfield".
  std::string wall = "noslip";
  /// Stop once the density residual has dropped this many decades (0 = off).
  double steadyDrop = 0.0;
  /// Wall-clock budget in seconds (0 = unlimited).
  double maxWallTime = 0.0;
  TransportKind transport = TransportKind::Threads;

  /// Sets one key from its textual value; throws ConfigError.
  void set(std::string_view key, std::string_view value);
  /// Checks cross-field consistency; throws ConfigError.
  void validate() const;

  double cfl_for(bool tetrahedral) const { return cfl.value_or(tetrahedral ? 0.3 : 0.5); }
  double c1_value() const { return c1.value_or(caseKind == CaseKind::AdvectionBox ? 0.0 : 1.0); }
  TimeStepMode time_step_mode() const {
    return timeStep.value_or(caseKind == CaseKind::AdvectionBox ? TimeStepMode::Fixed : TimeStepMode::Adaptive);
  }
  bool viscous() const { return caseKind == CaseKind::Sphere && reynolds > 0.0; }
  /// Free-stream viscosity from the diameter-based Reynolds number
  /// (free-stream density and sound speed are 1).
  double free_stream_viscosity() const { return mach * diameter / reynolds; }
};

struct ConfigKey {
  std::string name;
  std::string help;
};

/// Every recognised key; each is also a command-line flag of the same name.
const std::vector<ConfigKey>& config_keys();

/// Parses flat "key = value" lines; '#' starts a comment.
void parse_config(std::istream& in, RunConfig& config, const std::string& source = "<config>");
void load_config(const std::filesystem::path& path, RunConfig& config);

std::string_view to_string(CaseKind kind);
std::string_view to_string(Precision precision);

}  // namespace kinflow
