#include "kinflow/config.hpp"

#include "kinflow/error.hpp"

#include <charconv>
#include <fstream>
#include <istream>

namespace kinflow {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double to_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError("key '" + std::string(key) + "' expects a number, got '" + std::string(value) + "'");
  return out;
}

long to_long(std::string_view key, std::string_view value) {
  long out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError("key '" + std::string(key) + "' expects an integer, got '" + std::string(value) + "'");
  return out;
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError("key '" + std::string(key) + "' expects true or false, got '" + std::string(value) + "'");
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"case", "advection_box, sphere or custom"},
      {"mesh", "mesh file (.msh for Gmsh, native format otherwise)"},
      {"n", "cubes per axis (advection box) or cells per block edge (sphere)"},
      {"parts", "number of partitions"},
      {"partition-file", "file with one partition id per cell"},
      {"precision", "fp32 or fp64"},
      {"cfl", "CFL number"},
      {"stop-time", "final time"},
      {"max-steps", "maximum number of steps (0 = unlimited)"},
      {"output-interval", "time between outputs (0 = final only)"},
      {"output", "output directory"},
      {"checkpoint", "write a checkpoint at the end (true/false)"},
      {"initial", "checkpoint with the initial fields (custom case)"},
      {"gamma", "ratio of specific heats"},
      {"mach", "free-stream Mach number"},
      {"reynolds", "Reynolds number based on the diameter (0 = inviscid)"},
      {"diameter", "sphere diameter"},
      {"viscosity-exponent", "exponent of the viscosity power law"},
      {"c1", "numerical collision-time coefficient"},
      {"time-step", "fixed or adaptive"},
      {"outer-radius", "outer radius of the sphere mesh"},
      {"first-height", "wall-normal height of the first sphere cell layer"},
      {"wall", "sphere surface treatment: noslip or farfield"},
      {"steady-drop", "stop after this many decades of residual drop (0 = off)"},
      {"max-wall-time", "wall-clock budget in seconds (0 = unlimited)"},
      {"transport", "threads or mpi"},
  };
  return keys;
}

void RunConfig::set(std::string_view key, std::string_view rawValue) {
  const std::string value = trim(rawValue);
  if (key == "case") {
    if (value == "advection_box") caseKind = CaseKind::AdvectionBox;
    else if (value == "sphere") caseKind = CaseKind::Sphere;
    else if (value == "custom") caseKind = CaseKind::Custom;
    else throw ConfigError("unknown case '" + value + "'");
  } else if (key == "mesh") {
    mesh = value;
  } else if (key == "n") {
    n = static_cast<int>(to_long(key, value));
  } else if (key == "parts") {
    parts = static_cast<int>(to_long(key, value));
  } else if (key == "partition-file") {
    partitionFile = value;
  } else if (key == "precision") {
    if (value == "fp32") precision = Precision::FP32;
    else if (value == "fp64") precision = Precision::FP64;
    else throw ConfigError("precision must be fp32 or fp64, got '" + value + "'");
  } else if (key == "cfl") {
    cfl = to_double(key, value);
  } else if (key == "stop-time") {
    stopTime = to_double(key, value);
  } else if (key == "max-steps") {
    maxSteps = to_long(key, value);
  } else if (key == "output-interval") {
    outputInterval = to_double(key, value);
  } else if (key == "output") {
    output = value;
  } else if (key == "checkpoint") {
    checkpoint = to_bool(key, value);
  } else if (key == "initial") {
    initial = value;
  } else if (key == "gamma") {
    gamma = to_double(key, value);
  } else if (key == "mach") {
    mach = to_double(key, value);
  } else if (key == "reynolds") {
    reynolds = to_double(key, value);
  } else if (key == "diameter") {
    diameter = to_double(key, value);
  } else if (key == "viscosity-exponent") {
    viscosityExponent = to_double(key, value);
  } else if (key == "c1") {
    c1 = to_double(key, value);
  } else if (key == "time-step") {
    if (value == "fixed") timeStep = TimeStepMode::Fixed;
    else if (value == "adaptive") timeStep = TimeStepMode::Adaptive;
    else throw ConfigError("time-step must be fixed or adaptive, got '" + value + "'");
  } else if (key == "outer-radius") {
    outerRadius = to_double(key, value);
  } else if (key == "first-height") {
    firstHeight = to_double(key, value);
  } else if (key == "wall") {
    if (value != "noslip" && value != "farfield")
      throw ConfigError("wall must be noslip or farfield, got '" + value + "'");
    wall = value;
  } else if (key == "steady-drop") {
    steadyDrop = to_double(key, value);
  } else if (key == "max-wall-time") {
    maxWallTime = to_double(key, value);
  } else if (key == "transport") {
    if (value == "threads") transport = TransportKind::Threads;
    else if (value == "mpi") transport = TransportKind::Mpi;
    else throw ConfigError("transport must be threads or mpi, got '" + value + "'");
  } else {
    throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  }
}

void RunConfig::validate() const {
  if (n < 1) throw ConfigError("n must be at least 1");
  if (parts < 1) throw ConfigError("parts must be at least 1");
  if (cfl && !(*cfl > 0.0)) throw ConfigError("cfl must be positive");
  if (!(stopTime > 0.0)) throw ConfigError("stop-time must be positive");
  if (maxSteps < 0) throw ConfigError("max-steps must not be negative");
  if (outputInterval < 0.0) throw ConfigError("output-interval must not be negative");
  if (!(gamma > 1.0)) throw ConfigError("gamma must exceed 1");
  if (caseKind == CaseKind::Sphere) {
    if (!(mach > 0.0)) throw ConfigError("mach must be positive");
    if (reynolds < 0.0) throw ConfigError("reynolds must not be negative");
    if (!(diameter > 0.0)) throw ConfigError("diameter must be positive");
    if (!(outerRadius > 0.5 * diameter)) throw ConfigError("outer-radius must exceed the sphere radius");
  }
  if (caseKind == CaseKind::Custom) {
    if (mesh.empty()) throw ConfigError("the custom case needs a mesh");
    if (initial.empty()) throw ConfigError("the custom case needs an initial checkpoint");
  }
  if (c1 && *c1 < 0.0) throw ConfigError("c1 must not be negative");
}

void parse_config(std::istream& in, RunConfig& config, const std::string& source) {
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(source, lineNo, "expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ParseError(source, lineNo, "missing key");
    try {
      config.set(key, value);
    } catch (const ConfigError& e) {
      throw ParseError(source, lineNo, e.what());
    }
  }
}

void load_config(const std::filesystem::path& path, RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open configuration file " + path.string());
  parse_config(in, config, path.string());
}

std::string_view to_string(CaseKind kind) {
  switch (kind) {
    case CaseKind::AdvectionBox: return "advection_box";
    case CaseKind::Sphere: return "sphere";
    case CaseKind::Custom: return "custom";
  }
  return "unknown";
}

std::string_view to_string(Precision precision) { return precision == Precision::FP32 ? "fp32" : "fp64"; }

}  // namespace kinflow
