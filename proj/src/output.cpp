#include "kinflow/output.hpp"

#include "kinflow/error.hpp"

#include <json.hpp>

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>

namespace kinflow {

namespace {

/// Shortest representation that reads back to the same double.
std::string exact(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

std::ofstream open_for_writing(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

void write_vtk(const std::filesystem::path& path, const Mesh& mesh, std::span<const int> cells,
               std::span<const State<double>> fields, double gamma) {
  if (cells.size() != fields.size()) throw IoError("VTK output needs one state per cell");
  std::unordered_map<int, int> pointOf;
  std::vector<int> points;
  for (int c : cells)
    for (int node : mesh.cells[c].nodes)
      if (pointOf.emplace(node, static_cast<int>(points.size())).second) points.push_back(node);

  std::ofstream out = open_for_writing(path);
  out << "# vtk DataFile Version 3.0\nkinflow solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << points.size() << " double\n";
  for (int node : points) {
    const Vec3& x = mesh.nodes[node];
    out << exact(x.x()) << ' ' << exact(x.y()) << ' ' << exact(x.z()) << '\n';
  }
  std::size_t entries = 0;
  for (int c : cells) entries += 1 + mesh.cells[c].nodes.size();
  out << "CELLS " << cells.size() << ' ' << entries << '\n';
  for (int c : cells) {
    out << mesh.cells[c].nodes.size();
    for (int node : mesh.cells[c].nodes) out << ' ' << pointOf.at(node);
    out << '\n';
  }
  out << "CELL_TYPES " << cells.size() << '\n';
  for (int c : cells) out << (mesh.cells[c].kind == CellKind::Tetrahedron ? 10 : 12) << '\n';

  out << "CELL_DATA " << cells.size() << '\n';
  out << "SCALARS density double 1\nLOOKUP_TABLE default\n";
  for (const auto& s : fields) out << exact(s[0]) << '\n';
  out << "VECTORS velocity double\n";
  for (const auto& s : fields) out << exact(s[1] / s[0]) << ' ' << exact(s[2] / s[0]) << ' ' << exact(s[3] / s[0]) << '\n';
  out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (const auto& s : fields) out << exact(to_primitive(s, gamma).p) << '\n';
  out << "SCALARS mach double 1\nLOOKUP_TABLE default\n";
  for (const auto& s : fields) {
    const Primitive q = to_primitive(s, gamma);
    out << exact(std::sqrt(q.u * q.u + q.v * q.v + q.w * q.w) / sound_speed(q, gamma)) << '\n';
  }
  if (!out) throw IoError("failed while writing " + path.string());
}

void write_checkpoint(const std::filesystem::path& path, const CheckpointHeader& header,
                      std::span<const State<double>> fields) {
  if (header.cells != fields.size()) throw IoError("checkpoint header does not match the field size");
  const nlohmann::json meta = {{"format", "kinflow-checkpoint"},
                               {"version", 1},
                               {"cells", header.cells},
                               {"variables", kNumVars},
                               {"encoding", "float64-le"},
                               {"time", header.time},
                               {"step", header.step},
                               {"gamma", header.gamma},
                               {"precision", header.precision}};
  std::ofstream out = open_for_writing(path, std::ios::out | std::ios::binary);
  out << meta.dump() << '\n';
  std::vector<char> bytes(fields.size() * kNumVars * 8);
  std::size_t k = 0;
  for (const auto& s : fields)
    for (double v : s) {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      for (int b = 0; b < 8; ++b) bytes[k++] = static_cast<char>((bits >> (8 * b)) & 0xff);
    }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed while writing " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::string line;
  std::getline(in, line);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("checkpoint " + path.string() + " has an invalid header: " + e.what());
  }
  if (meta.value("format", "") != "kinflow-checkpoint" || meta.value("encoding", "") != "float64-le" ||
      meta.value("variables", 0) != kNumVars)
    throw IoError("checkpoint " + path.string() + " has an unsupported layout");
  Checkpoint cp;
  cp.header.cells = meta.at("cells").get<std::uint64_t>();
  cp.header.time = meta.at("time").get<double>();
  cp.header.step = meta.at("step").get<std::uint64_t>();
  cp.header.gamma = meta.at("gamma").get<double>();
  cp.header.precision = meta.at("precision").get<std::string>();

  std::vector<char> bytes(cp.header.cells * kNumVars * 8);
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw IoError("checkpoint " + path.string() + " is truncated");
  cp.fields.resize(cp.header.cells);
  std::size_t k = 0;
  for (auto& s : cp.fields)
    for (double& v : s) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= std::uint64_t(static_cast<unsigned char>(bytes[k++])) << (8 * b);
      v = std::bit_cast<double>(bits);
    }
  return cp;
}

}  // namespace kinflow
