#include "kinflow/error.hpp"
#include "kinflow/mesh.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

namespace kinflow {

namespace {

// Reads non-empty, non-comment lines while tracking line numbers.
class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      return true;
    }
    return false;
  }

  std::string expect(const char* what) {
    std::string line;
    if (!next(line)) fail(std::string("unexpected end of file, expected ") + what);
    return line;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line_, what); }

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 0;
};

std::size_t parse_count(LineReader& reader, const std::string& line, const std::string& keyword) {
  std::istringstream ss(line);
  std::string word;
  long long count = -1;
  if (!(ss >> word >> count) || word != keyword || count < 0)
    reader.fail("expected '" + keyword + " <count>'");
  return static_cast<std::size_t>(count);
}

}  // namespace

MeshData parse_native_mesh(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  MeshData mesh;

  {
    std::istringstream ss(reader.expect("header"));
    std::string magic;
    int version = 0;
    if (!(ss >> magic >> version) || magic != "kinmesh" || version != 1)
      reader.fail("expected header 'kinmesh 1'");
  }

  const std::size_t numNodes = parse_count(reader, reader.expect("nodes"), "nodes");
  mesh.nodes.reserve(numNodes);
  for (std::size_t i = 0; i < numNodes; ++i) {
    std::istringstream ss(reader.expect("node coordinates"));
    double x, y, z;
    if (!(ss >> x >> y >> z)) reader.fail("expected three node coordinates");
    mesh.nodes.emplace_back(x, y, z);
  }

  auto read_ids = [&](std::istringstream& ss, std::size_t count) {
    std::vector<int> ids;
    for (std::size_t k = 0; k < count; ++k) {
      long long id = 0;
      if (!(ss >> id)) reader.fail("expected " + std::to_string(count) + " node ids");
      if (id < 1 || id > static_cast<long long>(numNodes))
        reader.fail("node id " + std::to_string(id) + " out of range");
      ids.push_back(static_cast<int>(id - 1));
    }
    return ids;
  };

  const std::size_t numCells = parse_count(reader, reader.expect("cells"), "cells");
  mesh.cells.reserve(numCells);
  for (std::size_t i = 0; i < numCells; ++i) {
    std::istringstream ss(reader.expect("cell"));
    std::string kind;
    ss >> kind;
    Cell cell;
    if (kind == "tet") {
      cell.kind = CellKind::Tetrahedron;
    } else if (kind == "hex") {
      cell.kind = CellKind::Hexahedron;
    } else {
      throw UnsupportedElementError(source + ":" + std::to_string(reader.line()) +
                                    ": unsupported element '" + kind + "'");
    }
    cell.nodes = read_ids(ss, static_cast<std::size_t>(node_count(cell.kind)));
    mesh.cells.push_back(std::move(cell));
  }

  std::string line;
  if (reader.next(line)) {
    const std::size_t numBoundary = parse_count(reader, line, "boundary");
    for (std::size_t i = 0; i < numBoundary; ++i) {
      std::istringstream ss(reader.expect("boundary face"));
      TaggedFace face;
      if (!(ss >> face.tag)) reader.fail("expected boundary tag");
      long long id = 0;
      while (ss >> id) {
        if (id < 1 || id > static_cast<long long>(numNodes))
          reader.fail("node id " + std::to_string(id) + " out of range");
        face.nodes.push_back(static_cast<int>(id - 1));
      }
      if (face.nodes.size() != 3 && face.nodes.size() != 4)
        reader.fail("boundary face needs 3 or 4 node ids");
      mesh.boundary.push_back(std::move(face));
    }
    if (reader.next(line)) reader.fail("trailing content after boundary section");
  }
  return mesh;
}

MeshData parse_gmsh_mesh(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  MeshData mesh;
  std::map<int, std::string> physicalNames;
  std::unordered_map<long long, int> nodeIndex;

  std::string line;
  bool sawFormat = false;
  while (reader.next(line)) {
    if (line.rfind("$MeshFormat", 0) == 0) {
      std::istringstream ss(reader.expect("format line"));
      double version = 0;
      int fileType = -1;
      ss >> version >> fileType;
      if (version < 2.0 || version >= 3.0 || fileType != 0)
        reader.fail("only ASCII MSH 2.x files are supported");
      reader.expect("$EndMeshFormat");
      sawFormat = true;
    } else if (line.rfind("$PhysicalNames", 0) == 0) {
      std::istringstream cs(reader.expect("count"));
      std::size_t count = 0;
      cs >> count;
      for (std::size_t i = 0; i < count; ++i) {
        std::istringstream ss(reader.expect("physical name"));
        int dim = 0, tag = 0;
        std::string name;
        if (!(ss >> dim >> tag >> std::quoted(name))) reader.fail("malformed physical name");
        physicalNames[tag] = name;
      }
      reader.expect("$EndPhysicalNames");
    } else if (line.rfind("$Nodes", 0) == 0) {
      std::istringstream cs(reader.expect("count"));
      std::size_t count = 0;
      if (!(cs >> count)) reader.fail("expected node count");
      for (std::size_t i = 0; i < count; ++i) {
        std::istringstream ss(reader.expect("node"));
        long long id;
        double x, y, z;
        if (!(ss >> id >> x >> y >> z)) reader.fail("malformed node line");
        nodeIndex[id] = static_cast<int>(mesh.nodes.size());
        mesh.nodes.emplace_back(x, y, z);
      }
      reader.expect("$EndNodes");
    } else if (line.rfind("$Elements", 0) == 0) {
      std::istringstream cs(reader.expect("count"));
      std::size_t count = 0;
      if (!(cs >> count)) reader.fail("expected element count");
      for (std::size_t i = 0; i < count; ++i) {
        std::istringstream ss(reader.expect("element"));
        long long id;
        int type, ntags;
        if (!(ss >> id >> type >> ntags)) reader.fail("malformed element line");
        std::vector<int> tags(static_cast<std::size_t>(ntags));
        for (auto& t : tags) ss >> t;
        int nodes = 0;
        switch (type) {
          case 15: nodes = 1; break;
          case 1: nodes = 2; break;
          case 2: nodes = 3; break;
          case 3: nodes = 4; break;
          case 4: nodes = 4; break;
          case 5: nodes = 8; break;
          default:
            throw UnsupportedElementError(source + ":" + std::to_string(reader.line()) +
                                          ": unsupported gmsh element type " + std::to_string(type));
        }
        std::vector<int> ids;
        for (int k = 0; k < nodes; ++k) {
          long long nid;
          if (!(ss >> nid)) reader.fail("missing element node");
          auto it = nodeIndex.find(nid);
          if (it == nodeIndex.end()) reader.fail("element references unknown node " + std::to_string(nid));
          ids.push_back(it->second);
        }
        if (type == 4 || type == 5) {
          Cell cell;
          cell.kind = type == 4 ? CellKind::Tetrahedron : CellKind::Hexahedron;
          cell.nodes = std::move(ids);
          mesh.cells.push_back(std::move(cell));
        } else if (type == 2 || type == 3) {
          const int phys = tags.empty() ? 0 : tags[0];
          auto it = physicalNames.find(phys);
          TaggedFace face;
          face.tag = it != physicalNames.end() ? it->second : "tag" + std::to_string(phys);
          face.nodes = std::move(ids);
          mesh.boundary.push_back(std::move(face));
        }
      }
      reader.expect("$EndElements");
    } else if (line.rfind('$', 0) == 0) {
      // Skip unknown sections.
      const std::string end = "$End" + line.substr(1);
      std::string inner;
      while (reader.next(inner) && inner.rfind(end, 0) != 0) {
      }
    } else {
      reader.fail("unexpected content '" + line + "'");
    }
  }
  if (!sawFormat) reader.fail("missing $MeshFormat section");
  if (mesh.cells.empty()) reader.fail("no tetrahedra or hexahedra found");
  return mesh;
}

MeshData load_mesh(const std::filesystem::path& path, MeshFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file " + path.string());
  return format == MeshFormat::Native ? parse_native_mesh(in, path.string())
                                      : parse_gmsh_mesh(in, path.string());
}

void write_native_mesh(const MeshData& mesh, std::ostream& out) {
  out << "kinmesh 1\n";
  out << "nodes " << mesh.nodes.size() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& x : mesh.nodes) out << x.x() << ' ' << x.y() << ' ' << x.z() << '\n';
  out << "cells " << mesh.cells.size() << '\n';
  for (const auto& c : mesh.cells) {
    out << (c.kind == CellKind::Tetrahedron ? "tet" : "hex");
    for (int id : c.nodes) out << ' ' << id + 1;
    out << '\n';
  }
  out << "boundary " << mesh.boundary.size() << '\n';
  for (const auto& b : mesh.boundary) {
    out << b.tag;
    for (int id : b.nodes) out << ' ' << id + 1;
    out << '\n';
  }
}

}  // namespace kinflow
