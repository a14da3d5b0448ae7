#include "kinflow/connectivity.hpp"

#include "kinflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace kinflow {

BoundaryConditions BoundaryConditions::defaults() {
  BoundaryConditions bcs;
  bcs.set("periodic_x", BoundaryKind::Periodic);
  bcs.set("periodic_y", BoundaryKind::Periodic);
  bcs.set("periodic_z", BoundaryKind::Periodic);
  bcs.set("wall", BoundaryKind::Wall);
  bcs.set("farfield", BoundaryKind::Farfield);
  return bcs;
}

BoundaryKind BoundaryConditions::kind_of(const std::string& tag) const {
  auto it = kinds_.find(tag);
  if (it == kinds_.end()) throw BoundaryConditionError("no boundary condition for tag '" + tag + "'");
  return it->second;
}

AffineMap AffineMap::reflection(const Vec3& point, const Vec3& normal) {
  const Vec3 n = normal.normalized();
  AffineMap m;
  m.linear = Eigen::Matrix3d::Identity() - 2.0 * n * n.transpose();
  m.offset = 2.0 * point.dot(n) * n;
  return m;
}

Connectivity build_connectivity(const Mesh& mesh) {
  Connectivity t;
  t.numPhysical = mesh.num_cells();
  t.cellNode.reserve(mesh.cells.size());
  for (const auto& c : mesh.cells) t.cellNode.push_back(c.nodes);
  t.faceNode.reserve(mesh.faces.size());
  for (const auto& f : mesh.faces) t.faceNode.push_back(f.nodes);
  t.cellFace = mesh.cellFaces;

  t.faceCell.resize(mesh.faces.size());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const auto& cells = mesh.faces[f].cells;
    if (cells.empty()) throw ConnectivityError("orphan face " + std::to_string(f));
    if (cells.size() > 2) throw ConnectivityError("non-manifold face " + std::to_string(f));
    if (cells.size() == 2 && cells[0] == cells[1])
      throw ConnectivityError("face " + std::to_string(f) + " appears twice in one cell");
    t.faceCell[f] = {cells[0], cells.size() == 2 ? cells[1] : kNoCell};
  }

  t.cellNeighbor.resize(mesh.cells.size());
  for (int c = 0; c < t.numPhysical; ++c) {
    for (int f : t.cellFace[c]) {
      const auto& fc = t.faceCell[f];
      if (fc[0] != c && fc[1] != c)
        throw ConnectivityError("cell " + std::to_string(c) + " lists face " + std::to_string(f) +
                                " which does not list it back");
      t.cellNeighbor[c].push_back(fc[0] == c ? fc[1] : fc[0]);
    }
  }
  t.periodicPartner.assign(mesh.faces.size(), -1);
  return t;
}

namespace {

int periodic_axis(const std::string& tag) {
  if (tag.size() >= 2 && tag[tag.size() - 2] == '_') {
    switch (tag.back()) {
      case 'x': return 0;
      case 'y': return 1;
      case 'z': return 2;
      default: break;
    }
  }
  throw BoundaryConditionError("periodic tag '" + tag + "' must end in _x, _y or _z");
}

double mesh_scale(const Mesh& mesh) {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::max());
  Vec3 hi = -lo;
  for (const auto& x : mesh.nodes) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  return std::max((hi - lo).norm(), 1e-300);
}

void pair_periodic_faces(Connectivity& t, const Mesh& mesh, const BoundaryConditions& bcs,
                         double scale) {
  const double tol = 1e-8 * scale;
  std::map<std::pair<std::string, std::array<long long, 2>>, std::vector<int>> buckets;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (t.faceCell[f][1] != kNoCell) continue;
    const auto& tag = mesh.faces[f].tag;
    if (tag.empty() || bcs.kind_of(tag) != BoundaryKind::Periodic) continue;
    const int axis = periodic_axis(tag);
    const Vec3& c = mesh.faces[f].centroid;
    const std::array<long long, 2> key = {std::llround(c[(axis + 1) % 3] / tol),
                                          std::llround(c[(axis + 2) % 3] / tol)};
    buckets[{tag, key}].push_back(f);
  }
  for (const auto& [key, faces] : buckets) {
    if (faces.size() != 2)
      throw BoundaryConditionError("periodic face " + std::to_string(faces.front()) + " (tag " +
                                   key.first + ") has " + std::to_string(faces.size() - 1) +
                                   " partners");
    t.periodicPartner[faces[0]] = faces[1];
    t.periodicPartner[faces[1]] = faces[0];
  }
}

struct GhostKey {
  int mirror;
  std::array<long long, 12> q;
  auto operator<=>(const GhostKey&) const = default;
};

}  // namespace

void add_ghost_cells(Connectivity& t, const Mesh& mesh, const BoundaryConditions& bcs, int layers) {
  if (layers < 1) throw BoundaryConditionError("at least one ghost layer is required");
  const double scale = mesh_scale(mesh);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (t.faceCell[f][1] != kNoCell) continue;
    if (mesh.faces[f].tag.empty())
      throw BoundaryConditionError("boundary face " + std::to_string(f) + " has no tag");
    bcs.kind_of(mesh.faces[f].tag);
  }
  pair_periodic_faces(t, mesh, bcs, scale);

  const double linTol = 1e-9;
  const double offTol = 1e-9 * scale;
  auto key_of = [&](int mirror, const AffineMap& m) {
    GhostKey k{mirror, {}};
    for (int i = 0; i < 9; ++i) k.q[i] = std::llround(m.linear(i / 3, i % 3) / linTol);
    for (int i = 0; i < 3; ++i) k.q[9 + i] = std::llround(m.offset[i] / offTol);
    return k;
  };
  auto is_identity = [&](const AffineMap& m) {
    return (m.linear - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < linTol &&
           m.offset.cwiseAbs().maxCoeff() < offTol;
  };

  std::map<GhostKey, int> index;
  // Operator (relative map) that created each ghost.
  std::vector<AffineMap> ops;

  auto image = [&](int target, const AffineMap& op, int opFace, GhostKind kind, int layer,
                   bool create) -> int {
    const int mirror = t.mirror(target);
    const AffineMap total = op.compose(t.transform(target));
    if (is_identity(total)) return mirror;
    const GhostKey key = key_of(mirror, total);
    if (auto it = index.find(key); it != index.end()) return it->second;
    if (!create) return kNoCell;
    GhostCell g;
    g.mirrorOf = mirror;
    g.base = target;
    g.boundaryFace = opFace;
    g.kind = kind;
    g.transform = total;
    g.layer = layer;
    const int id = t.num_extended();
    t.ghosts.push_back(g);
    ops.push_back(op);
    t.cellNeighbor.emplace_back();
    index.emplace(key, id);
    return id;
  };

  for (int c = 0; c < t.numPhysical; ++c) {
    for (std::size_t j = 0; j < t.cellFace[c].size(); ++j) {
      if (t.cellNeighbor[c][j] != kNoCell) continue;
      const int f = t.cellFace[c][j];
      const auto& face = mesh.faces[f];
      switch (bcs.kind_of(face.tag)) {
        case BoundaryKind::Periodic: {
          const int partner = t.periodicPartner[f];
          const int other = t.faceCell[partner][0];
          const AffineMap op = AffineMap::translation(face.centroid - mesh.faces[partner].centroid);
          t.cellNeighbor[c][j] = image(other, op, f, GhostKind::PeriodicImage, 1, true);
          break;
        }
        case BoundaryKind::Wall:
          t.cellNeighbor[c][j] = image(c, AffineMap::reflection(face.centroid, face.normal), f,
                                       GhostKind::Reflection, 1, true);
          break;
        case BoundaryKind::Farfield:
          t.cellNeighbor[c][j] = image(c, AffineMap::reflection(face.centroid, face.normal), f,
                                       GhostKind::FarfieldCopy, 1, true);
          break;
      }
    }
  }

  // Breadth-first growth: a ghost's neighbours are the images of its base's
  // neighbours under the same operator.
  for (std::size_t gi = 0; gi < t.ghosts.size(); ++gi) {
    const GhostCell g = t.ghosts[gi];
    const AffineMap op = ops[gi];
    const int id = t.numPhysical + static_cast<int>(gi);
    const bool create = g.layer < layers;
    const std::vector<int> baseNeighbors = t.cellNeighbor[g.base];
    std::vector<int> out(baseNeighbors.size(), kNoCell);
    for (std::size_t j = 0; j < baseNeighbors.size(); ++j) {
      const int nb = baseNeighbors[j];
      if (nb == kNoCell) continue;
      out[j] = image(nb, op, g.boundaryFace, g.kind, g.layer + 1, create);
    }
    t.cellNeighbor[id] = std::move(out);
  }
}

void build_two_layer_neighbors(Connectivity& t) {
  t.twoLayer.assign(static_cast<std::size_t>(t.num_extended()), {});
  for (int c = 0; c < t.num_extended(); ++c) {
    if (t.is_ghost(c) && t.ghost(c).layer > 1) continue;
    auto& list = t.twoLayer[c];
    auto add = [&](int id) {
      if (id == kNoCell)
        throw BoundaryConditionError("cell " + std::to_string(c) +
                                     ": unresolved boundary neighbour in two-layer stencil");
      if (id != c && std::find(list.begin(), list.end(), id) == list.end()) list.push_back(id);
    };
    for (int nb : t.cellNeighbor[c]) add(nb);
    for (int nb : t.cellNeighbor[c]) {
      for (int second : t.cellNeighbor[nb]) add(second);
    }
  }
}

Connectivity build_full_connectivity(const Mesh& mesh, const BoundaryConditions& bcs) {
  Connectivity t = build_connectivity(mesh);
  add_ghost_cells(t, mesh, bcs, 3);
  build_two_layer_neighbors(t);
  return t;
}

Vec3 extended_centroid(const Connectivity& t, const Mesh& mesh, int cell) {
  return t.transform(cell).apply(mesh.cells[t.mirror(cell)].centroid);
}

void dump_connectivity(const Connectivity& t, std::ostream& out) {
  auto id = [](int v) { return v == kNoCell ? 0 : v + 1; };
  auto table = [&](const char* name, const std::vector<std::vector<int>>& rows) {
    out << name << ' ' << rows.size() << '\n';
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out << r + 1 << ':';
      for (int v : rows[r]) out << ' ' << id(v);
      out << '\n';
    }
  };
  table("cellNode", t.cellNode);
  table("faceNode", t.faceNode);
  table("cellFace", t.cellFace);
  out << "faceCell " << t.faceCell.size() << '\n';
  for (std::size_t f = 0; f < t.faceCell.size(); ++f)
    out << f + 1 << ": " << id(t.faceCell[f][0]) << ' ' << id(t.faceCell[f][1]) << '\n';
  table("cellNeighbor", t.cellNeighbor);
  table("twoLayer", t.twoLayer);
  out << "ghosts " << t.ghosts.size() << '\n';
  static constexpr const char* kKinds[] = {"periodic", "reflection", "farfield"};
  for (std::size_t g = 0; g < t.ghosts.size(); ++g) {
    const auto& gh = t.ghosts[g];
    out << t.numPhysical + static_cast<int>(g) + 1 << ": mirror " << id(gh.mirrorOf) << " base "
        << id(gh.base) << " face " << gh.boundaryFace + 1 << ' ' << kKinds[static_cast<int>(gh.kind)]
        << " layer " << gh.layer << '\n';
  }
}

}  // namespace kinflow
