#include "kinflow/mesh.hpp"

#include "kinflow/error.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace kinflow {

namespace {

double signed_tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

// Hexahedron faces in VTK/Gmsh node order, outward for positive orientation.
constexpr std::array<std::array<int, 4>, 6> kHexFaces = {{
    {0, 3, 2, 1}, {4, 5, 6, 7}, {0, 1, 5, 4}, {1, 2, 6, 5}, {2, 3, 7, 6}, {3, 0, 4, 7}}};
// Tetrahedron face p is opposite node p.
constexpr std::array<std::array<int, 3>, 4> kTetFaces = {{
    {1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}}};

double hex_signed_volume(const std::vector<Vec3>& nodes, const std::vector<int>& ids) {
  Vec3 apex = Vec3::Zero();
  for (int id : ids) apex += nodes[id];
  apex /= 8.0;
  double vol = 0.0;
  for (const auto& f : kHexFaces) {
    const Vec3& a = nodes[ids[f[0]]];
    const Vec3& b = nodes[ids[f[1]]];
    const Vec3& c = nodes[ids[f[2]]];
    const Vec3& d = nodes[ids[f[3]]];
    vol += signed_tet_volume(apex, a, b, c) + signed_tet_volume(apex, a, c, d);
  }
  return vol;
}

void orient_cell(const std::vector<Vec3>& nodes, Cell& cell) {
  auto& n = cell.nodes;
  if (cell.kind == CellKind::Tetrahedron) {
    if (signed_tet_volume(nodes[n[0]], nodes[n[1]], nodes[n[2]], nodes[n[3]]) < 0.0)
      std::swap(n[1], n[2]);
  } else if (hex_signed_volume(nodes, n) < 0.0) {
    n = {n[0], n[3], n[2], n[1], n[4], n[7], n[6], n[5]};
  }
}

// Symmetric degree-2 rule on a triangle.
void triangle_points(const Vec3& a, const Vec3& b, const Vec3& c, double weight,
                     std::vector<QuadraturePoint>& out) {
  constexpr double kMajor = 2.0 / 3.0;
  constexpr double kMinor = 1.0 / 6.0;
  out.push_back({kMajor * a + kMinor * b + kMinor * c, weight / 3.0});
  out.push_back({kMinor * a + kMajor * b + kMinor * c, weight / 3.0});
  out.push_back({kMinor * a + kMinor * b + kMajor * c, weight / 3.0});
}

Vec3 any_orthogonal(const Vec3& n) {
  int axis = 0;
  if (std::abs(n.y()) < std::abs(n[axis])) axis = 1;
  if (std::abs(n.z()) < std::abs(n[axis])) axis = 2;
  Vec3 e = Vec3::Zero();
  e[axis] = 1.0;
  return n.cross(e).normalized();
}

void face_geometry(const std::vector<Vec3>& nodes, Face& face) {
  const auto& ids = face.nodes;
  face.triangles.clear();
  if (ids.size() == 3) {
    face.triangles.push_back({ids[0], ids[1], ids[2]});
  } else {
    face.triangles.push_back({ids[0], ids[1], ids[2]});
    face.triangles.push_back({ids[0], ids[2], ids[3]});
  }

  Vec3 vectorArea = Vec3::Zero();
  Vec3 weighted = Vec3::Zero();
  double scalarArea = 0.0;
  std::vector<double> triAreas;
  for (const auto& t : face.triangles) {
    const Vec3 va = 0.5 * (nodes[t[1]] - nodes[t[0]]).cross(nodes[t[2]] - nodes[t[0]]);
    const double a = va.norm();
    vectorArea += va;
    scalarArea += a;
    triAreas.push_back(a);
    weighted += a * (nodes[t[0]] + nodes[t[1]] + nodes[t[2]]) / 3.0;
  }
  face.area = vectorArea.norm();
  face.normal = vectorArea / face.area;
  face.centroid = weighted / scalarArea;
  face.t1 = any_orthogonal(face.normal);
  face.t2 = face.normal.cross(face.t1);

  face.planar = true;
  if (ids.size() == 4) {
    const Vec3& a = nodes[ids[0]];
    const Vec3 n = (nodes[ids[1]] - a).cross(nodes[ids[2]] - a).normalized();
    double diameter = std::max((nodes[ids[2]] - a).norm(), (nodes[ids[3]] - nodes[ids[1]]).norm());
    face.planar = std::abs(n.dot(nodes[ids[3]] - a)) <= 1e-10 * diameter;
  }

  face.gauss.clear();
  if (ids.size() == 4 && face.planar) {
    // 2x2 Gauss-Legendre on the bilinear map, weighted by the Jacobian.
    const Vec3& a = nodes[ids[0]];
    const Vec3& b = nodes[ids[1]];
    const Vec3& c = nodes[ids[2]];
    const Vec3& d = nodes[ids[3]];
    const double g = 0.5 / std::sqrt(3.0);
    const std::array<double, 2> pts = {0.5 - g, 0.5 + g};
    double total = 0.0;
    for (double t : pts) {
      for (double s : pts) {
        const Vec3 x = (1 - s) * (1 - t) * a + s * (1 - t) * b + s * t * c + (1 - s) * t * d;
        const Vec3 xs = (1 - t) * (b - a) + t * (c - d);
        const Vec3 xt = (1 - s) * (d - a) + s * (c - b);
        const double jac = xs.cross(xt).norm();
        face.gauss.push_back({x, jac});
        total += jac;
      }
    }
    for (auto& q : face.gauss) q.weight /= total;
  } else {
    for (std::size_t k = 0; k < face.triangles.size(); ++k) {
      const auto& t = face.triangles[k];
      triangle_points(nodes[t[0]], nodes[t[1]], nodes[t[2]], triAreas[k] / scalarArea, face.gauss);
    }
  }
}

std::vector<int> sorted_key(std::vector<int> ids) {
  std::sort(ids.begin(), ids.end());
  return ids;
}

// Four-point rule on a tetrahedron, exact for quadratics.
void tet_points(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, double volume,
                std::vector<QuadraturePoint>& out) {
  constexpr double kA = 0.5854101966249685;
  constexpr double kB = 0.1381966011250105;
  out.push_back({kA * a + kB * (b + c + d), volume / 4.0});
  out.push_back({kA * b + kB * (a + c + d), volume / 4.0});
  out.push_back({kA * c + kB * (a + b + d), volume / 4.0});
  out.push_back({kA * d + kB * (a + b + c), volume / 4.0});
}

}  // namespace

double Mesh::total_volume() const {
  double v = 0.0;
  for (const auto& c : cells) v += c.volume;
  return v;
}

std::vector<std::vector<int>> local_faces(const Cell& cell) {
  std::vector<std::vector<int>> out;
  if (cell.kind == CellKind::Tetrahedron) {
    for (const auto& f : kTetFaces) out.push_back({cell.nodes[f[0]], cell.nodes[f[1]], cell.nodes[f[2]]});
  } else {
    for (const auto& f : kHexFaces)
      out.push_back({cell.nodes[f[0]], cell.nodes[f[1]], cell.nodes[f[2]], cell.nodes[f[3]]});
  }
  return out;
}

Mesh compute_geometry(MeshData data) {
  Mesh mesh;
  mesh.nodes = std::move(data.nodes);
  mesh.cells = std::move(data.cells);
  const int numNodes = static_cast<int>(mesh.nodes.size());

  for (const auto& x : mesh.nodes) {
    if (!x.allFinite()) throw GeometryError(-1, "non-finite node coordinate");
  }
  for (int c = 0; c < mesh.num_cells(); ++c) {
    auto& cell = mesh.cells[c];
    if (static_cast<int>(cell.nodes.size()) != node_count(cell.kind))
      throw GeometryError(c, "node count does not match cell kind");
    for (int id : cell.nodes) {
      if (id < 0 || id >= numNodes) throw GeometryError(c, "references a missing node");
    }
    orient_cell(mesh.nodes, cell);
  }

  std::map<std::vector<int>, int> faceIndex;
  mesh.cellFaces.resize(mesh.cells.size());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    for (auto& ids : local_faces(mesh.cells[c])) {
      auto key = sorted_key(ids);
      auto [it, inserted] = faceIndex.try_emplace(std::move(key), mesh.num_faces());
      if (inserted) {
        Face f;
        f.nodes = std::move(ids);
        mesh.faces.push_back(std::move(f));
      }
      mesh.faces[it->second].cells.push_back(c);
      mesh.cellFaces[c].push_back(it->second);
    }
  }

  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (mesh.faces[f].cells.size() > 2)
      throw ConnectivityError("non-manifold face " + std::to_string(f) + " shared by " +
                              std::to_string(mesh.faces[f].cells.size()) + " cells");
  }

  // Orient each face outward from its first (lowest-index) cell. Reversal
  // keeps the first node so a warped quad keeps its diagonal.
  for (auto& face : mesh.faces) {
    face_geometry(mesh.nodes, face);
    Vec3 owner = Vec3::Zero();
    for (int id : mesh.cells[face.cells.front()].nodes) owner += mesh.nodes[id];
    owner /= static_cast<double>(mesh.cells[face.cells.front()].nodes.size());
    if (face.normal.dot(face.centroid - owner) < 0.0) {
      std::reverse(face.nodes.begin() + 1, face.nodes.end());
      face_geometry(mesh.nodes, face);
    }
  }

  for (int c = 0; c < mesh.num_cells(); ++c) {
    auto& cell = mesh.cells[c];
    const auto& n = cell.nodes;
    if (cell.kind == CellKind::Tetrahedron) {
      cell.volume = signed_tet_volume(mesh.nodes[n[0]], mesh.nodes[n[1]], mesh.nodes[n[2]], mesh.nodes[n[3]]);
      cell.centroid = 0.25 * (mesh.nodes[n[0]] + mesh.nodes[n[1]] + mesh.nodes[n[2]] + mesh.nodes[n[3]]);
    } else {
      Vec3 apex = Vec3::Zero();
      for (int id : n) apex += mesh.nodes[id];
      apex /= 8.0;
      double vol = 0.0;
      Vec3 moment = Vec3::Zero();
      for (int f : mesh.cellFaces[c]) {
        const bool outward = mesh.orientation(c, f) > 0;
        for (const auto& t : mesh.faces[f].triangles) {
          const Vec3& a = mesh.nodes[t[0]];
          const Vec3& b = mesh.nodes[outward ? t[1] : t[2]];
          const Vec3& d = mesh.nodes[outward ? t[2] : t[1]];
          const double v = signed_tet_volume(apex, a, b, d);
          vol += v;
          moment += v * 0.25 * (apex + a + b + d);
        }
      }
      cell.volume = vol;
      cell.centroid = vol > 0.0 ? Vec3(moment / vol) : apex;
    }
    if (!(cell.volume > 0.0)) throw GeometryError(c, "degenerate cell (non-positive volume)");
  }

  for (const auto& b : data.boundary) {
    auto it = faceIndex.find(sorted_key(b.nodes));
    if (it == faceIndex.end())
      throw GeometryError(-1, "boundary tag '" + b.tag + "' names a face that no cell owns");
    mesh.faces[it->second].tag = b.tag;
  }
  return mesh;
}

std::vector<QuadraturePoint> cell_quadrature(const Mesh& mesh, int c) {
  const auto& cell = mesh.cells[c];
  const auto& n = cell.nodes;
  std::vector<QuadraturePoint> out;
  if (cell.kind == CellKind::Tetrahedron) {
    out.reserve(4);
    tet_points(mesh.nodes[n[0]], mesh.nodes[n[1]], mesh.nodes[n[2]], mesh.nodes[n[3]], cell.volume, out);
    return out;
  }
  Vec3 apex = Vec3::Zero();
  for (int id : n) apex += mesh.nodes[id];
  apex /= 8.0;
  out.reserve(48);
  for (int f : mesh.cellFaces[c]) {
    const bool outward = mesh.orientation(c, f) > 0;
    for (const auto& t : mesh.faces[f].triangles) {
      const Vec3& a = mesh.nodes[t[0]];
      const Vec3& b = mesh.nodes[outward ? t[1] : t[2]];
      const Vec3& d = mesh.nodes[outward ? t[2] : t[1]];
      tet_points(apex, a, b, d, signed_tet_volume(apex, a, b, d), out);
    }
  }
  return out;
}

}  // namespace kinflow
