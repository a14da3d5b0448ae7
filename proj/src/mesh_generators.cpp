#include "kinflow/error.hpp"
#include "kinflow/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

namespace kinflow {

namespace {

// Tags every face that belongs to exactly one cell using `classify` on the
// face centroid.
void tag_boundary(MeshData& mesh, const std::function<std::string(const Vec3&)>& classify) {
  std::map<std::vector<int>, std::pair<int, std::vector<int>>> seen;
  for (const auto& cell : mesh.cells) {
    for (auto& ids : local_faces(cell)) {
      auto key = ids;
      std::sort(key.begin(), key.end());
      auto [it, inserted] = seen.try_emplace(std::move(key), 0, ids);
      ++it->second.first;
    }
  }
  for (const auto& [key, entry] : seen) {
    if (entry.first != 1) continue;
    Vec3 c = Vec3::Zero();
    for (int id : entry.second) c += mesh.nodes[id];
    c /= static_cast<double>(entry.second.size());
    mesh.boundary.push_back({classify(c), entry.second});
  }
}

std::string box_tag(const Vec3& c, const Vec3& lengths, bool periodic, const std::string& tag) {
  if (!periodic) return tag;
  static constexpr std::array<const char*, 3> kNames = {"periodic_x", "periodic_y", "periodic_z"};
  int best = 0;
  double bestDist = std::numeric_limits<double>::max();
  for (int d = 0; d < 3; ++d) {
    const double dist = std::min(std::abs(c[d]), std::abs(c[d] - lengths[d])) / lengths[d];
    if (dist < bestDist) {
      bestDist = dist;
      best = d;
    }
  }
  return kNames[best];
}

}  // namespace

MeshData make_periodic_box(int n, double length) {
  if (n < 1) throw GeometryError(-1, "box resolution must be positive");
  MeshData mesh;
  const int np = n + 1;
  const double h = length / n;
  mesh.nodes.reserve(static_cast<std::size_t>(np) * np * np);
  for (int k = 0; k < np; ++k)
    for (int j = 0; j < np; ++j)
      for (int i = 0; i < np; ++i) mesh.nodes.emplace_back(i * h, j * h, k * h);
  auto node = [np](int i, int j, int k) { return i + np * (j + np * k); };

  // Kuhn split: one tetrahedron per axis permutation, all sharing the main
  // diagonal. The split is translation invariant, so periodic faces match.
  static constexpr std::array<std::array<int, 3>, 6> kPerms = {
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  mesh.cells.reserve(static_cast<std::size_t>(6) * n * n * n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        for (const auto& p : kPerms) {
          std::array<int, 3> at = {i, j, k};
          Cell cell;
          cell.kind = CellKind::Tetrahedron;
          cell.nodes.push_back(node(at[0], at[1], at[2]));
          for (int axis : p) {
            ++at[axis];
            cell.nodes.push_back(node(at[0], at[1], at[2]));
          }
          mesh.cells.push_back(std::move(cell));
        }
      }
    }
  }
  const Vec3 lengths(length, length, length);
  tag_boundary(mesh, [&](const Vec3& c) { return box_tag(c, lengths, true, ""); });
  return mesh;
}

MeshData make_hex_box(int nx, int ny, int nz, const Vec3& lengths, bool periodic,
                      const std::string& tag) {
  if (nx < 1 || ny < 1 || nz < 1) throw GeometryError(-1, "box resolution must be positive");
  MeshData mesh;
  const Vec3 h(lengths.x() / nx, lengths.y() / ny, lengths.z() / nz);
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) mesh.nodes.emplace_back(i * h.x(), j * h.y(), k * h.z());
  auto node = [&](int i, int j, int k) { return i + (nx + 1) * (j + (ny + 1) * k); };
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        Cell cell;
        cell.kind = CellKind::Hexahedron;
        cell.nodes = {node(i, j, k),         node(i + 1, j, k),         node(i + 1, j + 1, k),
                      node(i, j + 1, k),     node(i, j, k + 1),         node(i + 1, j, k + 1),
                      node(i + 1, j + 1, k + 1), node(i, j + 1, k + 1)};
        mesh.cells.push_back(std::move(cell));
      }
    }
  }
  tag_boundary(mesh, [&](const Vec3& c) { return box_tag(c, lengths, periodic, tag); });
  return mesh;
}

double grading_ratio(double first, double total, int count) {
  if (!(first > 0.0) || !(total > 0.0) || count < 1)
    throw GeometryError(-1, "invalid grading parameters");
  auto length = [&](double q) {
    double sum = 0.0, term = first;
    for (int k = 0; k < count; ++k) {
      sum += term;
      term *= q;
    }
    return sum;
  };
  double lo = 1e-6, hi = 1.0;
  while (length(hi) < total) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (length(mid) < total ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

MeshData make_sphere_shell(int n, const SphereMeshOptions& options) {
  if (n < 1) throw GeometryError(-1, "sphere resolution must be positive");
  const double inner = 0.5 * options.diameter;
  if (!(options.outerRadius > inner)) throw GeometryError(-1, "outer radius must exceed the sphere radius");
  const int layers = 2 * n;
  const double ratio = grading_ratio(options.firstHeight, options.outerRadius - inner, layers);

  std::vector<double> radii(static_cast<std::size_t>(layers) + 1);
  radii[0] = inner;
  double height = options.firstHeight;
  for (int r = 1; r <= layers; ++r) {
    radii[r] = radii[r - 1] + height;
    height *= ratio;
  }
  radii[layers] = options.outerRadius;

  // Equiangular cube-face coordinates, exactly antisymmetric.
  std::vector<double> tans(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    if (2 * i == n) tans[i] = 0.0;
    else if (i == 0) tans[i] = -1.0;
    else if (i == n) tans[i] = 1.0;
    else if (2 * i < n) tans[i] = std::tan(-std::numbers::pi / 4 + i * std::numbers::pi / (2 * n));
    else tans[i] = -tans[n - i];
  }

  MeshData mesh;
  std::map<std::array<int, 4>, int> nodeIds;
  // Lattice key: cube-surface indices in [0,n] per axis plus the radial layer.
  auto node = [&](const std::array<int, 3>& lattice, int r) {
    const std::array<int, 4> key = {lattice[0], lattice[1], lattice[2], r};
    auto [it, inserted] = nodeIds.try_emplace(key, static_cast<int>(mesh.nodes.size()));
    if (inserted) {
      const Vec3 dir = Vec3(tans[lattice[0]], tans[lattice[1]], tans[lattice[2]]).normalized();
      mesh.nodes.push_back(radii[r] * dir);
    }
    return it->second;
  };

  for (int axis = 0; axis < 3; ++axis) {
    for (int side : {0, n}) {
      const int a1 = (axis + 1) % 3;
      const int a2 = (axis + 2) % 3;
      auto lattice = [&](int i, int j) {
        std::array<int, 3> l{};
        l[axis] = side;
        l[a1] = i;
        l[a2] = j;
        return l;
      };
      for (int r = 0; r < layers; ++r) {
        for (int j = 0; j < n; ++j) {
          for (int i = 0; i < n; ++i) {
            Cell cell;
            cell.kind = CellKind::Hexahedron;
            cell.nodes = {node(lattice(i, j), r),         node(lattice(i + 1, j), r),
                          node(lattice(i + 1, j + 1), r), node(lattice(i, j + 1), r),
                          node(lattice(i, j), r + 1),     node(lattice(i + 1, j), r + 1),
                          node(lattice(i + 1, j + 1), r + 1), node(lattice(i, j + 1), r + 1)};
            mesh.cells.push_back(std::move(cell));
          }
        }
      }
    }
  }
  const double mid = 0.5 * (radii[1] + radii[0]);
  tag_boundary(mesh, [&](const Vec3& c) { return c.norm() < mid ? "wall" : "farfield"; });
  return mesh;
}

}  // namespace kinflow
