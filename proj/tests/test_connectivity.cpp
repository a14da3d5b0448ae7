#include "kinflow/connectivity.hpp"
#include "kinflow/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <queue>
#include <set>
#include <sstream>

using namespace kinflow;

namespace {

Mesh two_tets() {
  MeshData data;
  data.nodes = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1), Vec3(1, 1, 1)};
  data.cells = {{CellKind::Tetrahedron, {0, 1, 2, 3}}, {CellKind::Tetrahedron, {1, 2, 3, 4}}};
  return compute_geometry(data);
}

/// Cells within graph distance 1..2 of `cell` by breadth-first search.
std::set<int> bfs_two_layer(const Connectivity& t, int cell) {
  std::map<int, int> dist{{cell, 0}};
  std::queue<int> todo;
  todo.push(cell);
  while (!todo.empty()) {
    const int c = todo.front();
    todo.pop();
    if (dist[c] == 2) continue;
    for (int nb : t.cellNeighbor[c]) {
      if (nb == kNoCell || dist.count(nb)) continue;
      dist[nb] = dist[c] + 1;
      todo.push(nb);
    }
  }
  std::set<int> out;
  for (const auto& [c, d] : dist)
    if (d > 0) out.insert(c);
  return out;
}

int cartesian_index(int i, int j, int k, int n) { return (k * n + j) * n + i; }

}  // namespace

TEST_CASE("two tetrahedra sharing a face") {
  const Mesh mesh = two_tets();
  const Connectivity t = build_connectivity(mesh);
  CHECK(t.faceCell.size() == 7);
  const auto interior = std::count_if(t.faceCell.begin(), t.faceCell.end(),
                                      [](const auto& fc) { return fc[1] != kNoCell; });
  CHECK(interior == 1);
  CHECK(std::count(t.cellNeighbor[0].begin(), t.cellNeighbor[0].end(), 1) == 1);
  CHECK(std::count(t.cellNeighbor[0].begin(), t.cellNeighbor[0].end(), kNoCell) == 3);

  std::ostringstream dump;
  dump_connectivity(t, dump);
  CHECK(dump.str().rfind("cellNode 2\n1: 1 2 3 4\n", 0) == 0);
  CHECK(dump.str().find("faceCell 7") != std::string::npos);
}

TEST_CASE("boundary without a condition is rejected") {
  const Mesh mesh = two_tets();
  Connectivity t = build_connectivity(mesh);
  CHECK_THROWS_AS(add_ghost_cells(t, mesh, BoundaryConditions::defaults()), BoundaryConditionError);
}

TEST_CASE("single walled hexahedron gets one reflected ghost per face") {
  const Mesh mesh = compute_geometry(make_hex_box(1, 1, 1, Vec3(1, 1, 1), false, "wall"));
  Connectivity t = build_connectivity(mesh);
  add_ghost_cells(t, mesh, BoundaryConditions::defaults(), 1);
  CHECK(t.ghosts.size() == 6);
  for (std::size_t j = 0; j < 6; ++j) {
    const int g = t.cellNeighbor[0][j];
    REQUIRE(t.is_ghost(g));
    CHECK(t.ghost(g).kind == GhostKind::Reflection);
    CHECK(t.ghost(g).base == 0);
    const auto& face = mesh.faces[t.cellFace[0][j]];
    const Vec3 image = extended_centroid(t, mesh, g);
    // Mirror image of the centroid across the face plane.
    CHECK((image - (mesh.cells[0].centroid + face.normal)).norm() < 1e-12);
  }
}

TEST_CASE("periodic box has no unresolved neighbours") {
  const Mesh mesh = compute_geometry(make_periodic_box(4));
  const Connectivity t = build_full_connectivity(mesh, BoundaryConditions::defaults());
  for (int c = 0; c < t.numPhysical; ++c) {
    CHECK(std::count(t.cellNeighbor[c].begin(), t.cellNeighbor[c].end(), kNoCell) == 0);
    for (std::size_t j = 0; j < t.cellNeighbor[c].size(); ++j) {
      const int nb = t.cellNeighbor[c][j];
      const Vec3 shared = mesh.faces[t.cellFace[c][j]].centroid;
      // The neighbour (image) sits across the shared face, not across the box.
      CHECK((extended_centroid(t, mesh, nb) - shared).norm() < 0.5);
    }
  }
  for (const auto& g : t.ghosts) CHECK(g.kind == GhostKind::PeriodicImage);
}

TEST_CASE("neighbour relation is symmetric between physical cells") {
  const Mesh mesh = compute_geometry(make_periodic_box(3));
  const Connectivity t = build_full_connectivity(mesh, BoundaryConditions::defaults());
  for (int c = 0; c < t.numPhysical; ++c) {
    for (int nb : t.cellNeighbor[c]) {
      if (t.is_ghost(nb)) continue;
      CHECK(std::count(t.cellNeighbor[nb].begin(), t.cellNeighbor[nb].end(), c) == 1);
    }
  }
}

TEST_CASE("two-layer neighbours on a Cartesian grid") {
  const int n = 5;
  const Mesh mesh = compute_geometry(make_hex_box(n, n, n, Vec3(1, 1, 1), false, "wall"));
  const Connectivity t = build_full_connectivity(mesh, BoundaryConditions::defaults());
  const int center = cartesian_index(2, 2, 2, n);
  CHECK(t.twoLayer[center].size() == 24);

  for (int c = 0; c < t.num_extended(); ++c) {
    if (t.is_ghost(c) && t.ghost(c).layer > 1) continue;
    const auto& list = t.twoLayer[c];
    const std::set<int> got(list.begin(), list.end());
    CHECK(got.size() == list.size());
    CHECK(got == bfs_two_layer(t, c));
    // Face neighbours come first.
    std::set<int> first(t.cellNeighbor[c].begin(), t.cellNeighbor[c].end());
    first.erase(c);
    for (std::size_t k = 0; k < first.size(); ++k) CHECK(first.count(list[k]) == 1);
  }
}

TEST_CASE("corner cell of a walled box sees three ghost layers") {
  const int n = 4;
  const Mesh mesh = compute_geometry(make_hex_box(n, n, n, Vec3(1, 1, 1), false, "wall"));
  const Connectivity t = build_full_connectivity(mesh, BoundaryConditions::defaults());
  int maxLayer = 0;
  for (const auto& g : t.ghosts) maxLayer = std::max(maxLayer, g.layer);
  CHECK(maxLayer == 3);
  // Two-layer list of a corner cell has the same size as an interior one:
  // reflections fill in the missing cells.
  CHECK(t.twoLayer[0].size() == 24);
}

TEST_CASE("sphere shell connectivity") {
  const Mesh mesh = compute_geometry(make_sphere_shell(2));
  const Connectivity t = build_full_connectivity(mesh, BoundaryConditions::defaults());
  for (int c = 0; c < t.numPhysical; ++c) {
    CHECK(std::count(t.cellNeighbor[c].begin(), t.cellNeighbor[c].end(), kNoCell) == 0);
  }
  int wall = 0, farfield = 0;
  for (const auto& g : t.ghosts) {
    if (g.layer != 1) continue;
    wall += g.kind == GhostKind::Reflection;
    farfield += g.kind == GhostKind::FarfieldCopy;
  }
  CHECK(wall == 6 * 2 * 2);
  CHECK(farfield == 6 * 2 * 2);
}
