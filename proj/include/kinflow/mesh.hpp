#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace kinflow {

using Vec3 = Eigen::Vector3d;

enum class CellKind : std::uint8_t { Tetrahedron, Hexahedron };

constexpr int node_count(CellKind kind) { return kind == CellKind::Tetrahedron ? 4 : 8; }
constexpr int face_count(CellKind kind) { return kind == CellKind::Tetrahedron ? 4 : 6; }

struct Cell {
  CellKind kind = CellKind::Tetrahedron;
  std::vector<int> nodes;
  double volume = 0.0;
  Vec3 centroid = Vec3::Zero();
};

/// A boundary face named by its node indices, as it appears in a mesh file.
struct TaggedFace {
  std::string tag;
  std::vector<int> nodes;
};

/// Mesh as read from disk or produced by a generator. Node indices are 0-based
/// here; the on-disk native format is 1-based.
struct MeshData {
  std::vector<Vec3> nodes;
  std::vector<Cell> cells;
  std::vector<TaggedFace> boundary;
};

struct QuadraturePoint {
  Vec3 position;
  double weight;
};

struct Face {
  /// Node indices ordered so the right-hand normal points out of cells[0].
  std::vector<int> nodes;
  /// Triangulation used for area, normal and (for warped quads) quadrature.
  std::vector<std::array<int, 3>> triangles;
  /// Adjacent cells in increasing index order.
  std::vector<int> cells;
  double area = 0.0;
  Vec3 centroid = Vec3::Zero();
  Vec3 normal = Vec3::Zero();
  Vec3 t1 = Vec3::Zero();
  Vec3 t2 = Vec3::Zero();
  /// Points with weights normalised to sum to one; the flux integral over
  /// the face is area * sum(w * F).
  std::vector<QuadraturePoint> gauss;
  bool planar = true;
  std::string tag;
};

struct Mesh {
  std::vector<Vec3> nodes;
  std::vector<Cell> cells;
  std::vector<Face> faces;
  /// Face ids of each cell in the cell's local face order.
  std::vector<std::vector<int>> cellFaces;

  int num_cells() const { return static_cast<int>(cells.size()); }
  int num_faces() const { return static_cast<int>(faces.size()); }
  /// +1 when the face normal points out of the cell, -1 otherwise.
  int orientation(int cell, int face) const { return faces[face].cells.front() == cell ? 1 : -1; }
  double total_volume() const;
};

enum class MeshFormat { Native, Gmsh };

MeshData load_mesh(const std::filesystem::path& path, MeshFormat format);
MeshData parse_native_mesh(std::istream& in, const std::string& source = "<stream>");
MeshData parse_gmsh_mesh(std::istream& in, const std::string& source = "<stream>");
void write_native_mesh(const MeshData& mesh, std::ostream& out);

/// Local faces of a cell (outward for a positively oriented node ordering).
std::vector<std::vector<int>> local_faces(const Cell& cell);

/// Orients cells, extracts unique faces and computes all geometric data.
Mesh compute_geometry(MeshData data);

/// Volume quadrature of a cell: the cell is split into tetrahedra sharing the
/// vertex average and each piece gets a 4-point rule exact for quadratics.
/// Weights are absolute volumes.
std::vector<QuadraturePoint> cell_quadrature(const Mesh& mesh, int cell);

// Generators.

/// Periodic box [0,length]^3 of n^3 cubes, each split into six tetrahedra
/// around the main diagonal. Boundary tags periodic_x/y/z.
MeshData make_periodic_box(int n, double length = 2.0);

/// Cartesian hexahedra on [0,lx]x[0,ly]x[0,lz]. With periodic=true faces are
/// tagged periodic_x/y/z, otherwise every boundary face gets `tag`.
MeshData make_hex_box(int nx, int ny, int nz, const Vec3& lengths, bool periodic,
                      const std::string& tag = "wall");

struct SphereMeshOptions {
  double diameter = 1.0;
  double outerRadius = 20.0;
  double firstHeight = 0.01;
};

/// Six-block cubed-sphere shell with n x n x 2n hexahedra per block, graded
/// geometrically away from the wall. Tags: "wall" and "farfield".
MeshData make_sphere_shell(int n, const SphereMeshOptions& options = {});

/// Geometric growth ratio q with first*(q^count-1)/(q-1) = total.
double grading_ratio(double first, double total, int count);

}  // namespace kinflow
