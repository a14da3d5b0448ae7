#pragma once

#include "kinflow/mesh.hpp"

#include <Eigen/Core>

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace kinflow {

/// Sentinel for "no cell" (a boundary side before ghost substitution).
inline constexpr int kNoCell = -1;

enum class BoundaryKind { Periodic, Wall, Farfield };

/// Maps boundary face tags to boundary treatments.
class BoundaryConditions {
 public:
  /// periodic_x/y/z -> periodic, wall -> no-slip wall, farfield -> farfield.
  static BoundaryConditions defaults();

  void set(const std::string& tag, BoundaryKind kind) { kinds_[tag] = kind; }
  BoundaryKind kind_of(const std::string& tag) const;
  bool has(const std::string& tag) const { return kinds_.count(tag) != 0; }

 private:
  std::map<std::string, BoundaryKind> kinds_;
};

/// x -> linear * x + offset.
struct AffineMap {
  Eigen::Matrix3d linear = Eigen::Matrix3d::Identity();
  Vec3 offset = Vec3::Zero();

  Vec3 apply(const Vec3& x) const { return linear * x + offset; }
  /// (*this) after `inner`.
  AffineMap compose(const AffineMap& inner) const {
    return {linear * inner.linear, linear * inner.offset + offset};
  }
  static AffineMap translation(const Vec3& t) { return {Eigen::Matrix3d::Identity(), t}; }
  static AffineMap reflection(const Vec3& point, const Vec3& normal);
};

enum class GhostKind { PeriodicImage, Reflection, FarfieldCopy };

/// A materialised image cell. Its state is op(state(base)), where op is the
/// boundary treatment of `boundaryFace` (a physical face) or a plain copy for
/// periodic images. Geometry is `transform` applied to `mirrorOf`.
struct GhostCell {
  int mirrorOf = kNoCell;
  int base = kNoCell;
  int boundaryFace = -1;
  GhostKind kind = GhostKind::PeriodicImage;
  AffineMap transform;
  int layer = 1;
};

/// The five connectivity tables plus ghost cells and two-layer lists.
/// Cells 0..numPhysical-1 are physical; ghosts follow in discovery order
/// (non-decreasing layer).
struct Connectivity {
  int numPhysical = 0;
  std::vector<std::vector<int>> cellNode;
  std::vector<std::vector<int>> faceNode;
  std::vector<std::vector<int>> cellFace;
  std::vector<std::array<int, 2>> faceCell;
  /// Face neighbours of every extended cell in local face order; kNoCell only
  /// on the outermost ghost layer.
  std::vector<std::vector<int>> cellNeighbor;
  /// Distinct first- and second-layer neighbours (self excluded). Filled for
  /// physical cells and first-layer ghosts.
  std::vector<std::vector<int>> twoLayer;
  std::vector<GhostCell> ghosts;
  /// Partner face of each periodic boundary face (-1 otherwise).
  std::vector<int> periodicPartner;

  int num_extended() const { return numPhysical + static_cast<int>(ghosts.size()); }
  bool is_ghost(int cell) const { return cell >= numPhysical; }
  const GhostCell& ghost(int cell) const { return ghosts[cell - numPhysical]; }
  /// Physical cell whose geometry (transformed) this extended cell carries.
  int mirror(int cell) const { return is_ghost(cell) ? ghost(cell).mirrorOf : cell; }
  AffineMap transform(int cell) const { return is_ghost(cell) ? ghost(cell).transform : AffineMap{}; }
};

/// Face-based tables only: cellNeighbor carries kNoCell at boundary faces.
Connectivity build_connectivity(const Mesh& mesh);

/// Adds ghost cells (`layers` deep) according to the boundary conditions and
/// substitutes them into cellNeighbor.
void add_ghost_cells(Connectivity& tables, const Mesh& mesh, const BoundaryConditions& bcs,
                     int layers = 3);

/// Two-layer neighbour lists in first-layer-then-second-layer order.
void build_two_layer_neighbors(Connectivity& tables);

/// Convenience: all of the above.
Connectivity build_full_connectivity(const Mesh& mesh, const BoundaryConditions& bcs);

Vec3 extended_centroid(const Connectivity& tables, const Mesh& mesh, int cell);

/// ASCII dump of all tables with 1-based ids and 0 as the boundary label.
void dump_connectivity(const Connectivity& tables, std::ostream& out);

}  // namespace kinflow
