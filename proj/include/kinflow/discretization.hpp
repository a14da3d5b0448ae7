#pragma once

#include "kinflow/connectivity.hpp"
#include "kinflow/mesh.hpp"
#include "kinflow/reconstruction.hpp"
#include "kinflow/time_integration.hpp"

#include <cstdint>
#include <vector>

namespace kinflow {

/// How a ghost state follows from its base state.
enum class GhostRule : std::uint8_t { Copy, Wall, Farfield };

struct GhostSlot {
  int cell = kNoCell;
  int base = kNoCell;
  GhostRule rule = GhostRule::Copy;
  /// Outward normal of the boundary face that generated the ghost.
  Vec3 normal = Vec3::Zero();
};

/// One face on which a flux is evaluated. Periodic face pairs appear once.
struct FluxFace {
  int meshFace = -1;
  /// Reconstruction targets on each side; the normal points from left to right.
  int left = -1;
  int right = -1;
  /// Cells whose residual uses this face (rightCell is kNoCell on walls and
  /// far-field faces).
  int leftCell = kNoCell;
  int rightCell = kNoCell;
  Vec3 normal = Vec3::Zero();
  Vec3 t1 = Vec3::Zero();
  Vec3 t2 = Vec3::Zero();
  double area = 0.0;
  std::vector<QuadraturePoint> points;
  /// Offset added to a point before evaluating the right-hand polynomial
  /// (non-zero across periodic boundaries).
  Vec3 rightShift = Vec3::Zero();
};

/// Everything the stepping loop needs for one domain, with cells in local
/// order: owned, then remote copies, then ghosts.
struct Discretization {
  int numOwned = 0;
  int numRemote = 0;
  /// Local cell -> global extended cell.
  std::vector<int> globalCell;
  std::vector<GhostSlot> ghosts;
  std::vector<ReconstructionOperator> targets;
  std::vector<FluxFace> faces;
  ResidualStencil<double> residual;
  /// Geometry of owned cells.
  std::vector<double> volume;
  std::vector<double> height;
  std::vector<Vec3> centroid;

  int num_cells() const { return static_cast<int>(globalCell.size()); }
  int num_physical() const { return numOwned + numRemote; }
};

/// Single-domain discretization: every physical cell is owned.
Discretization build_discretization(const Mesh& mesh, const Connectivity& tables,
                                    const BoundaryConditions& bcs);

}  // namespace kinflow
