#include "kinflow/discretization.hpp"

#include "kinflow/error.hpp"

#include <map>

namespace kinflow {

namespace {

GhostRule rule_of(GhostKind kind) {
  switch (kind) {
    case GhostKind::PeriodicImage: return GhostRule::Copy;
    case GhostKind::Reflection: return GhostRule::Wall;
    case GhostKind::FarfieldCopy: return GhostRule::Farfield;
  }
  return GhostRule::Copy;
}

}  // namespace

Discretization build_discretization(const Mesh& mesh, const Connectivity& tables,
                                    const BoundaryConditions& bcs) {
  Discretization d;
  const int n = tables.numPhysical;
  d.numOwned = n;
  d.globalCell.resize(static_cast<std::size_t>(tables.num_extended()));
  for (int c = 0; c < tables.num_extended(); ++c) d.globalCell[c] = c;

  for (int g = n; g < tables.num_extended(); ++g) {
    const GhostCell& gh = tables.ghost(g);
    d.ghosts.push_back({g, gh.base, rule_of(gh.kind), mesh.faces[gh.boundaryFace].normal});
  }

  // Targets: every physical cell, then the reflected ghosts across walls and
  // far-field faces.
  const CellMoments moments = CellMoments::compute(mesh);
  std::map<int, int> targetOf;
  auto add_target = [&](int cell) {
    auto [it, inserted] = targetOf.emplace(cell, static_cast<int>(d.targets.size()));
    if (inserted)
      d.targets.push_back(
          build_reconstruction_operator(mesh, tables, moments, cell, select_stencils(tables, mesh, cell)));
    return it->second;
  };
  for (int c = 0; c < n; ++c) add_target(c);

  std::vector<int> fluxOf(mesh.faces.size(), -1);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.faces[f];
    const int c = tables.faceCell[f][0];
    FluxFace ff;
    ff.meshFace = f;
    ff.leftCell = c;
    ff.left = targetOf.at(c);
    ff.normal = face.normal;
    ff.t1 = face.t1;
    ff.t2 = face.t2;
    ff.area = face.area;
    ff.points = face.gauss;
    if (tables.faceCell[f][1] != kNoCell) {
      ff.rightCell = tables.faceCell[f][1];
      ff.right = targetOf.at(ff.rightCell);
    } else {
      const BoundaryKind kind = bcs.kind_of(face.tag);
      if (kind == BoundaryKind::Periodic) {
        const int partner = tables.periodicPartner[f];
        if (fluxOf[partner] >= 0) {
          fluxOf[f] = fluxOf[partner];
          continue;
        }
        ff.rightCell = tables.faceCell[partner][0];
        ff.right = targetOf.at(ff.rightCell);
        ff.rightShift = mesh.faces[partner].centroid - face.centroid;
      } else {
        int local = -1;
        for (std::size_t j = 0; j < tables.cellFace[c].size(); ++j)
          if (tables.cellFace[c][j] == f) local = static_cast<int>(j);
        ff.right = add_target(tables.cellNeighbor[c][local]);
      }
    }
    fluxOf[f] = static_cast<int>(d.faces.size());
    d.faces.push_back(std::move(ff));
  }

  const std::vector<double> heights = cell_heights(mesh);
  for (int c = 0; c < n; ++c) {
    const double vol = mesh.cells[c].volume;
    for (int f : mesh.cellFaces[c]) {
      const FluxFace& ff = d.faces[fluxOf[f]];
      const double w = ff.area / vol;
      // The second face of a periodic pair is always seen from the right.
      const bool leftSide = ff.meshFace == f && ff.leftCell == c;
      d.residual.add(fluxOf[f], leftSide ? -w : w);
    }
    d.residual.close_cell();
    d.volume.push_back(vol);
    d.height.push_back(heights[c]);
    d.centroid.push_back(mesh.cells[c].centroid);
  }
  return d;
}

}  // namespace kinflow
