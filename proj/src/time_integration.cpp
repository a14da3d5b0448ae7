#include "kinflow/time_integration.hpp"

namespace kinflow {

std::vector<double> cell_heights(const Mesh& mesh) {
  std::vector<double> out(mesh.cells.size());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    double maxArea = 0.0;
    for (int f : mesh.cellFaces[c]) maxArea = std::max(maxArea, mesh.faces[f].area);
    out[c] = mesh.cells[c].volume / maxArea;
  }
  return out;
}

}  // namespace kinflow
