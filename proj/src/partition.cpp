#include "kinflow/partition.hpp"

#include "kinflow/error.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace kinflow {

double PartitionMap::balance() const {
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  return static_cast<double>(*hi) / static_cast<double>(*lo);
}

PartitionMap make_partition_map(std::vector<int> cellPart, int nParts) {
  if (nParts < 1) throw PartitionError("number of partitions must be at least 1");
  PartitionMap map;
  map.counts.assign(static_cast<std::size_t>(nParts), 0);
  for (std::size_t c = 0; c < cellPart.size(); ++c) {
    const int p = cellPart[c];
    if (p < 0 || p >= nParts)
      throw PartitionError("cell " + std::to_string(c) + " has partition id " + std::to_string(p) +
                           " outside [0, " + std::to_string(nParts) + ")");
    ++map.counts[p];
  }
  for (int p = 0; p < nParts; ++p)
    if (map.counts[p] == 0) throw PartitionError("partition " + std::to_string(p) + " is empty");
  map.cellPart = std::move(cellPart);
  return map;
}

namespace {

void bisect(std::span<const Vec3> centroids, std::vector<int>& ids, std::size_t begin, std::size_t end,
            int firstPart, int parts, std::vector<int>& out) {
  if (parts == 1) {
    for (std::size_t k = begin; k < end; ++k) out[ids[k]] = firstPart;
    return;
  }
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::max());
  Vec3 hi = -lo;
  for (std::size_t k = begin; k < end; ++k) {
    lo = lo.cwiseMin(centroids[ids[k]]);
    hi = hi.cwiseMax(centroids[ids[k]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const int leftParts = parts / 2;
  const std::size_t n = end - begin;
  const std::size_t split = begin + (n * static_cast<std::size_t>(leftParts) + parts / 2) / parts;
  auto less = [&](int a, int b) {
    const double xa = centroids[a][axis], xb = centroids[b][axis];
    return xa < xb || (xa == xb && a < b);
  };
  std::nth_element(ids.begin() + static_cast<std::ptrdiff_t>(begin), ids.begin() + static_cast<std::ptrdiff_t>(split),
                   ids.begin() + static_cast<std::ptrdiff_t>(end), less);
  bisect(centroids, ids, begin, split, firstPart, leftParts, out);
  bisect(centroids, ids, split, end, firstPart + leftParts, parts - leftParts, out);
}

}  // namespace

PartitionMap partition_rcb(std::span<const Vec3> centroids, int nParts) {
  if (nParts < 1) throw PartitionError("number of partitions must be at least 1");
  if (static_cast<std::size_t>(nParts) > centroids.size())
    throw PartitionError("more partitions (" + std::to_string(nParts) + ") than cells (" +
                         std::to_string(centroids.size()) + ")");
  std::vector<int> ids(centroids.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<int> part(centroids.size(), 0);
  bisect(centroids, ids, 0, ids.size(), 0, nParts, part);
  return make_partition_map(std::move(part), nParts);
}

PartitionMap read_partition_file(const std::filesystem::path& path, int numCells) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open partition file " + path.string());
  std::vector<int> part;
  std::string line;
  std::size_t lineNo = 0;
  int maxId = -1;
  while (std::getline(in, line)) {
    ++lineNo;
    std::istringstream ss(line);
    int id;
    if (!(ss >> id)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw ParseError(path.string(), lineNo, "expected a partition id");
    }
    std::string rest;
    if (ss >> rest) throw ParseError(path.string(), lineNo, "trailing content after partition id");
    if (id < 0) throw ParseError(path.string(), lineNo, "negative partition id");
    part.push_back(id);
    maxId = std::max(maxId, id);
  }
  if (static_cast<int>(part.size()) != numCells)
    throw PartitionError("partition file " + path.string() + " has " + std::to_string(part.size()) +
                         " entries for " + std::to_string(numCells) + " cells");
  return make_partition_map(std::move(part), maxId + 1);
}

int SubdomainPlan::from_global(int global) const {
  auto it = fromGlobal.find(global);
  if (it == fromGlobal.end()) throw PlanError("global cell " + std::to_string(global) + " is not in partition " +
                                              std::to_string(part));
  return it->second;
}

namespace {

/// Distances from the owned set over face adjacency, where a ghost also
/// reaches its base at no cost (its state is derived from it). Search stops
/// beyond `limit`.
std::vector<int> owned_distance(const Connectivity& tables, const PartitionMap& map, int part, int limit) {
  std::vector<int> dist(static_cast<std::size_t>(tables.num_extended()), std::numeric_limits<int>::max());
  std::deque<int> queue;
  for (int c = 0; c < tables.numPhysical; ++c) {
    if (map.cellPart[c] == part) {
      dist[c] = 0;
      queue.push_back(c);
    }
  }
  while (!queue.empty()) {
    const int c = queue.front();
    queue.pop_front();
    if (tables.is_ghost(c)) {
      const int base = tables.ghost(c).base;
      if (dist[c] < dist[base]) {
        dist[base] = dist[c];
        queue.push_front(base);
      }
    }
    if (dist[c] >= limit) continue;
    for (int nb : tables.cellNeighbor[c]) {
      if (nb == kNoCell || dist[c] + 1 >= dist[nb]) continue;
      dist[nb] = dist[c] + 1;
      queue.push_back(nb);
    }
  }
  return dist;
}

}  // namespace

std::vector<SubdomainPlan> build_subdomains(const Discretization& global, const Connectivity& tables,
                                            const PartitionMap& map) {
  const int nPhysical = tables.numPhysical;
  if (static_cast<int>(map.cellPart.size()) != nPhysical)
    throw PartitionError("partition map covers " + std::to_string(map.cellPart.size()) + " cells, mesh has " +
                         std::to_string(nPhysical));
  if (global.numOwned != nPhysical || global.numRemote != 0)
    throw PlanError("subdomains must be built from a single-domain discretization");
  const int nParts = map.num_parts();

  auto owner = [&](int cell) { return map.cellPart[cell]; };
  std::vector<std::vector<int>> remoteOf(static_cast<std::size_t>(nParts));
  std::vector<SubdomainPlan> plans(static_cast<std::size_t>(nParts));

  for (int p = 0; p < nParts; ++p) {
    SubdomainPlan& plan = plans[p];
    plan.part = p;
    Discretization& d = plan.disc;

    std::vector<int> faces;
    std::set<int> targetSet;
    for (int f = 0; f < static_cast<int>(global.faces.size()); ++f) {
      const FluxFace& ff = global.faces[f];
      const bool mine = owner(ff.leftCell) == p || (ff.rightCell != kNoCell && owner(ff.rightCell) == p);
      if (!mine) continue;
      faces.push_back(f);
      targetSet.insert(ff.left);
      targetSet.insert(ff.right);
    }

    // Every extended cell the owned residuals depend on.
    std::set<int> needed;
    for (int c = 0; c < nPhysical; ++c)
      if (owner(c) == p) needed.insert(c);
    for (int t : targetSet) {
      const ReconstructionOperator& op = global.targets[t];
      needed.insert(op.cell);
      needed.insert(op.big.begin(), op.big.end());
      for (const auto& sub : op.subs) needed.insert(sub.begin(), sub.end());
    }
    std::vector<int> work(needed.begin(), needed.end());
    while (!work.empty()) {
      const int c = work.back();
      work.pop_back();
      if (!tables.is_ghost(c)) continue;
      const int base = tables.ghost(c).base;
      if (needed.insert(base).second) work.push_back(base);
    }

    const std::vector<int> dist = owned_distance(tables, map, p, 3);
    std::vector<int> owned, remote, ghosts;
    for (int c : needed) {
      if (tables.is_ghost(c)) {
        ghosts.push_back(c);
      } else if (owner(c) == p) {
        owned.push_back(c);
      } else {
        if (dist[c] > 3)
          throw PlanError("partition " + std::to_string(p) + " needs cell " + std::to_string(c) +
                          " which is not within three layers of its owned cells");
        remote.push_back(c);
      }
    }

    d.numOwned = static_cast<int>(owned.size());
    d.numRemote = static_cast<int>(remote.size());
    for (const auto* list : {&owned, &remote, &ghosts})
      for (int c : *list) {
        plan.fromGlobal.emplace(c, static_cast<int>(d.globalCell.size()));
        d.globalCell.push_back(c);
      }
    for (int c : remote) plan.ghostLayers[dist[c] - 1].emplace_back(plan.fromGlobal.at(c), owner(c));
    remoteOf[p] = remote;

    auto local = [&](int g) { return plan.fromGlobal.at(g); };
    for (int g : ghosts) {
      GhostSlot slot = global.ghosts[g - nPhysical];
      slot.cell = local(slot.cell);
      slot.base = local(slot.base);
      d.ghosts.push_back(slot);
    }

    std::unordered_map<int, int> targetLocal;
    for (int t : targetSet) {
      ReconstructionOperator op = global.targets[t];
      op.cell = local(op.cell);
      for (int& id : op.big) id = local(id);
      for (auto& sub : op.subs)
        for (int& id : sub) id = local(id);
      targetLocal.emplace(t, static_cast<int>(d.targets.size()));
      d.targets.push_back(std::move(op));
    }

    std::unordered_map<int, int> faceLocal;
    for (int f : faces) {
      FluxFace ff = global.faces[f];
      ff.left = targetLocal.at(ff.left);
      ff.right = targetLocal.at(ff.right);
      ff.leftCell = local(ff.leftCell);
      if (ff.rightCell != kNoCell) ff.rightCell = local(ff.rightCell);
      faceLocal.emplace(f, static_cast<int>(d.faces.size()));
      d.faces.push_back(std::move(ff));
    }

    for (int c : owned) {
      for (int k = global.residual.begin[c]; k < global.residual.begin[c + 1]; ++k)
        d.residual.add(faceLocal.at(global.residual.face[k]), global.residual.coef[k]);
      d.residual.close_cell();
      d.volume.push_back(global.volume[c]);
      d.height.push_back(global.height[c]);
      d.centroid.push_back(global.centroid[c]);
    }
  }

  // Send lists mirror the receive lists of the peers, in ascending global id.
  for (int q = 0; q < nParts; ++q) {
    for (int c : remoteOf[q]) {
      const int p = owner(c);
      plans[p].cellSend.emplace_back(plans[p].from_global(c), q);
    }
  }
  for (int p = 0; p < nParts; ++p) {
    SubdomainPlan& plan = plans[p];
    std::sort(plan.cellSend.begin(), plan.cellSend.end(), [&](const auto& a, const auto& b) {
      return a.second != b.second ? a.second < b.second : plan.to_global(a.first) < plan.to_global(b.first);
    });
    for (int q = 0; q < nParts; ++q) {
      if (q == p) continue;
      PeerLink link;
      link.peer = q;
      for (const auto& [cell, dest] : plan.cellSend)
        if (dest == q) link.send.push_back(cell);
      for (int c : remoteOf[p])
        if (owner(c) == q) link.recv.push_back(plan.from_global(c));
      if (!link.send.empty() || !link.recv.empty()) plan.peers.push_back(std::move(link));
    }
  }
  return plans;
}

}  // namespace kinflow
