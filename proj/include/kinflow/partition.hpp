#pragma once

#include "kinflow/connectivity.hpp"
#include "kinflow/discretization.hpp"

#include <array>
#include <filesystem>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace kinflow {

/// Partition id of every physical cell.
struct PartitionMap {
  std::vector<int> cellPart;
  std::vector<int> counts;

  int num_parts() const { return static_cast<int>(counts.size()); }
  /// Largest over smallest partition size.
  double balance() const;
};

/// Validates ids in [0, nParts) and rejects empty partitions.
PartitionMap make_partition_map(std::vector<int> cellPart, int nParts);

/// Recursive coordinate bisection: split at the median along the longest
/// axis of the bounding box, with part counts divided as evenly as possible.
PartitionMap partition_rcb(std::span<const Vec3> centroids, int nParts);

/// One 0-based partition id per line, line k for cell k.
PartitionMap read_partition_file(const std::filesystem::path& path, int numCells);

/// Cells exchanged with one neighbouring partition, as local ids in the
/// fixed packing order (ascending global id).
struct PeerLink {
  int peer = -1;
  std::vector<int> send;
  std::vector<int> recv;
};

struct SubdomainPlan {
  int part = 0;
  Discretization disc;
  /// Global extended id -> local id.
  std::unordered_map<int, int> fromGlobal;
  /// Remote cells by face-adjacency distance 1..3 from the owned set, as
  /// (local id, owning partition).
  std::array<std::vector<std::pair<int, int>>, 3> ghostLayers;
  /// (local owned id, destination partition), sorted by destination then
  /// global id.
  std::vector<std::pair<int, int>> cellSend;
  std::vector<PeerLink> peers;

  int to_global(int local) const { return disc.globalCell[local]; }
  int from_global(int global) const;
};

/// Restricts a single-domain discretization to each partition.
std::vector<SubdomainPlan> build_subdomains(const Discretization& global, const Connectivity& tables,
                                            const PartitionMap& map);

}  // namespace kinflow
