#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mtmc/affinity.hpp"
#include "mtmc/geometry.hpp"

namespace mtmc {

/// One agglomeration step. Leaves are nodes [0, D); the i-th merge creates
/// node D + i.
struct Merge {
  std::size_t left = 0;
  std::size_t right = 0;
  double height = 0.0;
  std::size_t node = 0;
};

/// Merge history of one frame. Merging stops at the first forbidden
/// linkage, so the result may be a forest.
struct Dendrogram {
  std::size_t leaf_count = 0;
  std::vector<Merge> merges;
};

/// Groups of detection indices. Canonical form: members ascending inside each
/// group, groups ordered by their smallest member.
using Partition = std::vector<std::vector<std::size_t>>;

Partition canonical(Partition p);

/// Complete-linkage agglomerative clustering over Θ. Ties are broken toward
/// the pair of lowest node ids, so the result is deterministic.
Dendrogram build_dendrogram(const ConnectivityMatrix& theta);

/// Partition after applying the first `prefix` merges.
Partition partition_at(const Dendrogram& dendro, std::size_t prefix);

/// Partition after applying every merge whose height is <= `height`.
Partition cut_at_height(const Dendrogram& dendro, double height);

/// All-singletons plus one candidate per merge-list prefix, deduplicated,
/// ordered from the lowest cut upward.
std::vector<Partition> enumerate_cuts(const Dendrogram& dendro);

/// Smallest admissible inter-cluster entry over the largest cluster diameter.
/// Forbidden inter-cluster entries are ignored; when none is admissible the
/// separation is infinite and so is the index. A zero largest diameter with
/// some multi-member cluster also scores infinite, unless the separation is
/// zero too. Returns nullopt for all singletons and for that 0/0 case.
std::optional<double> dunn_index(const Partition& candidate, const ConnectivityMatrix& theta);

/// Dunn-maximizing cut. Ties go to fewer clusters, then to the lower cut.
/// Falls back to all singletons when no candidate has a defined index.
Partition select_partition(const Dendrogram& dendro, const ConnectivityMatrix& theta);

struct Cluster {
  std::vector<std::size_t> members;
  GroundPoint centroid;
};

struct ClusterSet {
  int frame = 0;
  std::vector<Cluster> clusters;
};

/// Per-axis mean in the local metric frame, expressed in both frames.
GroundPoint centroid(std::span<const GroundPoint> members, const Anchor& anchor);

ClusterSet make_cluster_set(int frame, const Partition& partition,
                            std::span<const GroundPoint> grounds, const Anchor& anchor);

}  // namespace mtmc
