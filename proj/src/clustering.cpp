#include "mtmc/clustering.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

namespace mtmc {

Partition canonical(Partition p) {
  for (auto& group : p) std::sort(group.begin(), group.end());
  p.erase(std::remove_if(p.begin(), p.end(), [](const auto& g) { return g.empty(); }), p.end());
  std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return p;
}

Dendrogram build_dendrogram(const ConnectivityMatrix& theta) {
  const std::size_t n = theta.size();
  Dendrogram dendro;
  dendro.leaf_count = n;
  if (n < 2) return dendro;

  // linkage[a][b] over active cluster slots; slot k holds node `node_of[k]`.
  std::vector<std::vector<double>> linkage(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) linkage[i][j] = theta(i, j);
  }
  std::vector<std::size_t> node_of(n);
  std::iota(node_of.begin(), node_of.end(), std::size_t{0});
  std::vector<bool> active(n, true);

  for (std::size_t step = 0; step + 1 < n; ++step) {
    double best = ConnectivityMatrix::kForbidden;
    std::size_t best_a = n;
    std::size_t best_b = n;
    std::pair<std::size_t, std::size_t> best_nodes{n * 2, n * 2};
    for (std::size_t a = 0; a < n; ++a) {
      if (!active[a]) continue;
      for (std::size_t b = a + 1; b < n; ++b) {
        if (!active[b]) continue;
        const double d = linkage[a][b];
        if (d == ConnectivityMatrix::kForbidden) continue;
        const std::pair<std::size_t, std::size_t> nodes = std::minmax(node_of[a], node_of[b]);
        if (d < best || (d == best && nodes < best_nodes)) {
          best = d;
          best_a = a;
          best_b = b;
          best_nodes = nodes;
        }
      }
    }
    if (best_a == n) break;

    const std::size_t new_node = n + dendro.merges.size();
    dendro.merges.push_back(Merge{best_nodes.first, best_nodes.second, best, new_node});
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == best_a || k == best_b) continue;
      const double d = std::max(linkage[best_a][k], linkage[best_b][k]);
      linkage[best_a][k] = d;
      linkage[k][best_a] = d;
    }
    active[best_b] = false;
    node_of[best_a] = new_node;
  }
  return dendro;
}

Partition partition_at(const Dendrogram& dendro, std::size_t prefix) {
  const std::size_t n = dendro.leaf_count;
  if (prefix > dendro.merges.size()) throw std::out_of_range("partition_at: prefix too long");
  std::vector<std::vector<std::size_t>> members(n + prefix);
  std::vector<bool> alive(n + prefix, false);
  for (std::size_t i = 0; i < n; ++i) {
    members[i] = {i};
    alive[i] = true;
  }
  for (std::size_t m = 0; m < prefix; ++m) {
    const Merge& merge = dendro.merges[m];
    auto& out = members[merge.node];
    out = std::move(members[merge.left]);
    out.insert(out.end(), members[merge.right].begin(), members[merge.right].end());
    members[merge.right].clear();
    alive[merge.left] = alive[merge.right] = false;
    alive[merge.node] = true;
  }
  Partition p;
  for (std::size_t k = 0; k < members.size(); ++k) {
    if (alive[k]) p.push_back(std::move(members[k]));
  }
  return canonical(std::move(p));
}

Partition cut_at_height(const Dendrogram& dendro, double height) {
  std::size_t prefix = 0;
  while (prefix < dendro.merges.size() && dendro.merges[prefix].height <= height) ++prefix;
  return partition_at(dendro, prefix);
}

std::vector<Partition> enumerate_cuts(const Dendrogram& dendro) {
  std::vector<Partition> out;
  std::set<Partition> seen;
  for (std::size_t prefix = 0; prefix <= dendro.merges.size(); ++prefix) {
    Partition p = partition_at(dendro, prefix);
    if (seen.insert(p).second) out.push_back(std::move(p));
  }
  return out;
}

std::optional<double> dunn_index(const Partition& candidate, const ConnectivityMatrix& theta) {
  double min_separation = ConnectivityMatrix::kForbidden;
  double max_diameter = 0.0;
  bool has_pair = false;
  for (std::size_t a = 0; a < candidate.size(); ++a) {
    const auto& ca = candidate[a];
    has_pair = has_pair || ca.size() > 1;
    for (std::size_t i = 0; i < ca.size(); ++i) {
      for (std::size_t j = i + 1; j < ca.size(); ++j) {
        max_diameter = std::max(max_diameter, theta(ca[i], ca[j]));
      }
    }
    for (std::size_t b = a + 1; b < candidate.size(); ++b) {
      for (const std::size_t i : ca) {
        for (const std::size_t j : candidate[b]) {
          min_separation = std::min(min_separation, theta(i, j));
        }
      }
    }
  }
  if (!has_pair) return std::nullopt;
  if (max_diameter == 0.0) {
    // Identical members: perfectly compact, unless other clusters are just as close.
    if (min_separation == 0.0) return std::nullopt;
    return ConnectivityMatrix::kForbidden;
  }
  // No admissible pair across clusters: the constraints keep them infinitely apart.
  if (min_separation == ConnectivityMatrix::kForbidden) return ConnectivityMatrix::kForbidden;
  return min_separation / max_diameter;
}

Partition select_partition(const Dendrogram& dendro, const ConnectivityMatrix& theta) {
  const auto candidates = enumerate_cuts(dendro);
  std::optional<std::size_t> best;
  double best_score = 0.0;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const auto score = dunn_index(candidates[k], theta);
    if (!score) continue;
    // Candidates run from the lowest cut upward, so at equal score a later
    // candidate only wins when it has strictly fewer clusters.
    if (!best || *score > best_score ||
        (*score == best_score && candidates[k].size() < candidates[*best].size())) {
      best = k;
      best_score = *score;
    }
  }
  if (!best) return candidates.front();
  return candidates[*best];
}

GroundPoint centroid(std::span<const GroundPoint> members, const Anchor& anchor) {
  if (members.empty()) throw std::invalid_argument("centroid of an empty cluster");
  double east = 0.0;
  double north = 0.0;
  for (const auto& p : members) {
    east += p.east;
    north += p.north;
  }
  const double n = static_cast<double>(members.size());
  if (members.size() == 1) return members.front();
  return make_ground_point_local(anchor, east / n, north / n);
}

ClusterSet make_cluster_set(int frame, const Partition& partition,
                            std::span<const GroundPoint> grounds, const Anchor& anchor) {
  ClusterSet set;
  set.frame = frame;
  set.clusters.reserve(partition.size());
  std::vector<GroundPoint> pts;
  for (const auto& group : partition) {
    pts.clear();
    for (const std::size_t i : group) pts.push_back(grounds[i]);
    set.clusters.push_back(Cluster{group, centroid(pts, anchor)});
  }
  return set;
}

}  // namespace mtmc
