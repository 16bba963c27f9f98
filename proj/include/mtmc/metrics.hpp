#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>

#include "mtmc/tracker.hpp"
#include "mtmc/types.hpp"

namespace mtmc {

/// (camera, frame) -> box of one identity across every camera.
using Trajectory = std::map<std::pair<int, int>, BBox>;

struct TrajectorySet {
  std::map<int, Trajectory> entries;

  /// Throws std::invalid_argument when the identity already has a box for
  /// that (camera, frame).
  void add(int trajectory_id, int camera, int frame, const BBox& box);
  std::size_t box_count() const;
};

TrajectorySet trajectories_from_rows(std::span<const OutputRow> rows, bool include_synthetic = true);

/// Reads every `camNNN.csv` in `dir` as track-format rows.
TrajectorySet load_trajectories(const std::filesystem::path& dir, bool include_synthetic = true);

struct IdReport {
  long long idtp = 0;
  long long idfp = 0;
  long long idfn = 0;
  double idp = 0.0;
  double idr = 0.0;
  double idf1 = 0.0;
};

/// Number of shared (camera, frame) keys whose boxes have IoU strictly above `tau_iou`.
std::size_t frame_overlap(const Trajectory& gt, const Trajectory& pred, double tau_iou);

/// Identity precision/recall/F1 under the globally optimal one-to-one
/// ground-truth to prediction trajectory matching.
IdReport evaluate(const TrajectorySet& gt, const TrajectorySet& pred, double tau_iou);

/// Fills idp/idr/idf1 from the counts. Empty denominators give 0.
IdReport finalize_report(long long idtp, long long idfp, long long idfn);

std::string report_to_json(const IdReport& report, double tau_iou);

}  // namespace mtmc
