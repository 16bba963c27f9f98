#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mtmc/calibration.hpp"
#include "mtmc/clustering.hpp"
#include "mtmc/ingest.hpp"
#include "mtmc/tracker.hpp"

namespace mtmc {

struct PipelineConfig {
  /// Association radius r (m).
  double radius = 8.0;
  TrackerConfig tracker;
  /// Cut every dendrogram at this height instead of the Dunn-selected cut.
  std::optional<double> fixed_cut_height;

  void validate() const;
};

struct FrameResult {
  int frame = 0;
  std::size_t detection_count = 0;
  Dendrogram dendrogram;
  ClusterSet clusters;
  std::vector<OutputRow> rows;
  /// Wall-clock processing time of the frame (s), excluding input reading.
  double seconds = 0.0;
};

/// Cross-camera clustering plus temporal association, one frame at a time.
class Pipeline {
 public:
  Pipeline(Calibration calib, PipelineConfig config);

  /// Projects, clusters and tracks one frame. Frames must arrive in strictly
  /// increasing order; empty batches still advance the motion model.
  FrameResult process(const FrameBatch& batch);

  const Tracker& tracker() const { return tracker_; }
  const Calibration& calibration() const { return calib_; }
  const PipelineConfig& config() const { return config_; }

 private:
  Calibration calib_;
  PipelineConfig config_;
  Tracker tracker_;
};

struct RunStats {
  int frames_processed = 0;
  int tracks_created = 0;
  std::vector<double> frame_seconds;

  double mean_ms() const;
  double p99_ms() const;
};

/// Pulls frame after frame from the per-camera streams and feeds the
/// pipeline; `on_frame` sees each frame's result as soon as it is produced.
/// Runs `frame_count` frames from frame 0, or until every stream is drained
/// when no count is given.
RunStats run_streams(Pipeline& pipeline, std::span<DetectionStream> streams,
                     std::optional<int> frame_count,
                     const std::function<void(const FrameResult&)>& on_frame);

/// In-memory convenience: tracks pre-loaded per-camera detections over frames
/// [0, frame_count) and returns every output row.
std::vector<OutputRow> track_detections(const Calibration& calib,
                                        const std::map<int, std::vector<Detection>>& detections,
                                        const PipelineConfig& config, int frame_count,
                                        RunStats* stats = nullptr);

}  // namespace mtmc
