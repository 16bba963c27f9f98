#include "mtmc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "mtmc/affinity.hpp"
#include "mtmc/geometry.hpp"

namespace mtmc {

void PipelineConfig::validate() const {
  if (!(radius > 0.0)) throw ConfigError("association radius must be positive");
  if (fixed_cut_height && !(*fixed_cut_height >= 0.0)) {
    throw ConfigError("fixed cut height must be non-negative");
  }
  tracker.validate();
}

Pipeline::Pipeline(Calibration calib, PipelineConfig config)
    : calib_(std::move(calib)), config_(std::move(config)), tracker_(config_.tracker, calib_) {
  config_.validate();
}

FrameResult Pipeline::process(const FrameBatch& batch) {
  const auto start = std::chrono::steady_clock::now();
  FrameResult result;
  result.frame = batch.frame;
  result.detection_count = batch.detections.size();

  std::vector<GroundPoint> grounds;
  grounds.reserve(batch.detections.size());
  for (const auto& det : batch.detections) {
    if (det.frame != batch.frame) {
      throw TrackerError(fmt::format("frame {}: batch holds a detection of frame {}", batch.frame,
                                     det.frame));
    }
    try {
      const auto& cam = calib_.camera(det.camera_id);
      grounds.push_back(make_ground_point(calib_.anchor, project_to_gps(cam.homography, det.bbox)));
    } catch (const std::exception& e) {
      throw GeometryError(fmt::format("frame {}, camera {}: {}", batch.frame, det.camera_id, e.what()));
    }
  }

  const ConnectivityMatrix theta = build_connectivity(batch, grounds, config_.radius);
  result.dendrogram = build_dendrogram(theta);
  const Partition partition = config_.fixed_cut_height
                                  ? cut_at_height(result.dendrogram, *config_.fixed_cut_height)
                                  : select_partition(result.dendrogram, theta);
  result.clusters = make_cluster_set(batch.frame, partition, grounds, calib_.anchor);
  result.rows = tracker_.step(result.clusters, batch.detections);

  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

double RunStats::mean_ms() const {
  if (frame_seconds.empty()) return 0.0;
  return 1e3 * std::accumulate(frame_seconds.begin(), frame_seconds.end(), 0.0) /
         static_cast<double>(frame_seconds.size());
}

double RunStats::p99_ms() const {
  if (frame_seconds.empty()) return 0.0;
  std::vector<double> sorted = frame_seconds;
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(sorted.size())));
  return 1e3 * sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

RunStats run_streams(Pipeline& pipeline, std::span<DetectionStream> streams,
                     std::optional<int> frame_count,
                     const std::function<void(const FrameResult&)>& on_frame) {
  RunStats stats;
  const auto drained = [&] {
    return std::all_of(streams.begin(), streams.end(), [](DetectionStream& s) { return s.exhausted(); });
  };
  for (int frame = 0;; ++frame) {
    if (frame_count ? frame >= *frame_count : drained()) break;
    FrameBatch batch;
    batch.frame = frame;
    for (auto& stream : streams) {
      auto dets = stream.take_frame(frame);
      std::move(dets.begin(), dets.end(), std::back_inserter(batch.detections));
    }
    FrameResult result = pipeline.process(batch);
    ++stats.frames_processed;
    stats.frame_seconds.push_back(result.seconds);
    if (on_frame) on_frame(result);
  }
  stats.tracks_created = pipeline.tracker().tracks_created();
  return stats;
}

std::vector<OutputRow> track_detections(const Calibration& calib,
                                        const std::map<int, std::vector<Detection>>& detections,
                                        const PipelineConfig& config, int frame_count,
                                        RunStats* stats) {
  std::vector<Detection> all;
  for (const auto& [cam, dets] : detections) all.insert(all.end(), dets.begin(), dets.end());
  const auto batches = batch_by_frame(all, 0, frame_count - 1);
  Pipeline pipeline(calib, config);
  std::vector<OutputRow> rows;
  RunStats local;
  for (const auto& batch : batches) {
    FrameResult result = pipeline.process(batch);
    ++local.frames_processed;
    local.frame_seconds.push_back(result.seconds);
    rows.insert(rows.end(), result.rows.begin(), result.rows.end());
  }
  local.tracks_created = pipeline.tracker().tracks_created();
  if (stats) *stats = std::move(local);
  return rows;
}

}  // namespace mtmc
