#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "mtmc/calibration.hpp"
#include "mtmc/clustering.hpp"
#include "mtmc/kalman.hpp"
#include "mtmc/types.hpp"

namespace mtmc {

enum class OcclusionMode { kNone, kBlind, kReprojection };

std::string_view to_string(OcclusionMode mode);
std::optional<OcclusionMode> parse_occlusion_mode(std::string_view text);

struct TrackerConfig {
  /// Largest prediction-to-centroid distance accepted as a match (m).
  double gate = 8.0;
  /// Frames a confirmed track may coast without a match (blind/reprojection).
  int max_age = 10;
  /// Consecutive matches before a track is confirmed and emitted.
  int min_hits = 2;
  OcclusionMode occlusion_mode = OcclusionMode::kBlind;
  MotionNoise noise;
  /// Observations retained per track.
  std::size_t history_length = 32;

  void validate() const;
};

struct TrackObservation {
  int frame = 0;
  GroundPoint position;
  /// (camera, box) of every member detection.
  std::vector<std::pair<int, BBox>> members;
};

struct CachedBox {
  BBox box;
  int frame = 0;
  /// Camera's projected ground point minus the track position when cached
  /// (local meters); views of one vehicle land at view-dependent offsets.
  double offset_east = 0.0;
  double offset_north = 0.0;
};

struct Track {
  int id = 0;
  KalmanState state;
  std::deque<TrackObservation> history;
  int frames_since_update = 0;
  int hit_streak = 0;
  bool confirmed = false;
  /// Most recent real box per camera.
  std::map<int, CachedBox> last_boxes;
};

/// One line of a per-camera track file.
struct OutputRow {
  int camera = 0;
  int frame = 0;
  int track_id = 0;
  BBox bbox;
  double phi = 0.0;
  double lambda = 0.0;
  bool synthetic = false;
};

struct AssociationResult {
  /// (track index, cluster index)
  std::vector<std::pair<std::size_t, std::size_t>> matches;
  std::vector<std::size_t> unmatched_tracks;
  std::vector<std::size_t> unmatched_clusters;
};

/// Minimum-total-distance one-to-one assignment of predicted track positions
/// to cluster centroids; assigned pairs farther apart than `gate` are undone.
AssociationResult associate(std::span<const GroundPoint> predicted,
                            std::span<const Cluster> clusters, double gate);

/// Synthesizes boxes for cameras that recently saw `track` but are absent from
/// `present_cameras`. Each box keeps the camera's cached size and has its base
/// midpoint at the back-projection of `position` shifted by the camera's cached
/// ground offset. Cameras whose cache is older than `max_gap` frames, whose
/// back-projection is degenerate, or whose base point falls outside the image
/// are skipped.
std::vector<OutputRow> reproject_lost_cameras(const Track& track, const GroundPoint& position,
                                              const std::set<int>& present_cameras,
                                              const Calibration& calib, int frame, int max_gap);

/// Online temporal association of per-frame clusters into tracks.
class Tracker {
 public:
  Tracker(TrackerConfig config, Calibration calib);

  /// Advances to `clusters.frame`. `detections` are the frame's detections
  /// that cluster member indices refer to. Returns the frame's output rows.
  std::vector<OutputRow> step(const ClusterSet& clusters, std::span<const Detection> detections);

  const std::vector<Track>& tracks() const { return tracks_; }
  int tracks_created() const { return next_id_ - 1; }
  std::optional<int> last_frame() const { return last_frame_; }
  const TrackerConfig& config() const { return config_; }

 private:
  int effective_max_age() const;

  TrackerConfig config_;
  Calibration calib_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
  std::optional<int> last_frame_;
};

}  // namespace mtmc
