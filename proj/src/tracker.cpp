#include "mtmc/tracker.hpp"

#include <algorithm>
#include <string>

#include "mtmc/assignment.hpp"

namespace mtmc {

std::string_view to_string(OcclusionMode mode) {
  switch (mode) {
    case OcclusionMode::kNone:
      return "none";
    case OcclusionMode::kBlind:
      return "blind";
    case OcclusionMode::kReprojection:
      return "reprojection";
  }
  return "none";
}

std::optional<OcclusionMode> parse_occlusion_mode(std::string_view text) {
  if (text == "none") return OcclusionMode::kNone;
  if (text == "blind") return OcclusionMode::kBlind;
  if (text == "reprojection") return OcclusionMode::kReprojection;
  return std::nullopt;
}

void TrackerConfig::validate() const {
  if (!(gate > 0.0)) throw ConfigError("tracker gate must be positive");
  if (max_age < 0) throw ConfigError("max_age must be >= 0");
  if (min_hits < 1) throw ConfigError("min_hits must be >= 1");
  if (!(noise.process_std > 0.0) || !(noise.measurement_std > 0.0) ||
      !(noise.initial_velocity_std > 0.0)) {
    throw ConfigError("Kalman noise scales must be positive");
  }
  if (history_length < 1) throw ConfigError("history_length must be >= 1");
}

AssociationResult associate(std::span<const GroundPoint> predicted,
                            std::span<const Cluster> clusters, double gate) {
  AssociationResult result;
  if (predicted.empty() || clusters.empty()) {
    for (std::size_t t = 0; t < predicted.size(); ++t) result.unmatched_tracks.push_back(t);
    for (std::size_t c = 0; c < clusters.size(); ++c) result.unmatched_clusters.push_back(c);
    return result;
  }
  Eigen::MatrixXd cost(static_cast<Eigen::Index>(predicted.size()),
                       static_cast<Eigen::Index>(clusters.size()));
  for (std::size_t t = 0; t < predicted.size(); ++t) {
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      cost(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) =
          ground_distance(predicted[t], clusters[c].centroid);
    }
  }
  const auto row_to_col = solve_assignment(cost);
  std::vector<bool> cluster_used(clusters.size(), false);
  for (std::size_t t = 0; t < predicted.size(); ++t) {
    const int c = row_to_col[t];
    if (c >= 0 && cost(static_cast<Eigen::Index>(t), c) <= gate) {
      result.matches.emplace_back(t, static_cast<std::size_t>(c));
      cluster_used[static_cast<std::size_t>(c)] = true;
    } else {
      result.unmatched_tracks.push_back(t);
    }
  }
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (!cluster_used[c]) result.unmatched_clusters.push_back(c);
  }
  return result;
}

std::vector<OutputRow> reproject_lost_cameras(const Track& track, const GroundPoint& position,
                                              const std::set<int>& present_cameras,
                                              const Calibration& calib, int frame, int max_gap) {
  std::vector<OutputRow> rows;
  for (const auto& [camera, cached] : track.last_boxes) {
    if (present_cameras.contains(camera)) continue;
    if (frame - cached.frame > max_gap) continue;
    const CameraCalibration* cam = calib.find_camera(camera);
    if (!cam) continue;
    const LatLon target = from_local(calib.anchor, position.east + cached.offset_east,
                                     position.north + cached.offset_north);
    Pixel base;
    try {
      base = back_project(cam->homography, target);
    } catch (const GeometryError&) {
      continue;
    }
    if (!(base.x >= 0.0 && base.x <= cam->frame_width && base.y >= 0.0 &&
          base.y <= cam->frame_height)) {
      continue;
    }
    const BBox box{base.x - 0.5 * cached.box.w, base.y - cached.box.h, cached.box.w, cached.box.h};
    rows.push_back(OutputRow{camera, frame, track.id, box, position.phi, position.lambda, true});
  }
  return rows;
}

Tracker::Tracker(TrackerConfig config, Calibration calib)
    : config_(std::move(config)), calib_(std::move(calib)) {
  config_.validate();
}

int Tracker::effective_max_age() const {
  return config_.occlusion_mode == OcclusionMode::kNone ? 0 : config_.max_age;
}

std::vector<OutputRow> Tracker::step(const ClusterSet& clusters,
                                     std::span<const Detection> detections) {
  const int frame = clusters.frame;
  if (last_frame_ && frame <= *last_frame_) {
    throw TrackerError("tracker step for frame " + std::to_string(frame) + " after frame " +
                       std::to_string(*last_frame_));
  }
  const int elapsed = last_frame_ ? frame - *last_frame_ : 1;
  last_frame_ = frame;

  // (1) predict
  for (auto& track : tracks_) {
    for (int k = 0; k < elapsed; ++k) track.state = predict(track.state, config_.noise);
  }

  // (2) associate
  std::vector<GroundPoint> predicted;
  predicted.reserve(tracks_.size());
  for (const auto& track : tracks_) {
    predicted.push_back(
        make_ground_point_local(calib_.anchor, track.state.mean(0), track.state.mean(1)));
  }
  const AssociationResult assoc = associate(predicted, clusters.clusters, config_.gate);

  std::vector<OutputRow> rows;
  const auto record = [&](Track& track, const Cluster& cluster) {
    TrackObservation obs;
    obs.frame = frame;
    obs.position = cluster.centroid;
    for (const std::size_t m : cluster.members) {
      const Detection& det = detections[m];
      obs.members.emplace_back(det.camera_id, det.bbox);
      const GroundPoint seen = make_ground_point(
          calib_.anchor, project_to_gps(calib_.camera(det.camera_id).homography, det.bbox));
      track.last_boxes[det.camera_id] = CachedBox{det.bbox, frame, seen.east - track.state.mean(0),
                                                  seen.north - track.state.mean(1)};
    }
    track.history.push_back(std::move(obs));
    while (track.history.size() > config_.history_length) track.history.pop_front();
  };
  const auto emit_members = [&](const Track& track, const Cluster& cluster, const LatLon& gps) {
    for (const std::size_t m : cluster.members) {
      const Detection& det = detections[m];
      rows.push_back(OutputRow{det.camera_id, frame, track.id, det.bbox, gps.phi, gps.lambda, false});
    }
  };

  // (3) matched tracks
  std::vector<bool> matched(tracks_.size(), false);
  for (const auto& [t, c] : assoc.matches) {
    Track& track = tracks_[t];
    const Cluster& cluster = clusters.clusters[c];
    matched[t] = true;
    track.state = update(track.state, Eigen::Vector2d(cluster.centroid.east, cluster.centroid.north),
                         config_.noise);
    track.frames_since_update = 0;
    ++track.hit_streak;
    if (track.hit_streak >= config_.min_hits) track.confirmed = true;
    if (!track.confirmed) {
      record(track, cluster);
      continue;
    }
    const LatLon gps = from_local(calib_.anchor, track.state.mean(0), track.state.mean(1));
    emit_members(track, cluster, gps);
    if (config_.occlusion_mode == OcclusionMode::kReprojection) {
      std::set<int> present;
      for (const std::size_t m : cluster.members) present.insert(detections[m].camera_id);
      const GroundPoint here =
          make_ground_point_local(calib_.anchor, track.state.mean(0), track.state.mean(1));
      auto artificial = reproject_lost_cameras(track, here, present, calib_, frame, config_.max_age);
      rows.insert(rows.end(), artificial.begin(), artificial.end());
    }
    record(track, cluster);
  }

  // (5) age unmatched tracks, drop expired ones
  const int max_age = effective_max_age();
  std::vector<Track> survivors;
  survivors.reserve(tracks_.size() + assoc.unmatched_clusters.size());
  for (std::size_t t = 0; t < tracks_.size(); ++t) {
    Track& track = tracks_[t];
    if (!matched[t]) {
      track.frames_since_update += elapsed;
      track.hit_streak = 0;
      if (!track.confirmed || track.frames_since_update > max_age) continue;
      // (6) coasting confirmed track
      if (config_.occlusion_mode == OcclusionMode::kReprojection) {
        const GroundPoint here =
            make_ground_point_local(calib_.anchor, track.state.mean(0), track.state.mean(1));
        auto artificial = reproject_lost_cameras(track, here, {}, calib_, frame, config_.max_age);
        rows.insert(rows.end(), artificial.begin(), artificial.end());
      }
    }
    survivors.push_back(std::move(track));
  }
  tracks_ = std::move(survivors);

  // (4) unmatched clusters spawn tracks
  for (const std::size_t c : assoc.unmatched_clusters) {
    const Cluster& cluster = clusters.clusters[c];
    Track track;
    track.id = next_id_++;
    track.state = initiate(Eigen::Vector2d(cluster.centroid.east, cluster.centroid.north),
                           config_.noise);
    track.hit_streak = 1;
    track.confirmed = config_.min_hits <= 1;
    if (track.confirmed) {
      const LatLon gps = from_local(calib_.anchor, track.state.mean(0), track.state.mean(1));
      emit_members(track, cluster, gps);
    }
    record(track, cluster);
    tracks_.push_back(std::move(track));
  }
  return rows;
}

}  // namespace mtmc
