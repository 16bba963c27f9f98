#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mtmc/calibration.hpp"
#include "mtmc/tracker.hpp"
#include "mtmc/types.hpp"

namespace mtmc::sim {

/// Pinhole camera above the ground plane. Yaw is the heading of the optical
/// axis, counter-clockwise from east; pitch is the downward tilt.
struct CameraPose {
  int id = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // east, north, height (m)
  double yaw_deg = 0.0;
  double pitch_deg = 20.0;
  double focal_px = 1000.0;
  int frame_width = 1280;
  int frame_height = 960;
  /// Ground region (local meters) where detections are emitted; empty means
  /// the whole image.
  std::vector<Eigen::Vector2d> visibility;
};

struct VehicleSpec {
  int id = 0;
  int entry_frame = 0;
  std::vector<Eigen::Vector2d> waypoints;  // local meters
  double speed = 1.0;                      // m/frame
  double length = 4.5;
  double width = 1.8;
  double height = 1.5;
};

/// Removes `vehicle`'s detections from `camera` for frames [first_frame, last_frame].
struct OcclusionEvent {
  int camera = 0;
  int first_frame = 0;
  int last_frame = 0;
  int vehicle = 0;
};

struct ScenarioSpec {
  std::uint64_t seed = 1;
  int duration = 100;
  double fps = 10.0;
  Anchor anchor{42.4995, -90.6902};
  std::vector<CameraPose> cameras;
  std::vector<VehicleSpec> vehicles;
  std::vector<OcclusionEvent> occlusions;

  void validate() const;
};

struct NoiseSpec {
  double bbox_jitter_px = 0.0;
  double miss_probability = 0.0;
  /// Expected false positives per camera and frame (Poisson).
  double false_positive_rate = 0.0;
  std::size_t feature_dim = 16;
  double embedding_norm = 10.0;
  /// Per-component std of the view noise added to every descriptor.
  double feature_noise_std = 0.0;
  /// Norm of the fixed per-camera bias added to every descriptor of that camera.
  double camera_bias_norm = 0.0;
  /// Detection-only frame offset per camera id (desync).
  std::map<int, int> camera_offsets;

  void validate() const;
};

struct VehiclePose {
  Eigen::Vector2d center;
  double heading = 0.0;  // radians, counter-clockwise from east
};

std::optional<VehiclePose> vehicle_pose(const VehicleSpec& vehicle, int frame);

Eigen::Matrix<double, 3, 4> projection_matrix(const CameraPose& camera);

/// Local ground meters -> pixels.
Eigen::Matrix3d ground_to_pixel(const CameraPose& camera);

/// Pixels -> GPS degrees, the calibration-file convention.
Homography pixel_to_gps(const CameraPose& camera, const Anchor& anchor);

Calibration make_calibration(const ScenarioSpec& spec);

/// Axis-aligned pixel bounds of the vehicle's 3D box, or nullopt when any
/// corner is behind the camera.
std::optional<BBox> project_vehicle(const CameraPose& camera, const VehiclePose& pose,
                                    const VehicleSpec& vehicle);

bool point_in_polygon(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& polygon);

/// Fixed random embedding per vehicle id (norm `embedding_norm`). Depends
/// only on the seed, the ids, the dimension and the norm.
std::map<int, Eigen::VectorXd> identity_embeddings(const ScenarioSpec& spec, const NoiseSpec& noise);

/// Smallest pairwise distance between identity embeddings.
double min_embedding_gap(const std::map<int, Eigen::VectorXd>& embeddings);

struct Scenario {
  ScenarioSpec spec;
  NoiseSpec noise;
  Calibration calibration;
  /// Per camera, ascending frame order.
  std::map<int, std::vector<Detection>> detections;
  /// Vehicle id behind each detection (-1 for false positives), parallel to `detections`.
  std::map<int, std::vector<int>> detection_truth;
  /// Per camera, track-file rows with the vehicle id as track id.
  std::map<int, std::vector<OutputRow>> ground_truth;
  std::map<int, Eigen::VectorXd> embeddings;
  std::vector<std::string> warnings;
};

/// Deterministic for a given spec and noise.
Scenario generate(const ScenarioSpec& spec, const NoiseSpec& noise);

/// Writes calibration.json, scenario.json, detections/, features/ and
/// ground_truth/ under `dir`.
void write_scenario(const Scenario& scenario, const std::filesystem::path& dir);

std::string scenario_to_json(const ScenarioSpec& spec, const NoiseSpec& noise);
std::pair<ScenarioSpec, NoiseSpec> parse_scenario(const std::string& json_text);
std::pair<ScenarioSpec, NoiseSpec> load_scenario(const std::filesystem::path& path);

/// Four-way intersection watched by cameras on its corners.
struct IntersectionParams {
  std::uint64_t seed = 1;
  int n_cameras = 4;
  int n_vehicles = 20;
  int duration = 600;
  double arm_length = 60.0;
  double min_speed = 0.8;
  double max_speed = 1.2;
  /// Smallest center-to-center distance allowed between any two vehicles.
  double min_separation = 6.0;
};

ScenarioSpec make_intersection(const IntersectionParams& params);

}  // namespace mtmc::sim
