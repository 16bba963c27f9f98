#include "mtmc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "mtmc/ingest.hpp"
#include "mtmc/track_io.hpp"

namespace mtmc::sim {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

// Dividing by the exact power of ten yields the double nearest to the decimal.
double round_to(double v, double scale) { return std::round(v * scale) / scale; }

BBox round_box(const BBox& b) {
  return BBox{round_to(b.x, 1e3), round_to(b.y, 1e3), round_to(b.w, 1e3), round_to(b.h, 1e3)};
}

bool inside_image(const BBox& b, const CameraPose& cam) {
  return b.x >= 0.0 && b.y >= 0.0 && b.x + b.w <= cam.frame_width && b.y + b.h <= cam.frame_height &&
         b.w >= 2.0 && b.h >= 2.0;
}

Eigen::VectorXd random_direction(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  do {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
  } while (v.norm() < 1e-9);
  return v.normalized();
}

// Ground point (local meters) under a pixel, or nullopt if the ray misses
// the ground in front of the camera.
std::optional<Eigen::Vector2d> pixel_to_ground(const CameraPose& cam, const Eigen::Matrix3d& g2p_inv,
                                               double u, double v) {
  const Eigen::Vector3d q = g2p_inv * Eigen::Vector3d(u, v, 1.0);
  if (std::abs(q.z()) < 1e-12) return std::nullopt;
  const Eigen::Vector2d g = q.head<2>() / q.z();
  const Eigen::Vector3d depth = projection_matrix(cam) * Eigen::Vector4d(g.x(), g.y(), 0.0, 1.0);
  if (depth.z() <= 0.0) return std::nullopt;
  return g;
}

struct ViewCheck {
  const CameraPose* cam;
  Eigen::Matrix3d g2p_inv;
};

// A box is emitted when it lies inside the image and its base midpoint
// projects into the visibility polygon.
std::optional<BBox> visible_box(const ViewCheck& view, const VehiclePose& pose,
                                const VehicleSpec& vehicle) {
  const auto raw = project_vehicle(*view.cam, pose, vehicle);
  if (!raw) return std::nullopt;
  const BBox box = round_box(*raw);
  if (!inside_image(box, *view.cam)) return std::nullopt;
  if (!view.cam->visibility.empty()) {
    const auto g = pixel_to_ground(*view.cam, view.g2p_inv, box.base_x(), box.base_y());
    if (!g || !point_in_polygon(*g, view.cam->visibility)) return std::nullopt;
  }
  return box;
}

}  // namespace

void ScenarioSpec::validate() const {
  if (cameras.size() < 2) throw ConfigError("scenario needs at least 2 cameras");
  if (duration <= 0) throw ConfigError("scenario duration must be positive");
  if (!(fps > 0.0)) throw ConfigError("fps must be positive");
  std::set<int> cam_ids;
  for (const auto& c : cameras) {
    if (c.id < 0 || !cam_ids.insert(c.id).second) throw ConfigError("camera ids must be unique and >= 0");
    if (c.frame_width <= 0 || c.frame_height <= 0 || !(c.focal_px > 0.0)) {
      throw ConfigError(fmt::format("camera {}: invalid intrinsics", c.id));
    }
  }
  std::set<int> veh_ids;
  for (const auto& v : vehicles) {
    if (v.id < 0 || !veh_ids.insert(v.id).second) throw ConfigError("vehicle ids must be unique and >= 0");
    if (v.waypoints.size() < 2) throw ConfigError(fmt::format("vehicle {}: needs >= 2 waypoints", v.id));
    if (!(v.speed > 0.0)) throw ConfigError(fmt::format("vehicle {}: speed must be positive", v.id));
    if (!(v.length > 0.0 && v.width > 0.0 && v.height > 0.0)) {
      throw ConfigError(fmt::format("vehicle {}: dimensions must be positive", v.id));
    }
  }
  for (const auto& e : occlusions) {
    if (!veh_ids.contains(e.vehicle)) {
      throw ConfigError(fmt::format("occlusion event refers to unknown vehicle {}", e.vehicle));
    }
    if (!cam_ids.contains(e.camera)) {
      throw ConfigError(fmt::format("occlusion event refers to unknown camera {}", e.camera));
    }
    if (e.last_frame < e.first_frame) throw ConfigError("occlusion event has an empty interval");
  }
}

void NoiseSpec::validate() const {
  if (!(miss_probability >= 0.0 && miss_probability <= 1.0)) {
    throw ConfigError("miss_probability must lie in [0, 1]");
  }
  if (!(false_positive_rate >= 0.0)) throw ConfigError("false_positive_rate must be >= 0");
  if (feature_dim < 2) throw ConfigError("feature_dim must be >= 2");
  if (!(bbox_jitter_px >= 0.0 && feature_noise_std >= 0.0 && camera_bias_norm >= 0.0 &&
        embedding_norm > 0.0)) {
    throw ConfigError("noise scales must be non-negative and embedding_norm positive");
  }
}

std::optional<VehiclePose> vehicle_pose(const VehicleSpec& vehicle, int frame) {
  if (frame < vehicle.entry_frame) return std::nullopt;
  double remaining = vehicle.speed * (frame - vehicle.entry_frame);
  for (std::size_t i = 0; i + 1 < vehicle.waypoints.size(); ++i) {
    const Eigen::Vector2d a = vehicle.waypoints[i];
    const Eigen::Vector2d b = vehicle.waypoints[i + 1];
    const double len = (b - a).norm();
    if (len <= 0.0) continue;
    if (remaining <= len) {
      const Eigen::Vector2d dir = (b - a) / len;
      return VehiclePose{a + remaining * dir, std::atan2(dir.y(), dir.x())};
    }
    remaining -= len;
  }
  return std::nullopt;
}

Eigen::Matrix<double, 3, 4> projection_matrix(const CameraPose& camera) {
  const double yaw = camera.yaw_deg * kDeg;
  const double pitch = camera.pitch_deg * kDeg;
  const Eigen::Vector3d forward(std::cos(yaw) * std::cos(pitch), std::sin(yaw) * std::cos(pitch),
                                -std::sin(pitch));
  const Eigen::Vector3d right(std::sin(yaw), -std::cos(yaw), 0.0);
  const Eigen::Vector3d down = forward.cross(right);
  Eigen::Matrix3d rot;
  rot.row(0) = right.transpose();
  rot.row(1) = down.transpose();
  rot.row(2) = forward.transpose();
  Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
  k(0, 0) = camera.focal_px;
  k(1, 1) = camera.focal_px;
  k(0, 2) = 0.5 * camera.frame_width;
  k(1, 2) = 0.5 * camera.frame_height;
  Eigen::Matrix<double, 3, 4> rt;
  rt.leftCols<3>() = rot;
  rt.col(3) = -rot * camera.position;
  return k * rt;
}

Eigen::Matrix3d ground_to_pixel(const CameraPose& camera) {
  const auto p = projection_matrix(camera);
  Eigen::Matrix3d h;
  h.col(0) = p.col(0);
  h.col(1) = p.col(1);
  h.col(2) = p.col(3);
  return h;
}

Homography pixel_to_gps(const CameraPose& camera, const Anchor& anchor) {
  // (east, north, 1) -> (phi, lambda, 1), exact under the flat-earth model.
  Eigen::Matrix3d local_to_gps = Eigen::Matrix3d::Zero();
  local_to_gps(0, 1) = 1.0 / kMetersPerDegree;
  local_to_gps(0, 2) = anchor.phi0;
  local_to_gps(1, 0) = 1.0 / (kMetersPerDegree * std::cos(anchor.phi0 * kDeg));
  local_to_gps(1, 2) = anchor.lambda0;
  local_to_gps(2, 2) = 1.0;
  const Eigen::Matrix3d m = local_to_gps * ground_to_pixel(camera).inverse();
  return Homography(std::abs(m(2, 2)) > 1e-12 ? Eigen::Matrix3d(m / m(2, 2)) : m);
}

Calibration make_calibration(const ScenarioSpec& spec) {
  Calibration calib;
  calib.anchor = spec.anchor;
  for (const auto& cam : spec.cameras) {
    calib.cameras.push_back(
        CameraCalibration{cam.id, pixel_to_gps(cam, spec.anchor), cam.frame_width, cam.frame_height});
  }
  std::sort(calib.cameras.begin(), calib.cameras.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  return calib;
}

std::optional<BBox> project_vehicle(const CameraPose& camera, const VehiclePose& pose,
                                    const VehicleSpec& vehicle) {
  const auto p = projection_matrix(camera);
  const Eigen::Vector2d along(std::cos(pose.heading), std::sin(pose.heading));
  const Eigen::Vector2d across(-along.y(), along.x());
  double min_u = std::numeric_limits<double>::infinity();
  double min_v = min_u;
  double max_u = -min_u;
  double max_v = -min_u;
  for (const double dl : {-0.5, 0.5}) {
    for (const double dw : {-0.5, 0.5}) {
      const Eigen::Vector2d g = pose.center + dl * vehicle.length * along + dw * vehicle.width * across;
      for (const double z : {0.0, vehicle.height}) {
        const Eigen::Vector3d q = p * Eigen::Vector4d(g.x(), g.y(), z, 1.0);
        if (q.z() < 0.5) return std::nullopt;
        const double u = q.x() / q.z();
        const double v = q.y() / q.z();
        min_u = std::min(min_u, u);
        max_u = std::max(max_u, u);
        min_v = std::min(min_v, v);
        max_v = std::max(max_v, v);
      }
    }
  }
  return BBox{min_u, min_v, max_u - min_u, max_v - min_v};
}

bool point_in_polygon(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& polygon) {
  bool inside = false;
  for (std::size_t i = 0, j = polygon.size() - 1; i < polygon.size(); j = i++) {
    const auto& a = polygon[i];
    const auto& b = polygon[j];
    if ((a.y() > p.y()) != (b.y() > p.y()) &&
        p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x()) {
      inside = !inside;
    }
  }
  return inside;
}

std::map<int, Eigen::VectorXd> identity_embeddings(const ScenarioSpec& spec, const NoiseSpec& noise) {
  auto rng = make_rng(spec.seed, 1);
  std::vector<int> ids;
  for (const auto& v : spec.vehicles) ids.push_back(v.id);
  std::sort(ids.begin(), ids.end());
  std::map<int, Eigen::VectorXd> out;
  for (const int id : ids) out[id] = noise.embedding_norm * random_direction(rng, noise.feature_dim);
  return out;
}

double min_embedding_gap(const std::map<int, Eigen::VectorXd>& embeddings) {
  double gap = std::numeric_limits<double>::infinity();
  for (auto a = embeddings.begin(); a != embeddings.end(); ++a) {
    for (auto b = std::next(a); b != embeddings.end(); ++b) {
      gap = std::min(gap, (a->second - b->second).norm());
    }
  }
  return gap;
}

Scenario generate(const ScenarioSpec& spec, const NoiseSpec& noise) {
  spec.validate();
  noise.validate();
  Scenario out;
  out.spec = spec;
  out.noise = noise;
  out.calibration = make_calibration(spec);
  out.embeddings = identity_embeddings(spec, noise);

  auto rng = make_rng(spec.seed, 2);
  auto bias_rng = make_rng(spec.seed, 3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::poisson_distribution<int> fp_count(std::max(noise.false_positive_rate, 1e-300));

  std::vector<ViewCheck> views;
  std::map<int, Eigen::VectorXd> bias;
  std::vector<CameraPose> cams = spec.cameras;
  std::sort(cams.begin(), cams.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (const auto& cam : cams) {
    views.push_back(ViewCheck{&cam, ground_to_pixel(cam).inverse()});
    bias[cam.id] = noise.camera_bias_norm * random_direction(bias_rng, noise.feature_dim);
    out.detections[cam.id];
    out.detection_truth[cam.id];
    out.ground_truth[cam.id];
  }

  const auto make_feature = [&](const Eigen::VectorXd& base, int camera) {
    std::vector<double> f(noise.feature_dim);
    for (std::size_t i = 0; i < noise.feature_dim; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      double v = base(k) + bias[camera](k);
      if (noise.feature_noise_std > 0.0) v += noise.feature_noise_std * normal(rng);
      f[i] = round_to(v, 1e6);
    }
    return f;
  };
  const auto occluded = [&](int camera, int frame, int vehicle) {
    return std::any_of(spec.occlusions.begin(), spec.occlusions.end(), [&](const OcclusionEvent& e) {
      return e.camera == camera && e.vehicle == vehicle && frame >= e.first_frame &&
             frame <= e.last_frame;
    });
  };

  std::set<int> ever_visible;
  for (int frame = 0; frame < spec.duration; ++frame) {
    for (const auto& view : views) {
      const CameraPose& cam = *view.cam;
      for (const auto& vehicle : spec.vehicles) {
        if (const auto pose = vehicle_pose(vehicle, frame)) {
          if (const auto box = visible_box(view, *pose, vehicle)) {
            const LatLon gps = from_local(spec.anchor, pose->center.x(), pose->center.y());
            out.ground_truth[cam.id].push_back(
                OutputRow{cam.id, frame, vehicle.id, *box, gps.phi, gps.lambda, false});
            ever_visible.insert(vehicle.id);
          }
        }
      }

      const auto offset_it = noise.camera_offsets.find(cam.id);
      const int offset = offset_it == noise.camera_offsets.end() ? 0 : offset_it->second;
      for (const auto& vehicle : spec.vehicles) {
        const auto pose = vehicle_pose(vehicle, frame + offset);
        if (!pose) continue;
        auto box = visible_box(view, *pose, vehicle);
        if (!box) continue;
        if (occluded(cam.id, frame, vehicle.id)) continue;
        if (noise.miss_probability > 0.0 && unit(rng) < noise.miss_probability) continue;
        if (noise.bbox_jitter_px > 0.0) {
          box->x += noise.bbox_jitter_px * normal(rng);
          box->y += noise.bbox_jitter_px * normal(rng);
          box->w = std::max(1.0, box->w + noise.bbox_jitter_px * normal(rng));
          box->h = std::max(1.0, box->h + noise.bbox_jitter_px * normal(rng));
          *box = round_box(*box);
        }
        Detection det;
        det.camera_id = cam.id;
        det.frame = frame;
        det.bbox = *box;
        det.score = 1.0;
        det.object_class = 0;
        det.feature = make_feature(out.embeddings.at(vehicle.id), cam.id);
        out.detections[cam.id].push_back(std::move(det));
        out.detection_truth[cam.id].push_back(vehicle.id);
      }

      if (noise.false_positive_rate > 0.0) {
        const int count = fp_count(rng);
        for (int n = 0; n < count; ++n) {
          for (int attempt = 0; attempt < 20; ++attempt) {
            const double u = unit(rng) * cam.frame_width;
            const double v = (0.3 + 0.7 * unit(rng)) * cam.frame_height;
            const auto g = pixel_to_ground(cam, view.g2p_inv, u, v);
            if (!g) continue;
            VehicleSpec ghost;
            const VehiclePose pose{*g, unit(rng) * 2.0 * std::numbers::pi};
            const auto box = visible_box(view, pose, ghost);
            if (!box) continue;
            Detection det;
            det.camera_id = cam.id;
            det.frame = frame;
            det.bbox = *box;
            det.score = round_to(0.05 + 0.55 * unit(rng), 1e3);
            det.object_class = 0;
            det.feature = make_feature(noise.embedding_norm * random_direction(rng, noise.feature_dim),
                                       cam.id);
            out.detections[cam.id].push_back(std::move(det));
            out.detection_truth[cam.id].push_back(-1);
            break;
          }
        }
      }
    }
  }
  for (const auto& vehicle : spec.vehicles) {
    if (!ever_visible.contains(vehicle.id)) {
      out.warnings.push_back(fmt::format("vehicle {} is never visible in any camera", vehicle.id));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json vec2_list(const std::vector<Eigen::Vector2d>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back({p.x(), p.y()});
  return arr;
}

std::vector<Eigen::Vector2d> parse_vec2_list(const json& arr) {
  std::vector<Eigen::Vector2d> out;
  for (const auto& p : arr) {
    const auto v = p.get<std::vector<double>>();
    if (v.size() != 2) throw ConfigError("expected [east, north] pairs");
    out.emplace_back(v[0], v[1]);
  }
  return out;
}

}  // namespace

std::string scenario_to_json(const ScenarioSpec& spec, const NoiseSpec& noise) {
  json doc;
  doc["seed"] = spec.seed;
  doc["duration"] = spec.duration;
  doc["fps"] = spec.fps;
  doc["anchor"] = {{"phi", spec.anchor.phi0}, {"lambda", spec.anchor.lambda0}};
  doc["cameras"] = json::array();
  for (const auto& c : spec.cameras) {
    doc["cameras"].push_back({{"id", c.id},
                              {"position", {c.position.x(), c.position.y(), c.position.z()}},
                              {"yaw_deg", c.yaw_deg},
                              {"pitch_deg", c.pitch_deg},
                              {"focal_px", c.focal_px},
                              {"frame_width", c.frame_width},
                              {"frame_height", c.frame_height},
                              {"visibility", vec2_list(c.visibility)}});
  }
  doc["vehicles"] = json::array();
  for (const auto& v : spec.vehicles) {
    doc["vehicles"].push_back({{"id", v.id},
                               {"entry_frame", v.entry_frame},
                               {"waypoints", vec2_list(v.waypoints)},
                               {"speed", v.speed},
                               {"length", v.length},
                               {"width", v.width},
                               {"height", v.height}});
  }
  doc["occlusions"] = json::array();
  for (const auto& e : spec.occlusions) {
    doc["occlusions"].push_back({{"camera", e.camera},
                                 {"first_frame", e.first_frame},
                                 {"last_frame", e.last_frame},
                                 {"vehicle", e.vehicle}});
  }
  json offsets = json::object();
  for (const auto& [cam, off] : noise.camera_offsets) offsets[std::to_string(cam)] = off;
  doc["noise"] = {{"bbox_jitter_px", noise.bbox_jitter_px},
                  {"miss_probability", noise.miss_probability},
                  {"false_positive_rate", noise.false_positive_rate},
                  {"feature_dim", noise.feature_dim},
                  {"embedding_norm", noise.embedding_norm},
                  {"feature_noise_std", noise.feature_noise_std},
                  {"camera_bias_norm", noise.camera_bias_norm},
                  {"camera_offsets", offsets}};
  return doc.dump(2);
}

std::pair<ScenarioSpec, NoiseSpec> parse_scenario(const std::string& json_text) {
  ScenarioSpec spec;
  NoiseSpec noise;
  try {
    const json doc = json::parse(json_text);
    spec.seed = doc.value("seed", std::uint64_t{1});
    spec.duration = doc.at("duration").get<int>();
    spec.fps = doc.value("fps", 10.0);
    if (doc.contains("anchor")) {
      spec.anchor = Anchor{doc["anchor"].at("phi").get<double>(), doc["anchor"].at("lambda").get<double>()};
    }
    for (const auto& c : doc.at("cameras")) {
      CameraPose cam;
      cam.id = c.at("id").get<int>();
      const auto pos = c.at("position").get<std::vector<double>>();
      if (pos.size() != 3) throw ConfigError("camera position must be [east, north, height]");
      cam.position = Eigen::Vector3d(pos[0], pos[1], pos[2]);
      cam.yaw_deg = c.at("yaw_deg").get<double>();
      cam.pitch_deg = c.at("pitch_deg").get<double>();
      cam.focal_px = c.at("focal_px").get<double>();
      cam.frame_width = c.at("frame_width").get<int>();
      cam.frame_height = c.at("frame_height").get<int>();
      if (c.contains("visibility")) cam.visibility = parse_vec2_list(c["visibility"]);
      spec.cameras.push_back(std::move(cam));
    }
    for (const auto& v : doc.at("vehicles")) {
      VehicleSpec veh;
      veh.id = v.at("id").get<int>();
      veh.entry_frame = v.value("entry_frame", 0);
      veh.waypoints = parse_vec2_list(v.at("waypoints"));
      veh.speed = v.at("speed").get<double>();
      veh.length = v.value("length", 4.5);
      veh.width = v.value("width", 1.8);
      veh.height = v.value("height", 1.5);
      spec.vehicles.push_back(std::move(veh));
    }
    if (doc.contains("occlusions")) {
      for (const auto& e : doc["occlusions"]) {
        spec.occlusions.push_back(OcclusionEvent{e.at("camera").get<int>(), e.at("first_frame").get<int>(),
                                                 e.at("last_frame").get<int>(), e.at("vehicle").get<int>()});
      }
    }
    if (doc.contains("noise")) {
      const json& n = doc["noise"];
      noise.bbox_jitter_px = n.value("bbox_jitter_px", 0.0);
      noise.miss_probability = n.value("miss_probability", 0.0);
      noise.false_positive_rate = n.value("false_positive_rate", 0.0);
      noise.feature_dim = n.value("feature_dim", std::size_t{16});
      noise.embedding_norm = n.value("embedding_norm", 10.0);
      noise.feature_noise_std = n.value("feature_noise_std", 0.0);
      noise.camera_bias_norm = n.value("camera_bias_norm", 0.0);
      if (n.contains("camera_offsets")) {
        for (const auto& [key, value] : n["camera_offsets"].items()) {
          noise.camera_offsets[std::stoi(key)] = value.get<int>();
        }
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  spec.validate();
  noise.validate();
  return {spec, noise};
}

std::pair<ScenarioSpec, NoiseSpec> load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

void write_scenario(const Scenario& scenario, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "detections");
  fs::create_directories(dir / "features");
  fs::create_directories(dir / "ground_truth");
  {
    std::ofstream out(dir / "calibration.json");
    out << calibration_to_json(scenario.calibration) << '\n';
  }
  {
    std::ofstream out(dir / "scenario.json");
    out << scenario_to_json(scenario.spec, scenario.noise) << '\n';
  }
  for (const auto& [cam, dets] : scenario.detections) {
    std::ofstream det_out(dir / "detections" / camera_file_name(cam));
    std::ofstream feat_out(dir / "features" / camera_file_name(cam));
    write_detections(det_out, feat_out, dets, scenario.noise.feature_dim);
  }
  for (const auto& [cam, rows] : scenario.ground_truth) {
    std::ofstream out(dir / "ground_truth" / camera_file_name(cam));
    write_track_rows(out, rows);
  }
}

// ---------------------------------------------------------------------------
// Intersection preset

namespace {

struct Route {
  std::vector<Eigen::Vector2d> waypoints;
};

Eigen::Vector2d arm_dir(int arm) {
  const double a = arm * 0.5 * std::numbers::pi;
  return {std::cos(a), std::sin(a)};
}

// Right-hand normal of a travel direction.
Eigen::Vector2d right_of(const Eigen::Vector2d& t) { return {t.y(), -t.x()}; }

std::vector<Eigen::Vector2d> bezier(const Eigen::Vector2d& a, const Eigen::Vector2d& c,
                                    const Eigen::Vector2d& b, int samples) {
  std::vector<Eigen::Vector2d> pts;
  for (int i = 1; i < samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    pts.push_back((1 - t) * (1 - t) * a + 2 * (1 - t) * t * c + t * t * b);
  }
  return pts;
}

// movement: 0 straight, 1 right turn, 2 left turn. lane: 0 inner, 1 outer.
Route make_route(int from_arm, int movement, int lane, double arm_length) {
  constexpr double kLaneOffset[2] = {1.75, 5.25};
  constexpr double kStop = 12.0;
  const Eigen::Vector2d u_in = arm_dir(from_arm);
  const Eigen::Vector2d travel_in = -u_in;
  const double off = kLaneOffset[lane];
  const Eigen::Vector2d start = arm_length * u_in + off * right_of(travel_in);
  Route r;
  r.waypoints.push_back(start);
  if (movement == 0) {
    r.waypoints.push_back(-arm_length * u_in + off * right_of(travel_in));
    return r;
  }
  // Arms are counter-clockwise (E, N, W, S); driving on the right, a right
  // turn exits on the next arm counter-clockwise.
  const int exit_arm = movement == 1 ? (from_arm + 1) % 4 : (from_arm + 3) % 4;
  const Eigen::Vector2d u_out = arm_dir(exit_arm);
  const Eigen::Vector2d travel_out = u_out;
  const Eigen::Vector2d entry = kStop * u_in + off * right_of(travel_in);
  const Eigen::Vector2d exit = kStop * u_out + off * right_of(travel_out);
  // Control point: intersection of the two lane lines.
  const Eigen::Vector2d p_in = off * right_of(travel_in);
  const Eigen::Vector2d p_out = off * right_of(travel_out);
  Eigen::Matrix2d a;
  a.col(0) = travel_in;
  a.col(1) = -travel_out;
  const Eigen::Vector2d st = a.colPivHouseholderQr().solve(p_out - p_in);
  const Eigen::Vector2d control = p_in + st(0) * travel_in;
  r.waypoints.push_back(entry);
  for (const auto& p : bezier(entry, control, exit, 8)) r.waypoints.push_back(p);
  r.waypoints.push_back(exit);
  r.waypoints.push_back(arm_length * u_out + off * right_of(travel_out));
  return r;
}

double min_distance(const VehicleSpec& a, const VehicleSpec& b, int duration) {
  double best = std::numeric_limits<double>::infinity();
  for (int f = std::max(a.entry_frame, b.entry_frame); f < duration; ++f) {
    const auto pa = vehicle_pose(a, f);
    const auto pb = vehicle_pose(b, f);
    if (!pa && !pb) break;
    if (!pa || !pb) continue;
    best = std::min(best, (pa->center - pb->center).norm());
  }
  return best;
}

}  // namespace

ScenarioSpec make_intersection(const IntersectionParams& params) {
  if (params.n_cameras < 2) throw ConfigError("intersection needs at least 2 cameras");
  ScenarioSpec spec;
  spec.seed = params.seed;
  spec.duration = params.duration;
  spec.fps = 10.0;

  const double roi = std::min(40.0, params.arm_length);
  const std::vector<Eigen::Vector2d> region = {{-roi, -roi}, {roi, -roi}, {roi, roi}, {-roi, roi}};
  for (int c = 0; c < params.n_cameras; ++c) {
    const double angle = std::numbers::pi / 4.0 + 2.0 * std::numbers::pi * c / params.n_cameras;
    CameraPose cam;
    cam.id = c;
    cam.position = Eigen::Vector3d(30.0 * std::cos(angle), 30.0 * std::sin(angle), 10.0);
    cam.yaw_deg = (angle + std::numbers::pi) / kDeg;
    cam.pitch_deg = std::atan2(10.0, 30.0) / kDeg;
    cam.focal_px = 800.0;
    cam.frame_width = 1280;
    cam.frame_height = 960;
    cam.visibility = region;
    spec.cameras.push_back(cam);
  }

  auto rng = make_rng(params.seed, 7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int latest_entry = std::max(1, params.duration - static_cast<int>(1.6 * params.arm_length));
  for (int i = 0; i < params.n_vehicles; ++i) {
    VehicleSpec v;
    v.id = i + 1;
    v.speed = params.min_speed + (params.max_speed - params.min_speed) * unit(rng);
    v.length = 4.0 + 1.0 * unit(rng);
    v.width = 1.7 + 0.3 * unit(rng);
    v.height = 1.4 + 0.4 * unit(rng);
    const int slot = static_cast<int>(static_cast<double>(i) * latest_entry / std::max(1, params.n_vehicles));
    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      const int arm = static_cast<int>(unit(rng) * 4) % 4;
      const double m = unit(rng);
      const int movement = m < 0.5 ? 0 : (m < 0.75 ? 1 : 2);
      const int lane = movement == 1 ? 1 : (movement == 2 ? 0 : static_cast<int>(unit(rng) * 2) % 2);
      v.waypoints = make_route(arm, movement, lane, params.arm_length).waypoints;
      v.entry_frame = slot + (attempt / 4) * 3;
      if (v.entry_frame >= params.duration) break;
      placed = std::all_of(spec.vehicles.begin(), spec.vehicles.end(), [&](const VehicleSpec& other) {
        return min_distance(v, other, params.duration) >= params.min_separation;
      });
    }
    if (placed) spec.vehicles.push_back(v);
  }
  return spec;
}

}  // namespace mtmc::sim
