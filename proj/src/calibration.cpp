#include "mtmc/calibration.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace mtmc {

using nlohmann::json;

const CameraCalibration* Calibration::find_camera(int id) const {
  for (const auto& cam : cameras) {
    if (cam.id == id) return &cam;
  }
  return nullptr;
}

const CameraCalibration& Calibration::camera(int id) const {
  const auto* cam = find_camera(id);
  if (!cam) throw ConfigError("no calibration for camera " + std::to_string(id));
  return *cam;
}

Anchor default_anchor(const std::vector<CameraCalibration>& cameras) {
  double phi = 0.0;
  double lambda = 0.0;
  int n = 0;
  for (const auto& cam : cameras) {
    try {
      const LatLon g = project_point_to_gps(
          cam.homography, Pixel{0.5 * cam.frame_width, 0.5 * cam.frame_height});
      phi += g.phi;
      lambda += g.lambda;
      ++n;
    } catch (const GeometryError&) {
    }
  }
  if (n == 0) throw GeometryError("no camera principal point projects to the ground plane");
  return Anchor{phi / n, lambda / n};
}

Calibration parse_calibration(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("calibration: invalid JSON: ") + e.what());
  }
  Calibration calib;
  try {
    std::set<int> seen;
    for (const auto& cam : doc.at("cameras")) {
      CameraCalibration c;
      c.id = cam.at("id").get<int>();
      const auto values = cam.at("homography").get<std::vector<double>>();
      c.homography = Homography::from_row_major(values);
      c.frame_width = cam.at("frame_width").get<int>();
      c.frame_height = cam.at("frame_height").get<int>();
      if (c.id < 0) throw ConfigError("calibration: camera ids must be non-negative");
      if (c.frame_width <= 0 || c.frame_height <= 0) {
        throw ConfigError("calibration: camera " + std::to_string(c.id) +
                          " has non-positive frame size");
      }
      if (!seen.insert(c.id).second) {
        throw ConfigError("calibration: duplicate camera id " + std::to_string(c.id));
      }
      calib.cameras.push_back(std::move(c));
    }
    std::sort(calib.cameras.begin(), calib.cameras.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    if (calib.cameras.empty()) throw ConfigError("calibration: no cameras");
    if (doc.contains("anchor") && !doc.at("anchor").is_null()) {
      calib.anchor = Anchor{doc["anchor"].at("phi").get<double>(),
                            doc["anchor"].at("lambda").get<double>()};
      if (!(std::abs(calib.anchor.phi0) < 90.0)) {
        throw ConfigError("calibration: anchor latitude must satisfy |phi| < 90");
      }
    } else {
      calib.anchor = default_anchor(calib.cameras);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("calibration: ") + e.what());
  } catch (const GeometryError& e) {
    throw ConfigError(std::string("calibration: ") + e.what());
  }
  return calib;
}

Calibration load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open calibration file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_calibration(ss.str());
}

std::string calibration_to_json(const Calibration& calib, bool include_anchor) {
  json doc;
  doc["cameras"] = json::array();
  for (const auto& cam : calib.cameras) {
    const auto m = cam.homography.row_major();
    doc["cameras"].push_back({{"id", cam.id},
                              {"homography", std::vector<double>(m.begin(), m.end())},
                              {"frame_width", cam.frame_width},
                              {"frame_height", cam.frame_height}});
  }
  if (include_anchor) {
    doc["anchor"] = {{"phi", calib.anchor.phi0}, {"lambda", calib.anchor.lambda0}};
  }
  return doc.dump(2);
}

}  // namespace mtmc
