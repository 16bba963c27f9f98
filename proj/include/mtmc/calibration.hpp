#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mtmc/geometry.hpp"

namespace mtmc {

struct CameraCalibration {
  int id = 0;
  Homography homography;
  int frame_width = 0;
  int frame_height = 0;
};

/// Per-camera pixel -> GPS homographies plus the local-frame anchor.
struct Calibration {
  std::vector<CameraCalibration> cameras;
  Anchor anchor;

  const CameraCalibration& camera(int id) const;
  const CameraCalibration* find_camera(int id) const;
};

/// Centroid of the GPS images of every camera's principal point (frame
/// center). Cameras whose center maps to infinity are skipped.
Anchor default_anchor(const std::vector<CameraCalibration>& cameras);

/// Parses the calibration JSON document. When "anchor" is absent the
/// default anchor is used.
Calibration parse_calibration(const std::string& json_text);
Calibration load_calibration(const std::filesystem::path& path);

std::string calibration_to_json(const Calibration& calib, bool include_anchor = true);

}  // namespace mtmc
