#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtmc {

/// Axis-aligned box in pixels; (x, y) is the upper-left corner.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const { return w * h; }
  double base_x() const { return x + 0.5 * w; }
  double base_y() const { return y + h; }

  bool operator==(const BBox&) const = default;
};

bool is_valid(const BBox& box);

/// Intersection over union; 0 when either box is empty.
double iou(const BBox& a, const BBox& b);

/// One box seen by one camera at one frame, with its appearance descriptor.
struct Detection {
  int camera_id = 0;
  int frame = 0;
  BBox bbox;
  double score = 1.0;
  int object_class = -1;
  std::vector<double> feature;

  bool operator==(const Detection&) const = default;
};

/// All detections of one frame, across every camera.
struct FrameBatch {
  int frame = 0;
  std::vector<Detection> detections;
};

/// GPS position in degrees.
struct LatLon {
  double phi = 0.0;
  double lambda = 0.0;
};

/// Pixel coordinate in a camera image.
struct Pixel {
  double x = 0.0;
  double y = 0.0;
};

/// A ground-plane position carried in both GPS degrees and local meters.
struct GroundPoint {
  double phi = 0.0;
  double lambda = 0.0;
  double east = 0.0;
  double north = 0.0;
};

class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrackerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mtmc
