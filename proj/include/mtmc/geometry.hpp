#pragma once

#include <array>
#include <span>

#include <Eigen/Dense>

#include "mtmc/types.hpp"

namespace mtmc {

/// Meters per degree of latitude under the flat-earth approximation.
inline constexpr double kMetersPerDegree = 111320.0;

/// Pixel -> GPS (latitude, longitude) plane-to-plane mapping.
///
/// The matrix is stored together with its inverse. Construction rejects
/// non-finite and singular matrices: after row/column equilibration (every
/// row and column scaled to unit max-abs entry) the determinant magnitude must
/// exceed `tolerance`. The test is therefore independent of the units on
/// either side of the map.
class Homography {
 public:
  static constexpr double kDefaultTolerance = 1e-12;

  Homography() : Homography(Eigen::Matrix3d::Identity()) {}
  explicit Homography(const Eigen::Matrix3d& m, double tolerance = kDefaultTolerance);

  static Homography from_row_major(std::span<const double> values,
                                   double tolerance = kDefaultTolerance);

  const Eigen::Matrix3d& matrix() const { return m_; }
  const Eigen::Matrix3d& inverse() const { return inv_; }
  std::array<double, 9> row_major() const;

 private:
  Eigen::Matrix3d m_;
  Eigen::Matrix3d inv_;
};

/// Applies a 3x3 projective map and dehomogenizes. Throws GeometryError when
/// the homogeneous scale vanishes (point at infinity).
Eigen::Vector2d apply_projective(const Eigen::Matrix3d& m, const Eigen::Vector2d& p);

/// GPS image of the bottom-center of the box.
LatLon project_to_gps(const Homography& h, const BBox& bbox);
LatLon project_point_to_gps(const Homography& h, const Pixel& p);

/// Pixel image of a GPS point under the inverse homography.
Pixel back_project(const Homography& h, const LatLon& point);

struct Anchor {
  double phi0 = 0.0;
  double lambda0 = 0.0;
};

struct LocalPoint {
  double east = 0.0;
  double north = 0.0;
};

/// Equirectangular projection about the anchor.
LocalPoint to_local(const Anchor& anchor, double phi, double lambda);
LatLon from_local(const Anchor& anchor, double east, double north);

GroundPoint make_ground_point(const Anchor& anchor, const LatLon& gps);
GroundPoint make_ground_point_local(const Anchor& anchor, double east, double north);

/// Euclidean distance in the local metric frame.
double ground_distance(const GroundPoint& a, const GroundPoint& b);

}  // namespace mtmc
