#include "mtmc/geometry.hpp"

#include <cmath>
#include <numbers>

namespace mtmc {

namespace {

// Row/column equilibration: returns B = diag(r) * m * diag(c) with every row
// and column of B having max-abs entry close to 1. Invertibility and the
// inverse are unaffected by diagonal scaling, so the singularity test runs on
// B, where entries no longer span many orders of magnitude (pixel -> degree
// maps do).
struct Balanced {
  Eigen::Matrix3d b;
  Eigen::Vector3d r;
  Eigen::Vector3d c;
};

Balanced balance(const Eigen::Matrix3d& m) {
  Balanced out{m, Eigen::Vector3d::Ones(), Eigen::Vector3d::Ones()};
  for (int iter = 0; iter < 8; ++iter) {
    for (int i = 0; i < 3; ++i) {
      const double mx = out.b.row(i).cwiseAbs().maxCoeff();
      if (mx > 0.0) {
        out.b.row(i) /= mx;
        out.r(i) /= mx;
      }
    }
    for (int j = 0; j < 3; ++j) {
      const double mx = out.b.col(j).cwiseAbs().maxCoeff();
      if (mx > 0.0) {
        out.b.col(j) /= mx;
        out.c(j) /= mx;
      }
    }
  }
  return out;
}

}  // namespace

Homography::Homography(const Eigen::Matrix3d& m, double tolerance) : m_(m) {
  if (!m_.allFinite()) throw GeometryError("homography has non-finite entries");
  const Balanced bal = balance(m_);
  if (!(std::abs(bal.b.determinant()) > tolerance)) {
    throw GeometryError("homography is singular or ill-conditioned");
  }
  // m = diag(r)^-1 * b * diag(c)^-1  =>  m^-1 = diag(c) * b^-1 * diag(r)
  inv_ = bal.c.asDiagonal() * bal.b.inverse() * bal.r.asDiagonal();
  if (!inv_.allFinite()) throw GeometryError("homography inverse is not finite");
}

Homography Homography::from_row_major(std::span<const double> values, double tolerance) {
  if (values.size() != 9) throw GeometryError("homography needs exactly 9 values");
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m(r, c) = values[static_cast<std::size_t>(3 * r + c)];
  }
  return Homography(m, tolerance);
}

std::array<double, 9> Homography::row_major() const {
  std::array<double, 9> out{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out[static_cast<std::size_t>(3 * r + c)] = m_(r, c);
  }
  return out;
}

Eigen::Vector2d apply_projective(const Eigen::Matrix3d& m, const Eigen::Vector2d& p) {
  const Eigen::Vector3d q = m * Eigen::Vector3d(p.x(), p.y(), 1.0);
  const double scale = std::max({std::abs(q.x()), std::abs(q.y()), std::abs(q.z())});
  if (!q.allFinite() || std::abs(q.z()) <= 1e-12 * scale || q.z() == 0.0) {
    throw GeometryError("projection is degenerate (point maps to infinity)");
  }
  return q.head<2>() / q.z();
}

LatLon project_point_to_gps(const Homography& h, const Pixel& p) {
  const Eigen::Vector2d g = apply_projective(h.matrix(), Eigen::Vector2d(p.x, p.y));
  return LatLon{g.x(), g.y()};
}

LatLon project_to_gps(const Homography& h, const BBox& bbox) {
  return project_point_to_gps(h, Pixel{bbox.base_x(), bbox.base_y()});
}

Pixel back_project(const Homography& h, const LatLon& point) {
  const Eigen::Vector2d px = apply_projective(h.inverse(), Eigen::Vector2d(point.phi, point.lambda));
  return Pixel{px.x(), px.y()};
}

namespace {
double lon_scale(const Anchor& anchor) {
  if (!(std::abs(anchor.phi0) < 90.0)) throw GeometryError("anchor latitude must satisfy |phi0| < 90");
  return kMetersPerDegree * std::cos(anchor.phi0 * std::numbers::pi / 180.0);
}
}  // namespace

LocalPoint to_local(const Anchor& anchor, double phi, double lambda) {
  return LocalPoint{(lambda - anchor.lambda0) * lon_scale(anchor),
                    (phi - anchor.phi0) * kMetersPerDegree};
}

LatLon from_local(const Anchor& anchor, double east, double north) {
  return LatLon{anchor.phi0 + north / kMetersPerDegree, anchor.lambda0 + east / lon_scale(anchor)};
}

GroundPoint make_ground_point(const Anchor& anchor, const LatLon& gps) {
  const LocalPoint local = to_local(anchor, gps.phi, gps.lambda);
  return GroundPoint{gps.phi, gps.lambda, local.east, local.north};
}

GroundPoint make_ground_point_local(const Anchor& anchor, double east, double north) {
  const LatLon gps = from_local(anchor, east, north);
  return GroundPoint{gps.phi, gps.lambda, east, north};
}

double ground_distance(const GroundPoint& a, const GroundPoint& b) {
  return std::hypot(a.east - b.east, a.north - b.north);
}

}  // namespace mtmc
