#pragma once

#include <Eigen/Dense>

namespace mtmc {

/// [east, north, v_east, v_north] in meters and meters/frame.
struct KalmanState {
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Identity();
};

struct MotionNoise {
  /// Std of the white acceleration driving the constant-velocity model (m/frame^2).
  double process_std = 1.0;
  /// Std of the position measurement (m).
  double measurement_std = 0.5;
  /// Prior std of the velocity of a freshly spawned track (m/frame).
  double initial_velocity_std = 2.0;
};

/// Discrete white-noise-acceleration covariance for a one-frame step.
Eigen::Matrix4d process_covariance(double process_std);

/// Constant-velocity transition for a one-frame step.
Eigen::Matrix4d transition_matrix();

KalmanState initiate(const Eigen::Vector2d& position, const MotionNoise& noise);

KalmanState predict(const KalmanState& state, const MotionNoise& noise);

/// Position-only correction (Joseph form). Throws std::invalid_argument on a
/// non-finite measurement.
KalmanState update(const KalmanState& state, const Eigen::Vector2d& measurement,
                   const MotionNoise& noise);

}  // namespace mtmc
