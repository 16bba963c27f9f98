#include "mtmc/kalman.hpp"

#include <stdexcept>

namespace mtmc {

Eigen::Matrix4d transition_matrix() {
  Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
  f(0, 2) = 1.0;
  f(1, 3) = 1.0;
  return f;
}

Eigen::Matrix4d process_covariance(double process_std) {
  Eigen::Matrix<double, 4, 2> g = Eigen::Matrix<double, 4, 2>::Zero();
  g(0, 0) = 0.5;
  g(1, 1) = 0.5;
  g(2, 0) = 1.0;
  g(3, 1) = 1.0;
  return process_std * process_std * g * g.transpose();
}

KalmanState initiate(const Eigen::Vector2d& position, const MotionNoise& noise) {
  KalmanState s;
  s.mean << position.x(), position.y(), 0.0, 0.0;
  const double pos_var = noise.measurement_std * noise.measurement_std;
  const double vel_var = noise.initial_velocity_std * noise.initial_velocity_std;
  s.covariance = Eigen::Vector4d(pos_var, pos_var, vel_var, vel_var).asDiagonal();
  return s;
}

KalmanState predict(const KalmanState& state, const MotionNoise& noise) {
  const Eigen::Matrix4d f = transition_matrix();
  KalmanState out;
  out.mean = f * state.mean;
  const Eigen::Matrix4d p = f * state.covariance * f.transpose() + process_covariance(noise.process_std);
  out.covariance = 0.5 * (p + p.transpose());
  return out;
}

KalmanState update(const KalmanState& state, const Eigen::Vector2d& measurement,
                   const MotionNoise& noise) {
  if (!measurement.allFinite()) throw std::invalid_argument("Kalman update: non-finite measurement");
  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  const Eigen::Matrix2d r =
      Eigen::Matrix2d::Identity() * (noise.measurement_std * noise.measurement_std);

  const Eigen::Matrix2d s = h * state.covariance * h.transpose() + r;
  const Eigen::Matrix<double, 4, 2> k = state.covariance * h.transpose() * s.inverse();
  const Eigen::Vector2d innovation = measurement - h * state.mean;

  KalmanState out;
  out.mean = state.mean + k * innovation;
  const Eigen::Matrix4d i_kh = Eigen::Matrix4d::Identity() - k * h;
  // Joseph form; symmetrized from a temporary since A = (A + A^T) / 2 aliases.
  const Eigen::Matrix4d p = i_kh * state.covariance * i_kh.transpose() + k * r * k.transpose();
  out.covariance = 0.5 * (p + p.transpose());
  return out;
}

}  // namespace mtmc
