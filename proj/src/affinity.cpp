#include "mtmc/affinity.hpp"

#include <cmath>
#include <string>

#include "mtmc/geometry.hpp"

namespace mtmc {

double appearance_distance(std::span<const double> f, std::span<const double> g) {
  if (f.size() != g.size()) {
    throw std::invalid_argument("appearance_distance: dimension mismatch (" +
                                std::to_string(f.size()) + " vs " + std::to_string(g.size()) + ")");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = f[i] - g[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

ConnectivityMatrix::ConnectivityMatrix(std::size_t size)
    : entries_(Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(size),
                                         static_cast<Eigen::Index>(size), kForbidden)) {
  entries_.diagonal().setZero();
}

ConnectivityMatrix::ConnectivityMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) {
    throw std::invalid_argument("connectivity matrix must be square");
  }
  entries_.diagonal().setZero();
}

void ConnectivityMatrix::set(std::size_t i, std::size_t j, double value) {
  const auto a = static_cast<Eigen::Index>(i);
  const auto b = static_cast<Eigen::Index>(j);
  entries_(a, b) = value;
  entries_(b, a) = value;
}

ConnectivityMatrix build_connectivity(const FrameBatch& batch, std::span<const GroundPoint> grounds,
                                      double radius) {
  const auto& dets = batch.detections;
  if (dets.size() != grounds.size()) {
    throw std::invalid_argument("build_connectivity: " + std::to_string(dets.size()) +
                                " detections but " + std::to_string(grounds.size()) +
                                " ground points");
  }
  if (!(radius > 0.0)) throw std::invalid_argument("build_connectivity: radius must be positive");
  ConnectivityMatrix theta(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    for (std::size_t j = i + 1; j < dets.size(); ++j) {
      if (dets[i].camera_id == dets[j].camera_id) continue;
      if (ground_distance(grounds[i], grounds[j]) > radius) continue;
      theta.set(i, j, appearance_distance(dets[i].feature, dets[j].feature));
    }
  }
  return theta;
}

}  // namespace mtmc
