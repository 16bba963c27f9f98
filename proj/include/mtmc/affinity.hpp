#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mtmc/types.hpp"

namespace mtmc {

/// L2 distance between two appearance descriptors of equal length.
double appearance_distance(std::span<const double> f, std::span<const double> g);

/// Constrained pairwise dissimilarity of one frame's detections.
///
/// Forbidden pairs (same camera, or farther apart on the ground than the
/// association radius) hold `kForbidden`, which is +infinity and therefore
/// compares greater than every admissible distance.
class ConnectivityMatrix {
 public:
  static constexpr double kForbidden = std::numeric_limits<double>::infinity();

  ConnectivityMatrix() = default;
  explicit ConnectivityMatrix(std::size_t size);
  /// Takes an arbitrary symmetric matrix; the diagonal is forced to zero.
  explicit ConnectivityMatrix(Eigen::MatrixXd entries);

  std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  bool forbidden(std::size_t i, std::size_t j) const { return (*this)(i, j) == kForbidden; }
  void set(std::size_t i, std::size_t j, double value);

  const Eigen::MatrixXd& entries() const { return entries_; }

 private:
  Eigen::MatrixXd entries_;
};

/// Builds Θ for `batch`: appearance distance where cameras differ and the
/// ground distance is within `radius` meters (inclusive), forbidden otherwise.
/// `grounds[i]` is the ground position of `batch.detections[i]`.
ConnectivityMatrix build_connectivity(const FrameBatch& batch, std::span<const GroundPoint> grounds,
                                      double radius);

}  // namespace mtmc
