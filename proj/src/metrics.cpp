#include "mtmc/metrics.hpp"

#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "mtmc/assignment.hpp"
#include "mtmc/track_io.hpp"

namespace mtmc {

void TrajectorySet::add(int trajectory_id, int camera, int frame, const BBox& box) {
  auto [it, inserted] = entries[trajectory_id].emplace(std::make_pair(camera, frame), box);
  if (!inserted) {
    throw std::invalid_argument("trajectory " + std::to_string(trajectory_id) +
                                " has two boxes for camera " + std::to_string(camera) +
                                " frame " + std::to_string(frame));
  }
}

std::size_t TrajectorySet::box_count() const {
  std::size_t n = 0;
  for (const auto& [id, traj] : entries) n += traj.size();
  return n;
}

TrajectorySet trajectories_from_rows(std::span<const OutputRow> rows, bool include_synthetic) {
  TrajectorySet set;
  for (const auto& row : rows) {
    if (row.synthetic && !include_synthetic) continue;
    set.add(row.track_id, row.camera, row.frame, row.bbox);
  }
  return set;
}

TrajectorySet load_trajectories(const std::filesystem::path& dir, bool include_synthetic) {
  TrajectorySet set;
  for (const int cam : list_camera_files(dir)) {
    const auto rows = read_track_file(dir / camera_file_name(cam), cam);
    for (const auto& row : rows) {
      if (row.synthetic && !include_synthetic) continue;
      set.add(row.track_id, row.camera, row.frame, row.bbox);
    }
  }
  return set;
}

std::size_t frame_overlap(const Trajectory& gt, const Trajectory& pred, double tau_iou) {
  std::size_t count = 0;
  const Trajectory& small = gt.size() <= pred.size() ? gt : pred;
  const Trajectory& large = gt.size() <= pred.size() ? pred : gt;
  for (const auto& [key, box] : small) {
    const auto it = large.find(key);
    if (it != large.end() && iou(box, it->second) > tau_iou) ++count;
  }
  return count;
}

IdReport finalize_report(long long idtp, long long idfp, long long idfn) {
  IdReport r;
  r.idtp = idtp;
  r.idfp = idfp;
  r.idfn = idfn;
  const auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
  r.idp = ratio(static_cast<double>(idtp), static_cast<double>(idtp + idfp));
  r.idr = ratio(static_cast<double>(idtp), static_cast<double>(idtp + idfn));
  r.idf1 = ratio(2.0 * static_cast<double>(idtp), static_cast<double>(2 * idtp + idfp + idfn));
  return r;
}

IdReport evaluate(const TrajectorySet& gt, const TrajectorySet& pred, double tau_iou) {
  std::vector<const Trajectory*> gts;
  std::vector<const Trajectory*> preds;
  for (const auto& [id, t] : gt.entries) gts.push_back(&t);
  for (const auto& [id, t] : pred.entries) preds.push_back(&t);
  const std::size_t g_count = gts.size();
  const std::size_t p_count = preds.size();
  const long long gt_boxes = static_cast<long long>(gt.box_count());
  const long long pred_boxes = static_cast<long long>(pred.box_count());
  if (g_count == 0 || p_count == 0) return finalize_report(0, pred_boxes, gt_boxes);

  // Overlap counts through a (camera, frame) index of ground-truth boxes.
  std::map<std::pair<int, int>, std::vector<std::pair<std::size_t, BBox>>> index;
  for (std::size_t g = 0; g < g_count; ++g) {
    for (const auto& [key, box] : *gts[g]) index[key].emplace_back(g, box);
  }
  std::vector<std::vector<long long>> overlap(g_count, std::vector<long long>(p_count, 0));
  for (std::size_t p = 0; p < p_count; ++p) {
    for (const auto& [key, box] : *preds[p]) {
      const auto it = index.find(key);
      if (it == index.end()) continue;
      for (const auto& [g, gt_box] : it->second) {
        if (iou(gt_box, box) > tau_iou) ++overlap[g][p];
      }
    }
  }

  // Square (G + P) problem: real pairs, plus a private dummy per trajectory
  // that absorbs it unmatched at the cost of its full length.
  const std::size_t n = g_count + p_count;
  const double forbidden = static_cast<double>(2 * (gt_boxes + pred_boxes) + 1);
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t g = 0; g < g_count; ++g) {
    const double len_g = static_cast<double>(gts[g]->size());
    for (std::size_t p = 0; p < p_count; ++p) {
      const double len_p = static_cast<double>(preds[p]->size());
      cost(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(p)) =
          len_g + len_p - 2.0 * static_cast<double>(overlap[g][p]);
    }
    for (std::size_t d = 0; d < g_count; ++d) {
      cost(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(p_count + d)) =
          d == g ? len_g : forbidden;
    }
  }
  for (std::size_t d = 0; d < p_count; ++d) {
    for (std::size_t p = 0; p < p_count; ++p) {
      cost(static_cast<Eigen::Index>(g_count + d), static_cast<Eigen::Index>(p)) =
          d == p ? static_cast<double>(preds[p]->size()) : forbidden;
    }
  }

  const auto row_to_col = solve_assignment(cost);
  long long idtp = 0;
  for (std::size_t g = 0; g < g_count; ++g) {
    const int col = row_to_col[g];
    if (col >= 0 && static_cast<std::size_t>(col) < p_count) {
      idtp += overlap[g][static_cast<std::size_t>(col)];
    }
  }
  return finalize_report(idtp, pred_boxes - idtp, gt_boxes - idtp);
}

std::string report_to_json(const IdReport& report, double tau_iou) {
  nlohmann::json doc = {{"tau_iou", tau_iou},   {"idtp", report.idtp}, {"idfp", report.idfp},
                        {"idfn", report.idfn},  {"idp", report.idp},   {"idr", report.idr},
                        {"idf1", report.idf1}};
  return doc.dump(2);
}

}  // namespace mtmc
