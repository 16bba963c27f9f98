#include "mtmc/app.hpp"

#include <fstream>
#include <memory>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include <json.hpp>

#include "mtmc/csv.hpp"
#include "mtmc/track_io.hpp"

namespace mtmc::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string tau_label(double tau) { return csv::format_double(tau); }

json tracker_json(const TrackerConfig& t) {
  return {{"gate_meters", t.gate},
          {"max_age", t.max_age},
          {"min_hits", t.min_hits},
          {"occlusion", to_string(t.occlusion_mode)},
          {"process_std", t.noise.process_std},
          {"measurement_std", t.noise.measurement_std},
          {"initial_velocity_std", t.noise.initial_velocity_std}};
}

json dendrogram_json(const FrameResult& result) {
  json merges = json::array();
  for (const auto& m : result.dendrogram.merges) {
    merges.push_back({{"left", m.left}, {"right", m.right}, {"height", m.height}, {"node", m.node}});
  }
  return {{"frame", result.frame}, {"leaves", result.dendrogram.leaf_count}, {"merges", merges}};
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw ConfigError(fmt::format("{} not found: {}", what, p.string()));
}

}  // namespace

RunConfig RunConfig::for_scenario(const fs::path& scenario_dir, const fs::path& out_dir) {
  RunConfig c;
  c.calibration = scenario_dir / "calibration.json";
  c.detections_dir = scenario_dir / "detections";
  c.features_dir = scenario_dir / "features";
  c.out_dir = out_dir;
  const fs::path spec = scenario_dir / "scenario.json";
  if (fs::is_regular_file(spec)) c.frame_count = sim::load_scenario(spec).first.duration;
  return c;
}

void RunConfig::validate() const {
  require_file(calibration, "calibration file");
  if (!fs::is_directory(detections_dir)) {
    throw ConfigError("detections directory not found: " + detections_dir.string());
  }
  if (!fs::is_directory(features_dir)) {
    throw ConfigError("features directory not found: " + features_dir.string());
  }
  if (out_dir.empty()) throw ConfigError("output directory is required");
  if (frame_count && *frame_count < 0) throw ConfigError("frame count must be non-negative");
  for (double t : tau_iou) {
    if (!(t >= 0.0 && t < 1.0)) throw ConfigError(fmt::format("tau_iou {} outside [0, 1)", t));
  }
  pipeline.validate();
}

TrackSummary cmd_track(const RunConfig& config) {
  config.validate();
  Calibration calib = load_calibration(config.calibration);

  std::vector<DetectionStream> streams;
  std::vector<int> camera_ids;
  for (const auto& cam : calib.cameras) {
    const fs::path det = config.detections_dir / camera_file_name(cam.id);
    const fs::path feat = config.features_dir / camera_file_name(cam.id);
    require_file(det, "detection file");
    require_file(feat, "feature file");
    IngestConfig ingest;
    ingest.score_threshold = config.score_threshold;
    ingest.min_area_fraction = config.min_area_fraction;
    ingest.frame_width = cam.frame_width;
    ingest.frame_height = cam.frame_height;
    ingest.validate();
    streams.emplace_back(cam.id, std::make_unique<FileLineSource>(det),
                         std::make_unique<FileLineSource>(feat), ingest);
    camera_ids.push_back(cam.id);
  }
  for (int id : list_camera_files(config.detections_dir)) {
    if (!calib.find_camera(id)) spdlog::warn("detections for uncalibrated camera {} ignored", id);
  }

  fs::create_directories(config.out_dir / "tracks");
  TrackFileWriter writer(config.out_dir / "tracks", camera_ids);
  std::ofstream dendro_out;
  if (config.dump_dendrograms) dendro_out.open(config.out_dir / "dendrograms.jsonl");

  spdlog::info("tracking {} cameras, r={} m, occlusion={}", camera_ids.size(), config.pipeline.radius,
               to_string(config.pipeline.tracker.occlusion_mode));
  Pipeline pipeline(calib, config.pipeline);
  const RunStats stats = run_streams(pipeline, streams, config.frame_count, [&](const FrameResult& r) {
    writer.write(r.rows);
    if (dendro_out.is_open()) dendro_out << dendrogram_json(r).dump() << '\n';
    spdlog::debug("frame {}: {} detections, {} clusters, {} rows", r.frame, r.detection_count,
                  r.clusters.clusters.size(), r.rows.size());
  });
  writer.flush();

  TrackSummary summary{stats.frames_processed, stats.tracks_created, stats.mean_ms(), stats.p99_ms()};
  json manifest = {
      {"config",
       {{"calibration", config.calibration.string()},
        {"detections", config.detections_dir.string()},
        {"features", config.features_dir.string()},
        {"r_meters", config.pipeline.radius},
        {"score_threshold", config.score_threshold},
        {"min_area_fraction", config.min_area_fraction},
        {"tracker", tracker_json(config.pipeline.tracker)},
        {"tau_iou", config.tau_iou}}},
      {"frames_processed", summary.frames_processed},
      {"tracks_created", summary.tracks_created},
      {"frame_ms", {{"mean", summary.mean_frame_ms}, {"p99", summary.p99_frame_ms}}}};
  if (config.pipeline.fixed_cut_height) {
    manifest["config"]["fixed_cut_height"] = *config.pipeline.fixed_cut_height;
  }
  std::ofstream(config.out_dir / "manifest.json") << manifest.dump(2) << '\n';
  spdlog::info("{} frames, {} tracks, {:.3f} ms/frame mean, {:.3f} ms p99", summary.frames_processed,
               summary.tracks_created, summary.mean_frame_ms, summary.p99_frame_ms);
  return summary;
}

std::vector<EvaluationResult> cmd_evaluate(const fs::path& gt_dir, const fs::path& pred_dir,
                                           const std::vector<double>& taus, const fs::path& out_dir,
                                           bool include_synthetic) {
  if (!fs::is_directory(gt_dir)) throw ConfigError("ground-truth directory not found: " + gt_dir.string());
  if (!fs::is_directory(pred_dir)) throw ConfigError("prediction directory not found: " + pred_dir.string());
  const auto gt_cams = list_camera_files(gt_dir);
  const auto pred_cams = list_camera_files(pred_dir);
  if (gt_cams != pred_cams) {
    throw ConfigError(fmt::format("camera sets differ: ground truth [{}] vs predictions [{}]",
                                  fmt::join(gt_cams, ","), fmt::join(pred_cams, ",")));
  }
  const TrajectorySet gt = load_trajectories(gt_dir, true);
  const TrajectorySet pred = load_trajectories(pred_dir, include_synthetic);

  std::vector<EvaluationResult> results;
  for (double tau : taus) results.push_back({tau, evaluate(gt, pred, tau)});

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream csv_out(out_dir / "evaluation.csv");
    csv_out << "tau_iou,idtp,idfp,idfn,idp,idr,idf1\n";
    for (const auto& r : results) {
      std::ofstream(out_dir / fmt::format("report_tau{}.json", tau_label(r.tau_iou)))
          << report_to_json(r.report, r.tau_iou) << '\n';
      csv_out << fmt::format("{},{},{},{},{},{},{}\n", tau_label(r.tau_iou), r.report.idtp,
                             r.report.idfp, r.report.idfn, csv::format_double(r.report.idp),
                             csv::format_double(r.report.idr), csv::format_double(r.report.idf1));
    }
  }
  for (const auto& r : results) {
    spdlog::info("tau={}: IDF1={:.4f} IDP={:.4f} IDR={:.4f}", r.tau_iou, r.report.idf1, r.report.idp,
                 r.report.idr);
  }
  return results;
}

sim::Scenario cmd_simulate(const fs::path& spec_path, const fs::path& out_dir,
                           std::optional<std::uint64_t> seed) {
  auto [spec, noise] = sim::load_scenario(spec_path);
  if (seed) spec.seed = *seed;
  return simulate_to(spec, noise, out_dir);
}

sim::Scenario simulate_to(const sim::ScenarioSpec& spec, const sim::NoiseSpec& noise,
                          const fs::path& out_dir) {
  sim::Scenario scenario = sim::generate(spec, noise);
  for (const auto& w : scenario.warnings) spdlog::warn("{}", w);
  sim::write_scenario(scenario, out_dir);
  spdlog::info("scenario written to {}", out_dir.string());
  return scenario;
}

std::vector<SweepRow> cmd_sweep(const fs::path& scenario_dir, const RunConfig& base,
                                const SweepGrid& grid) {
  if (grid.radii.empty()) throw ConfigError("sweep needs at least one radius");
  const std::vector<OcclusionMode> modes =
      grid.occlusion_modes.empty() ? std::vector{base.pipeline.tracker.occlusion_mode}
                                   : grid.occlusion_modes;
  std::vector<SweepRow> rows;
  int run = 0;
  for (double r : grid.radii) {
    const std::vector<double> gates = grid.gates.empty() ? std::vector{r} : grid.gates;
    for (double gate : gates) {
      for (OcclusionMode mode : modes) {
        RunConfig c = base;
        c.pipeline.radius = r;
        c.pipeline.tracker.gate = gate;
        c.pipeline.tracker.occlusion_mode = mode;
        c.out_dir = base.out_dir / "runs" / fmt::format("run{:03d}", run++);
        const TrackSummary summary = cmd_track(c);
        const auto reports =
            cmd_evaluate(scenario_dir / "ground_truth", c.out_dir / "tracks", c.tau_iou, c.out_dir);
        for (const auto& e : reports) rows.push_back({r, gate, mode, e.tau_iou, e.report, summary});
      }
    }
  }
  write_sweep_csv(base.out_dir / "sweep.csv", rows);
  return rows;
}

void write_sweep_csv(const fs::path& path, const std::vector<SweepRow>& rows) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << "r_meters,gate_meters,occlusion,tau_iou,idtp,idfp,idfn,idp,idr,idf1,tracks_created,mean_ms,"
         "p99_ms\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", csv::format_double(r.radius),
                       csv::format_double(r.gate), to_string(r.occlusion), tau_label(r.tau_iou),
                       r.report.idtp, r.report.idfp, r.report.idfn, csv::format_double(r.report.idp),
                       csv::format_double(r.report.idr), csv::format_double(r.report.idf1),
                       r.summary.tracks_created, csv::format_double(r.summary.mean_frame_ms),
                       csv::format_double(r.summary.p99_frame_ms));
  }
}

}  // namespace mtmc::app
