#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mtmc/metrics.hpp"
#include "mtmc/pipeline.hpp"
#include "mtmc/simulator.hpp"

namespace mtmc::app {

struct RunConfig {
  std::filesystem::path calibration;
  std::filesystem::path detections_dir;
  std::filesystem::path features_dir;
  std::filesystem::path out_dir;
  PipelineConfig pipeline;
  double score_threshold = 0.0;
  double min_area_fraction = 0.0;
  std::vector<double> tau_iou{0.2, 0.5};
  bool dump_dendrograms = false;
  /// Frames to process from frame 0; unset runs until the inputs are drained.
  std::optional<int> frame_count;

  /// Paths of a simulator output directory.
  static RunConfig for_scenario(const std::filesystem::path& scenario_dir,
                                const std::filesystem::path& out_dir);
  void validate() const;
};

struct TrackSummary {
  int frames_processed = 0;
  int tracks_created = 0;
  double mean_frame_ms = 0.0;
  double p99_frame_ms = 0.0;
};

/// Streams the inputs through the pipeline, writes `tracks/camNNN.csv` and
/// `manifest.json` (plus `dendrograms.jsonl` when requested) under out_dir.
TrackSummary cmd_track(const RunConfig& config);

struct EvaluationResult {
  double tau_iou = 0.0;
  IdReport report;
};

/// One report per threshold. Writes `report_tau<τ>.json` files and
/// `evaluation.csv` under `out_dir` when it is non-empty.
std::vector<EvaluationResult> cmd_evaluate(const std::filesystem::path& gt_dir,
                                           const std::filesystem::path& pred_dir,
                                           const std::vector<double>& taus,
                                           const std::filesystem::path& out_dir,
                                           bool include_synthetic = true);

sim::Scenario cmd_simulate(const std::filesystem::path& spec_path,
                           const std::filesystem::path& out_dir,
                           std::optional<std::uint64_t> seed = std::nullopt);

/// Generates and writes a scenario given in memory.
sim::Scenario simulate_to(const sim::ScenarioSpec& spec, const sim::NoiseSpec& noise,
                          const std::filesystem::path& out_dir);

struct SweepRow {
  double radius = 0.0;
  double gate = 0.0;
  OcclusionMode occlusion = OcclusionMode::kBlind;
  double tau_iou = 0.0;
  IdReport report;
  TrackSummary summary;
};

struct SweepGrid {
  std::vector<double> radii;
  /// Empty: gate follows the radius.
  std::vector<double> gates;
  std::vector<OcclusionMode> occlusion_modes;
};

/// Runs track + evaluate for every grid point against `scenario_dir` and
/// writes `sweep.csv` under `base.out_dir`.
std::vector<SweepRow> cmd_sweep(const std::filesystem::path& scenario_dir, const RunConfig& base,
                                const SweepGrid& grid);

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

}  // namespace mtmc::app
