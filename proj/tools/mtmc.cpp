// Command-line front end: simulate, track, evaluate, pipeline, sweep.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mtmc/app.hpp"

namespace fs = std::filesystem;
using namespace mtmc;

namespace {

OcclusionMode occlusion_from(const std::string& name) {
  const auto mode = parse_occlusion_mode(name);
  if (!mode) throw ConfigError("unknown occlusion mode: " + name);
  return *mode;
}

struct TrackingFlags {
  double r_meters = 8.0;
  std::optional<double> gate_meters;
  int max_age = 10;
  int min_hits = 2;
  std::string occlusion = "blind";
  double score_threshold = 0.0;
  double min_area_fraction = 0.0;
  std::vector<double> tau_iou{0.2, 0.5};
  bool dump_dendrograms = false;
  std::optional<double> fixed_cut_height;
  std::optional<int> frames;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--r-meters", r_meters, "Association radius r (m)")->capture_default_str();
    cmd.add_option("--gate-meters", gate_meters, "Tracker gate (m); defaults to r");
    cmd.add_option("--max-age", max_age, "Frames a confirmed track may coast")->capture_default_str();
    cmd.add_option("--min-hits", min_hits, "Matches needed to confirm a track")->capture_default_str();
    cmd.add_option("--occlusion", occlusion, "Occlusion handling")
        ->check(CLI::IsMember({"none", "blind", "reprojection"}))
        ->capture_default_str();
    cmd.add_option("--score-threshold", score_threshold)->capture_default_str();
    cmd.add_option("--min-area-fraction", min_area_fraction)->capture_default_str();
    cmd.add_option("--tau-iou", tau_iou, "IoU thresholds for evaluation")->capture_default_str();
    cmd.add_flag("--dump-dendrograms", dump_dendrograms, "Write per-frame dendrograms as JSON lines");
    cmd.add_option("--fixed-cut-height", fixed_cut_height, "Cut dendrograms at this height");
    cmd.add_option("--frames", frames, "Frames to process (default: scenario duration or until drained)");
  }

  app::RunConfig apply(app::RunConfig c) const {
    c.pipeline.radius = r_meters;
    c.pipeline.tracker.gate = gate_meters.value_or(r_meters);
    c.pipeline.tracker.max_age = max_age;
    c.pipeline.tracker.min_hits = min_hits;
    c.pipeline.tracker.occlusion_mode = occlusion_from(occlusion);
    c.pipeline.fixed_cut_height = fixed_cut_height;
    c.score_threshold = score_threshold;
    c.min_area_fraction = min_area_fraction;
    c.tau_iou = tau_iou;
    c.dump_dendrograms = dump_dendrograms;
    if (frames) c.frame_count = frames;
    return c;
  }
};

struct SimulateFlags {
  std::string spec;
  std::string preset;
  std::optional<std::uint64_t> seed;
  int cameras = 4;
  int vehicles = 20;
  int duration = 600;
  double feature_noise_ratio = 0.1;
  double jitter = 0.0;
  double miss = 0.0;
  double fp_rate = 0.0;
  double camera_bias = 0.0;
  int desync = 0;

  void add_to(CLI::App& cmd) {
    auto* spec_opt = cmd.add_option("--spec", spec, "Scenario JSON file");
    auto* preset_opt = cmd.add_option("--preset", preset, "Built-in scenario")
                           ->check(CLI::IsMember({"intersection"}));
    spec_opt->excludes(preset_opt);
    cmd.add_option("--seed", seed, "Random seed override");
    cmd.add_option("--cameras", cameras, "Preset: camera count")->capture_default_str();
    cmd.add_option("--vehicles", vehicles, "Preset: vehicle count")->capture_default_str();
    cmd.add_option("--duration", duration, "Preset: frames")->capture_default_str();
    cmd.add_option("--feature-noise-ratio", feature_noise_ratio,
                   "Preset: view noise std as a fraction of the smallest embedding gap")
        ->capture_default_str();
    cmd.add_option("--bbox-jitter", jitter, "Preset: box jitter std (px)")->capture_default_str();
    cmd.add_option("--miss-probability", miss)->capture_default_str();
    cmd.add_option("--false-positive-rate", fp_rate)->capture_default_str();
    cmd.add_option("--camera-bias", camera_bias, "Preset: per-camera feature bias norm")
        ->capture_default_str();
    cmd.add_option("--desync", desync, "Preset: alternating +/- frame offset per camera")
        ->capture_default_str();
  }

  void run(const fs::path& out) const {
    if (!spec.empty()) {
      app::cmd_simulate(spec, out, seed);
      return;
    }
    if (preset.empty()) throw ConfigError("simulate needs --spec or --preset");
    sim::IntersectionParams params;
    params.seed = seed.value_or(1);
    params.n_cameras = cameras;
    params.n_vehicles = vehicles;
    params.duration = duration;
    const sim::ScenarioSpec scenario = sim::make_intersection(params);
    sim::NoiseSpec noise;
    noise.bbox_jitter_px = jitter;
    noise.miss_probability = miss;
    noise.false_positive_rate = fp_rate;
    noise.camera_bias_norm = camera_bias;
    noise.feature_noise_std =
        feature_noise_ratio * sim::min_embedding_gap(sim::identity_embeddings(scenario, noise));
    for (std::size_t i = 0; i < scenario.cameras.size(); ++i) {
      noise.camera_offsets[scenario.cameras[i].id] = (i % 2 == 0) ? desync : -desync;
    }
    app::simulate_to(scenario, noise, out);
  }
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("mtmc");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("MTMC_LOG")) spdlog::set_level(spdlog::level::from_str(level));
}

std::vector<OcclusionMode> parse_modes(const std::vector<std::string>& names) {
  std::vector<OcclusionMode> modes;
  for (const auto& n : names) modes.push_back(occlusion_from(n));
  return modes;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App cli{"Online multi-camera vehicle tracking"};
  cli.require_subcommand(1);
  std::string out;

  auto* simulate = cli.add_subcommand("simulate", "Generate a synthetic scenario");
  SimulateFlags sim_flags;
  sim_flags.add_to(*simulate);
  simulate->add_option("--out", out, "Output directory")->required();

  auto* track = cli.add_subcommand("track", "Track detections into per-camera track files");
  TrackingFlags track_flags;
  track_flags.add_to(*track);
  std::string scenario_dir, calibration, detections, features;
  track->add_option("--scenario", scenario_dir, "Simulator output directory");
  track->add_option("--calibration", calibration);
  track->add_option("--detections", detections, "Directory of camNNN.csv detection files");
  track->add_option("--features", features, "Directory of camNNN.csv feature files");
  track->add_option("--out", out, "Output directory")->required();

  auto* evaluate = cli.add_subcommand("evaluate", "Score predicted tracks against ground truth");
  std::string gt_dir, pred_dir;
  std::vector<double> taus{0.2, 0.5};
  bool exclude_synthetic = false;
  evaluate->add_option("--gt", gt_dir, "Ground-truth track directory")->required();
  evaluate->add_option("--pred", pred_dir, "Predicted track directory")->required();
  evaluate->add_option("--tau-iou", taus)->capture_default_str();
  evaluate->add_flag("--exclude-synthetic", exclude_synthetic, "Ignore reprojected boxes");
  evaluate->add_option("--out", out, "Output directory")->required();

  auto* pipeline = cli.add_subcommand("pipeline", "simulate, track and evaluate in one go");
  SimulateFlags pipe_sim;
  TrackingFlags pipe_track;
  pipe_sim.add_to(*pipeline);
  pipe_track.add_to(*pipeline);
  pipeline->add_option("--out", out, "Output directory")->required();

  auto* sweep = cli.add_subcommand("sweep", "Track and evaluate over a parameter grid");
  TrackingFlags sweep_track;
  sweep_track.add_to(*sweep);
  std::vector<double> r_list, gate_list;
  std::vector<std::string> occlusion_list;
  sweep->add_option("--scenario", scenario_dir, "Simulator output directory")->required();
  sweep->add_option("--r-list", r_list, "Radii to sweep (m)")->required();
  sweep->add_option("--gate-list", gate_list, "Gates to sweep (m); default follows r");
  sweep->add_option("--occlusion-list", occlusion_list, "Occlusion modes to sweep")
      ->check(CLI::IsMember({"none", "blind", "reprojection"}));
  sweep->add_option("--out", out, "Output directory")->required();

  CLI11_PARSE(cli, argc, argv);

  try {
    const fs::path out_dir = out;
    if (*simulate) {
      sim_flags.run(out_dir);
    } else if (*track) {
      app::RunConfig c;
      if (!scenario_dir.empty()) {
        c = app::RunConfig::for_scenario(scenario_dir, out_dir);
      } else {
        if (calibration.empty() || detections.empty() || features.empty()) {
          throw ConfigError("track needs --scenario or all of --calibration, --detections, --features");
        }
        c.calibration = calibration;
        c.detections_dir = detections;
        c.features_dir = features;
        c.out_dir = out_dir;
      }
      app::cmd_track(track_flags.apply(c));
    } else if (*evaluate) {
      app::cmd_evaluate(gt_dir, pred_dir, taus, out_dir, !exclude_synthetic);
    } else if (*pipeline) {
      pipe_sim.run(out_dir / "scenario");
      const app::RunConfig c =
          pipe_track.apply(app::RunConfig::for_scenario(out_dir / "scenario", out_dir / "run"));
      app::cmd_track(c);
      app::cmd_evaluate(out_dir / "scenario" / "ground_truth", out_dir / "run" / "tracks", c.tau_iou,
                        out_dir / "evaluation");
    } else if (*sweep) {
      const app::RunConfig base =
          sweep_track.apply(app::RunConfig::for_scenario(scenario_dir, out_dir));
      app::cmd_sweep(scenario_dir, base, {r_list, gate_list, parse_modes(occlusion_list)});
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
