#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "mtmc/assignment.hpp"
#include "mtmc/kalman.hpp"
#include "mtmc/metrics.hpp"
#include "mtmc/pipeline.hpp"
#include "mtmc/simulator.hpp"
#include "mtmc/tracker.hpp"
#include "oracles.hpp"

using namespace mtmc;
using doctest::Approx;

namespace {

// Pixel (x, y) -> (phi, lambda) = (x, y) / 111320 about the equator, so one
// pixel is one meter north (x) or east (y) and the anchor is the origin.
Calibration metric_calibration(int cameras) {
  Calibration calib;
  const double s = 1.0 / kMetersPerDegree;
  Eigen::Matrix3d m;
  m << s, 0, 0, 0, s, 0, 0, 0, 1;
  for (int id = 0; id < cameras; ++id) calib.cameras.push_back({id, Homography(m), 1000, 1000});
  calib.anchor = {0.0, 0.0};
  return calib;
}

struct Frame {
  ClusterSet clusters;
  std::vector<Detection> detections;
};

/// Detections given as (camera, box); `groups` lists cluster members.
Frame make_frame(const Calibration& calib, int frame, const std::vector<std::pair<int, BBox>>& dets,
                 const Partition& groups) {
  Frame f;
  std::vector<GroundPoint> grounds;
  for (const auto& [cam, box] : dets) {
    Detection d;
    d.camera_id = cam;
    d.frame = frame;
    d.bbox = box;
    f.detections.push_back(d);
    grounds.push_back(make_ground_point(calib.anchor, project_to_gps(calib.camera(cam).homography, box)));
  }
  f.clusters = make_cluster_set(frame, groups, grounds, calib.anchor);
  return f;
}

/// One box per camera whose base midpoint sits at ground (north, east) = (gx, gy).
BBox box_at(double gx, double gy, double w = 4.0, double h = 6.0) { return {gx - w / 2, gy - h, w, h}; }

std::vector<OutputRow> step(Tracker& t, const Frame& f) { return t.step(f.clusters, f.detections); }

std::set<int> ids_of(const std::vector<OutputRow>& rows) {
  std::set<int> ids;
  for (const auto& r : rows) ids.insert(r.track_id);
  return ids;
}

oracle::Gaussian to_oracle(const KalmanState& s) {
  oracle::Gaussian g;
  for (int i = 0; i < 4; ++i) {
    g.x[i] = s.mean(i);
    for (int j = 0; j < 4; ++j) g.p[i][j] = s.covariance(i, j);
  }
  return g;
}

KalmanState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  Eigen::Matrix4d a = Eigen::Matrix4d::NullaryExpr([&] { return u(rng) * 0.3; });
  KalmanState s;
  s.mean = Eigen::Vector4d(u(rng), u(rng), u(rng) * 0.2, u(rng) * 0.2);
  s.covariance = a * a.transpose() + 0.1 * Eigen::Matrix4d::Identity();
  return s;
}

}  // namespace

TEST_CASE("constant-velocity prediction") {
  KalmanState s;
  s.mean << 0, 0, 1, 2;
  const auto p = predict(s, {});
  CHECK(p.mean == Eigen::Vector4d(1, 2, 1, 2));
  KalmanState still;
  still.mean << 3, 4, 0, 0;
  const auto q = predict(still, {});
  CHECK(q.mean.head<2>() == Eigen::Vector2d(3, 4));
  CHECK(q.covariance.trace() > still.covariance.trace());
}

TEST_CASE("prediction matches F P F^T + Q") {
  std::mt19937_64 rng(1);
  const MotionNoise noise{0.7, 0.4, 1.0};
  for (int trial = 0; trial < 300; ++trial) {
    const KalmanState s = random_state(rng);
    const auto got = predict(s, noise);
    const auto want = oracle::kf_predict(to_oracle(s), noise.process_std);
    for (int i = 0; i < 4; ++i) {
      CHECK(std::abs(got.mean(i) - want.x[i]) < 1e-12);
      for (int j = 0; j < 4; ++j) CHECK(std::abs(got.covariance(i, j) - want.p[i][j]) < 1e-10);
    }
  }
}

TEST_CASE("measurement update") {
  KalmanState s;
  s.mean << 5, -3, 1, 1;
  SUBCASE("zero innovation keeps the position") {
    const auto u = update(s, Eigen::Vector2d(5, -3), {});
    CHECK(u.mean(0) == Approx(5.0));
    CHECK(u.mean(1) == Approx(-3.0));
  }
  SUBCASE("huge measurement noise keeps the prediction") {
    const auto u = update(s, Eigen::Vector2d(100, 100), MotionNoise{1.0, 1e7, 2.0});
    CHECK(u.mean(0) == Approx(5.0).epsilon(1e-6));
    CHECK(u.mean(1) == Approx(-3.0).epsilon(1e-6));
  }
  SUBCASE("estimate lies between prediction and measurement") {
    s.covariance = Eigen::Vector4d(2, 3, 1, 1).asDiagonal();
    const auto u = update(s, Eigen::Vector2d(9, -7), {});
    CHECK(u.mean(0) > 5.0);
    CHECK(u.mean(0) < 9.0);
    CHECK(u.mean(1) < -3.0);
    CHECK(u.mean(1) > -7.0);
  }
  CHECK_THROWS_AS(update(s, Eigen::Vector2d(std::nan(""), 0), {}), std::invalid_argument);
  CHECK_THROWS_AS(update(s, Eigen::Vector2d(INFINITY, 0), {}), std::invalid_argument);
}

TEST_CASE("update matches the textbook oracle and shrinks the covariance") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> z(-20.0, 20.0);
  const MotionNoise noise{1.0, 0.5, 2.0};
  for (int trial = 0; trial < 300; ++trial) {
    const KalmanState s = random_state(rng);
    const Eigen::Vector2d m(z(rng), z(rng));
    const auto got = update(s, m, noise);
    const auto want = oracle::kf_update(to_oracle(s), m.x(), m.y(), noise.measurement_std);
    for (int i = 0; i < 4; ++i) {
      CHECK(std::abs(got.mean(i) - want.x[i]) < 1e-9);
      for (int j = 0; j < 4; ++j) CHECK(std::abs(got.covariance(i, j) - want.p[i][j]) < 1e-8);
    }
    CHECK(got.covariance.trace() <= s.covariance.trace() + 1e-12);
  }
}

TEST_CASE("covariance stays symmetric positive-definite") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> z(-50.0, 50.0);
  std::bernoulli_distribution observe(0.7);
  for (int seq = 0; seq < 50; ++seq) {
    KalmanState s = initiate(Eigen::Vector2d(z(rng), z(rng)), {});
    for (int k = 0; k < 100; ++k) {
      s = predict(s, {});
      if (observe(rng)) s = update(s, Eigen::Vector2d(z(rng), z(rng)), {});
      CHECK(s.covariance == s.covariance.transpose());
      CHECK(oracle::positive_definite(s.covariance, 4));
    }
  }
}

TEST_CASE("assignment matches exhaustive enumeration") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> dim(0, 6), cost(0, 20);
  for (int trial = 0; trial < 500; ++trial) {
    const int r = dim(rng), c = dim(rng);
    Eigen::MatrixXd m(r, c);
    oracle::Matrix om(r, std::vector<double>(c));
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < c; ++j) om[i][j] = m(i, j) = cost(rng);
    }
    const auto sol = solve_assignment(m);
    REQUIRE(sol.size() == static_cast<std::size_t>(r));
    std::set<int> cols;
    int assigned = 0;
    for (int col : sol) {
      if (col < 0) continue;
      ++assigned;
      CHECK(cols.insert(col).second);
    }
    CHECK(assigned == std::min(r, c));
    CHECK(assignment_cost(m, sol) == oracle::min_assignment_cost(om));
  }
  Eigen::MatrixXd bad(1, 1);
  bad(0, 0) = INFINITY;
  CHECK_THROWS(solve_assignment(bad));
}

TEST_CASE("association examples") {
  const Anchor anchor{0, 0};
  std::vector<Cluster> clusters{{{0}, make_ground_point_local(anchor, 1, 0)},
                                {{1}, make_ground_point_local(anchor, 3, 0)}};
  SUBCASE("no tracks") {
    const auto r = associate({}, clusters, 8.0);
    CHECK(r.matches.empty());
    CHECK(r.unmatched_clusters == std::vector<std::size_t>{0, 1});
  }
  SUBCASE("nearest cluster") {
    const std::vector<GroundPoint> tracks{make_ground_point_local(anchor, 0, 0)};
    const auto r = associate(tracks, clusters, 8.0);
    REQUIRE(r.matches.size() == 1);
    CHECK(r.matches[0] == std::pair<std::size_t, std::size_t>{0, 0});
    CHECK(r.unmatched_clusters == std::vector<std::size_t>{1});
  }
  SUBCASE("gate demotes distant pairs") {
    const std::vector<GroundPoint> tracks{make_ground_point_local(anchor, -10, 0)};
    const auto r = associate(tracks, clusters, 8.0);
    CHECK(r.matches.empty());
    CHECK(r.unmatched_tracks == std::vector<std::size_t>{0});
    CHECK(r.unmatched_clusters.size() == 2);
  }
}

TEST_CASE("association is a gated partial matching") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 40.0);
  const Anchor anchor{0, 0};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<GroundPoint> tracks;
    std::vector<Cluster> clusters;
    for (int i = 0; i < trial % 7; ++i) tracks.push_back(make_ground_point_local(anchor, u(rng), u(rng)));
    for (int i = 0; i < trial % 5; ++i) clusters.push_back({{}, make_ground_point_local(anchor, u(rng), u(rng))});
    const auto r = associate(tracks, clusters, 6.0);
    std::set<std::size_t> ts, cs;
    for (const auto& [t, c] : r.matches) {
      CHECK(ts.insert(t).second);
      CHECK(cs.insert(c).second);
      CHECK(ground_distance(tracks[t], clusters[c].centroid) <= 6.0);
    }
    CHECK(r.matches.size() + r.unmatched_tracks.size() == tracks.size());
    CHECK(r.matches.size() + r.unmatched_clusters.size() == clusters.size());
  }
}

TEST_CASE("stationary cluster keeps one id") {
  const auto calib = metric_calibration(2);
  TrackerConfig cfg;
  cfg.min_hits = 1;
  Tracker tracker(cfg, calib);
  std::set<int> ids;
  for (int f = 0; f < 20; ++f) {
    const auto rows = step(tracker, make_frame(calib, f, {{0, box_at(10, 10)}, {1, box_at(10.5, 10)}}, {{0, 1}}));
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
      ids.insert(r.track_id);
      CHECK_FALSE(r.synthetic);
      CHECK(r.frame == f);
    }
  }
  CHECK(ids == std::set<int>{1});
  CHECK(tracker.tracks_created() == 1);
}

TEST_CASE("confirmation after min_hits") {
  const auto calib = metric_calibration(1);
  Tracker tracker(TrackerConfig{}, calib);  // min_hits = 2
  CHECK(step(tracker, make_frame(calib, 0, {{0, box_at(5, 5)}}, {{0}})).empty());
  const auto rows = step(tracker, make_frame(calib, 1, {{0, box_at(5, 5)}}, {{0}}));
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].track_id == 1);
  SUBCASE("a tentative track that misses a frame is dropped") {
    Tracker t2(TrackerConfig{}, calib);
    step(t2, make_frame(calib, 0, {{0, box_at(5, 5)}}, {{0}}));
    step(t2, make_frame(calib, 1, {}, {}));
    CHECK(t2.tracks().empty());
  }
}

TEST_CASE("blind handling bridges a gap of max_age frames") {
  const auto calib = metric_calibration(1);
  TrackerConfig cfg;
  cfg.min_hits = 1;
  cfg.max_age = 4;
  Tracker tracker(cfg, calib);
  std::set<int> ids;
  int f = 0;
  for (; f < 5; ++f) {
    for (const auto& r : step(tracker, make_frame(calib, f, {{0, box_at(10.0 + f, 10)}}, {{0}}))) {
      ids.insert(r.track_id);
    }
  }
  for (int k = 0; k < cfg.max_age; ++k, ++f) CHECK(step(tracker, make_frame(calib, f, {}, {})).empty());
  for (const auto& r : step(tracker, make_frame(calib, f, {{0, box_at(10.0 + f, 10)}}, {{0}}))) {
    ids.insert(r.track_id);
  }
  CHECK(ids == std::set<int>{1});
}

TEST_CASE("a longer gap terminates the track and ids are not reused") {
  const auto calib = metric_calibration(1);
  TrackerConfig cfg;
  cfg.min_hits = 1;
  cfg.max_age = 2;
  Tracker tracker(cfg, calib);
  step(tracker, make_frame(calib, 0, {{0, box_at(10, 10)}}, {{0}}));
  for (int f = 1; f <= 3; ++f) step(tracker, make_frame(calib, f, {}, {}));
  CHECK(tracker.tracks().empty());
  const auto rows = step(tracker, make_frame(calib, 4, {{0, box_at(10, 10)}}, {{0}}));
  CHECK(ids_of(rows) == std::set<int>{2});
}

TEST_CASE("without occlusion handling a one-frame gap splits ids") {
  const auto calib = metric_calibration(1);
  TrackerConfig cfg;
  cfg.min_hits = 1;
  cfg.max_age = 0;
  cfg.occlusion_mode = OcclusionMode::kNone;
  Tracker tracker(cfg, calib);
  const auto a = step(tracker, make_frame(calib, 0, {{0, box_at(10, 10)}}, {{0}}));
  step(tracker, make_frame(calib, 1, {}, {}));
  const auto b = step(tracker, make_frame(calib, 2, {{0, box_at(10, 10)}}, {{0}}));
  CHECK(ids_of(a) != ids_of(b));
  SUBCASE("none mode ignores max_age") {
    cfg.max_age = 10;
    Tracker t2(cfg, calib);
    step(t2, make_frame(calib, 0, {{0, box_at(10, 10)}}, {{0}}));
    step(t2, make_frame(calib, 1, {}, {}));
    CHECK(t2.tracks().empty());
  }
}

TEST_CASE("frames must increase") {
  const auto calib = metric_calibration(1);
  Tracker tracker(TrackerConfig{}, calib);
  step(tracker, make_frame(calib, 3, {}, {}));
  CHECK_THROWS_AS(step(tracker, make_frame(calib, 3, {}, {})), TrackerError);
  CHECK_THROWS_AS(step(tracker, make_frame(calib, 1, {}, {})), TrackerError);
  CHECK(tracker.last_frame() == 3);
}

TEST_CASE("two crossing vehicles keep their ids") {
  const auto calib = metric_calibration(2);
  TrackerConfig cfg;
  cfg.min_hits = 1;
  cfg.gate = 3.0;
  Tracker tracker(cfg, calib);
  std::map<int, std::set<int>> ids_by_vehicle;
  for (int f = 0; f < 40; ++f) {
    // A moves north, B moves west; their paths cross at (20, 20), which B reaches four frames after A
    const double ax = f, ay = 20.0, bx = 20.0, by = 44.0 - f;
    const auto rows = step(tracker, make_frame(calib, f,
                                               {{0, box_at(ax, ay)}, {1, box_at(ax, ay)},
                                                {0, box_at(bx, by)}, {1, box_at(bx, by)}},
                                               {{0, 1}, {2, 3}}));
    for (const auto& r : rows) {
      const double bx_row = r.bbox.x + r.bbox.w / 2;
      ids_by_vehicle[std::abs(bx_row - ax) < 1e-6 && r.bbox.y + r.bbox.h == ay ? 0 : 1].insert(r.track_id);
    }
  }
  CHECK(ids_by_vehicle[0].size() == 1);
  CHECK(ids_by_vehicle[1].size() == 1);
  CHECK(ids_by_vehicle[0] != ids_by_vehicle[1]);
}

TEST_CASE("reprojection of a lost camera") {
  SUBCASE("identity homography inverts the projection example") {
    Calibration calib;
    calib.cameras.push_back({0, Homography(), 100, 100});
    calib.anchor = {12.0, 26.0};
    Track track;
    track.id = 7;
    track.last_boxes[0] = CachedBox{{0, 0, 4, 6}, 5};
    const auto rows = reproject_lost_cameras(track, make_ground_point(calib.anchor, {12, 26}), {}, calib, 6, 10);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].bbox.x == Approx(10.0));
    CHECK(rows[0].bbox.y == Approx(20.0));
    CHECK(rows[0].bbox.w == 4.0);
    CHECK(rows[0].bbox.h == 6.0);
    CHECK(rows[0].synthetic);
    CHECK(rows[0].track_id == 7);
    SUBCASE("stale caches and present cameras are skipped") {
      CHECK(reproject_lost_cameras(track, make_ground_point(calib.anchor, {12, 26}), {}, calib, 16, 10).empty());
      CHECK(reproject_lost_cameras(track, make_ground_point(calib.anchor, {12, 26}), {0}, calib, 6, 10).empty());
    }
    SUBCASE("targets outside the image are skipped") {
      CHECK(reproject_lost_cameras(track, make_ground_point(calib.anchor, {500, 26}), {}, calib, 6, 10).empty());
    }
  }

  SUBCASE("track seen by two cameras, then one") {
    const auto calib = metric_calibration(2);
    TrackerConfig cfg;
    cfg.min_hits = 1;
    cfg.occlusion_mode = OcclusionMode::kReprojection;
    Tracker tracker(cfg, calib);
    for (int f = 0; f < 5; ++f) {
      const auto rows = step(tracker, make_frame(calib, f, {{0, box_at(100, 100)}, {1, box_at(100, 100, 8, 12)}},
                                                 {{0, 1}}));
      CHECK(rows.size() == 2);
    }
    const auto rows = step(tracker, make_frame(calib, 5, {{0, box_at(100, 100)}}, {{0}}));
    REQUIRE(rows.size() == 2);
    const auto synth = std::find_if(rows.begin(), rows.end(), [](const OutputRow& r) { return r.synthetic; });
    REQUIRE(synth != rows.end());
    CHECK(synth->camera == 1);
    CHECK(synth->bbox.w == 8.0);
    CHECK(synth->bbox.h == 12.0);
    CHECK(iou(synth->bbox, box_at(100, 100, 8, 12)) > 0.9);
    CHECK(synth->track_id == rows[0].track_id);
  }

  SUBCASE("coasting tracks emit reprojected boxes only in reprojection mode") {
    const auto calib = metric_calibration(1);
    for (auto mode : {OcclusionMode::kBlind, OcclusionMode::kReprojection}) {
      TrackerConfig cfg;
      cfg.min_hits = 1;
      cfg.occlusion_mode = mode;
      Tracker tracker(cfg, calib);
      for (int f = 0; f < 5; ++f) step(tracker, make_frame(calib, f, {{0, box_at(100.0 + f, 100)}}, {{0}}));
      const auto rows = step(tracker, make_frame(calib, 5, {}, {}));
      if (mode == OcclusionMode::kBlind) {
        CHECK(rows.empty());
      } else {
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].synthetic);
        // constant velocity: the predicted box continues the motion
        CHECK(iou(rows[0].bbox, box_at(105, 100)) > 0.5);
      }
    }
  }
}

TEST_CASE("tracker configuration") {
  TrackerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.gate = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.min_hits = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.max_age = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK(parse_occlusion_mode("reprojection") == OcclusionMode::kReprojection);
  CHECK_FALSE(parse_occlusion_mode("sometimes"));
  CHECK(to_string(OcclusionMode::kBlind) == "blind");
}

TEST_CASE("simulated crossing vehicles are tracked without identity errors") {
  sim::IntersectionParams params;
  params.n_vehicles = 0;
  auto spec = sim::make_intersection(params);
  spec.duration = 120;
  sim::VehicleSpec east, north;
  east.id = 1;
  east.waypoints = {{-40.0, -1.75}, {40.0, -1.75}};
  north.id = 2;
  north.entry_frame = 10;
  north.waypoints = {{1.75, -40.0}, {1.75, 40.0}};
  spec.vehicles = {east, north};
  sim::NoiseSpec noise;
  noise.feature_noise_std = 0.05 * sim::min_embedding_gap(sim::identity_embeddings(spec, noise));
  const auto scenario = sim::generate(spec, noise);

  std::vector<OutputRow> truth;
  for (const auto& [cam, rows] : scenario.ground_truth) truth.insert(truth.end(), rows.begin(), rows.end());
  PipelineConfig cfg;
  cfg.tracker.min_hits = 1;
  const auto rows = track_detections(scenario.calibration, scenario.detections, cfg, spec.duration);
  const auto report = evaluate(trajectories_from_rows(truth), trajectories_from_rows(rows), 0.5);
  CHECK(report.idf1 == 1.0);
}
