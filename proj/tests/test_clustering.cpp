#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mtmc/affinity.hpp"
#include "mtmc/clustering.hpp"
#include "mtmc/geometry.hpp"
#include "oracles.hpp"

using namespace mtmc;
using doctest::Approx;

namespace {

constexpr double kInf = ConnectivityMatrix::kForbidden;

ConnectivityMatrix from_rows(const std::vector<std::vector<double>>& rows) {
  Eigen::MatrixXd m(rows.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
  }
  return ConnectivityMatrix(m);
}

oracle::Matrix to_oracle(const ConnectivityMatrix& theta) {
  oracle::Matrix m(theta.size(), std::vector<double>(theta.size()));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    for (std::size_t j = 0; j < theta.size(); ++j) m[i][j] = theta(i, j);
  }
  return m;
}

/// Random frame: `d` detections over `cams` cameras scattered in a square.
struct RandomFrame {
  FrameBatch batch;
  std::vector<GroundPoint> grounds;
};

RandomFrame random_frame(std::mt19937_64& rng, std::size_t d, int cams, double extent, std::size_t k) {
  const Anchor anchor{42.5, -90.7};
  std::uniform_int_distribution<int> cam(0, cams - 1);
  std::uniform_real_distribution<double> pos(0.0, extent), feat(0.0, 1.0);
  RandomFrame f;
  for (std::size_t i = 0; i < d; ++i) {
    Detection det;
    det.camera_id = cam(rng);
    det.bbox = {0, 0, 1, 1};
    det.feature.resize(k);
    for (auto& v : det.feature) v = feat(rng);
    f.batch.detections.push_back(det);
    f.grounds.push_back(make_ground_point_local(anchor, pos(rng), pos(rng)));
  }
  return f;
}

/// Random constrained matrix: random cameras/positions, quantized distances so
/// that ties occur.
ConnectivityMatrix random_theta(std::mt19937_64& rng, std::size_t d) {
  std::uniform_int_distribution<int> level(1, 6);
  auto f = random_frame(rng, d, 4, 12.0, 1);
  ConnectivityMatrix theta = build_connectivity(f.batch, f.grounds, 8.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      if (!theta.forbidden(i, j)) theta.set(i, j, 0.5 * level(rng));
    }
  }
  return theta;
}

bool same_partition(const Partition& p, const oracle::Groups& g) {
  return oracle::sorted_groups(p) == oracle::sorted_groups(g);
}

}  // namespace

TEST_CASE("appearance distance") {
  const std::vector<double> f{1, 0, 0, 0}, g{0, 1, 0, 0};
  CHECK(appearance_distance(f, f) == 0.0);
  CHECK(appearance_distance(f, g) == Approx(std::sqrt(2.0)).epsilon(1e-15));
  const std::vector<double> short_one{1, 0};
  CHECK_THROWS_AS(appearance_distance(f, short_one), std::invalid_argument);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 5.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> a(64), b(64);
    for (auto& v : a) v = n(rng);
    for (auto& v : b) v = n(rng);
    const double want = oracle::l2(a, b);
    CHECK(std::abs(appearance_distance(a, b) - want) <= 1e-12 * want);
  }
}

TEST_CASE("connectivity constraints") {
  const Anchor anchor{0.0, 0.0};
  FrameBatch batch;
  Detection a, b;
  a.camera_id = 0;
  b.camera_id = 0;
  a.feature = {1.0, 2.0};
  b.feature = {1.5, 2.0};
  batch.detections = {a, b};
  std::vector<GroundPoint> grounds{make_ground_point_local(anchor, 0, 0),
                                   make_ground_point_local(anchor, 2, 0)};
  SUBCASE("same camera") { CHECK(build_connectivity(batch, grounds, 8.0).forbidden(0, 1)); }
  batch.detections[1].camera_id = 1;
  SUBCASE("close pair on different cameras") {
    const auto theta = build_connectivity(batch, grounds, 8.0);
    CHECK(theta(0, 1) == oracle::l2(a.feature, b.feature));
    CHECK(theta(1, 0) == theta(0, 1));
    CHECK(theta(0, 0) == 0.0);
  }
  SUBCASE("beyond the radius") {
    grounds[1] = make_ground_point_local(anchor, 9, 0);
    CHECK(build_connectivity(batch, grounds, 8.0).forbidden(0, 1));
  }
  SUBCASE("radius is inclusive") {
    grounds[1] = make_ground_point_local(anchor, 8, 0);
    CHECK_FALSE(build_connectivity(batch, grounds, 8.0).forbidden(0, 1));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(build_connectivity(batch, std::span(grounds).first(1), 8.0), std::invalid_argument);
    CHECK_THROWS_AS(build_connectivity(batch, grounds, 0.0), std::invalid_argument);
  }
}

TEST_CASE("finite entries always satisfy both constraints") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto f = random_frame(rng, 12, 4, 30.0, 3);
    const auto theta = build_connectivity(f.batch, f.grounds, 6.0);
    for (std::size_t i = 0; i < 12; ++i) {
      for (std::size_t j = 0; j < 12; ++j) {
        CHECK(theta(i, j) == theta(j, i));
        if (i == j || theta.forbidden(i, j)) continue;
        CHECK(f.batch.detections[i].camera_id != f.batch.detections[j].camera_id);
        CHECK(ground_distance(f.grounds[i], f.grounds[j]) <= 6.0);
      }
    }
  }
}

TEST_CASE("connectivity is monotone in r and equivariant under relabeling") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = random_frame(rng, 10, 3, 25.0, 4);
    const auto small = build_connectivity(f.batch, f.grounds, 4.0);
    const auto large = build_connectivity(f.batch, f.grounds, 9.0);
    for (std::size_t i = 0; i < 10; ++i) {
      for (std::size_t j = 0; j < 10; ++j) {
        if (!small.forbidden(i, j)) CHECK(large(i, j) == small(i, j));
      }
    }
    std::vector<std::size_t> perm(10);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    FrameBatch shuffled;
    std::vector<GroundPoint> grounds;
    for (std::size_t p : perm) {
      shuffled.detections.push_back(f.batch.detections[p]);
      grounds.push_back(f.grounds[p]);
    }
    const auto permuted = build_connectivity(shuffled, grounds, 9.0);
    for (std::size_t i = 0; i < 10; ++i) {
      for (std::size_t j = 0; j < 10; ++j) CHECK(permuted(i, j) == large(perm[i], perm[j]));
    }
  }
}

TEST_CASE("dendrogram edge cases") {
  CHECK(build_dendrogram(ConnectivityMatrix(1)).merges.empty());
  CHECK(build_dendrogram(ConnectivityMatrix(2)).merges.empty());
  const auto d = build_dendrogram(ConnectivityMatrix(0));
  CHECK(d.leaf_count == 0);
}

TEST_CASE("dendrogram on a hand-built matrix") {
  // 0-1 close, 2-3 close, 1-2 moderate; complete linkage joins {0,1} and {2,3}
  // at the maximum cross distance.
  const auto theta = from_rows({{0, 1, 6, 9}, {1, 0, 4, 7}, {6, 4, 0, 2}, {9, 7, 2, 0}});
  const auto d = build_dendrogram(theta);
  REQUIRE(d.merges.size() == 3);
  CHECK(d.merges[0].left == 0);
  CHECK(d.merges[0].right == 1);
  CHECK(d.merges[0].height == 1.0);
  CHECK(d.merges[0].node == 4);
  CHECK(d.merges[1].left == 2);
  CHECK(d.merges[1].right == 3);
  CHECK(d.merges[1].height == 2.0);
  CHECK(d.merges[2].left == 4);
  CHECK(d.merges[2].right == 5);
  CHECK(d.merges[2].height == 9.0);
  const auto ref = oracle::complete_linkage(to_oracle(theta));
  REQUIRE(ref.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(d.merges[k].left == ref[k].left);
    CHECK(d.merges[k].right == ref[k].right);
    CHECK(d.merges[k].height == ref[k].height);
    CHECK(d.merges[k].node == ref[k].node);
  }
}

TEST_CASE("dendrogram matches the naive complete-linkage oracle") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t d = 1 + trial % 9;
    const auto theta = random_theta(rng, d);
    const auto got = build_dendrogram(theta);
    const auto want = oracle::complete_linkage(to_oracle(theta));
    REQUIRE(got.merges.size() == want.size());
    double previous = 0.0;
    for (std::size_t k = 0; k < want.size(); ++k) {
      CHECK(got.merges[k].left == want[k].left);
      CHECK(got.merges[k].right == want[k].right);
      CHECK(got.merges[k].height == want[k].height);
      CHECK(got.merges[k].node == want[k].node);
      CHECK(std::isfinite(got.merges[k].height));
      CHECK(got.merges[k].height >= previous);
      previous = got.merges[k].height;
    }
  }
}

TEST_CASE("cut enumeration") {
  const auto theta = from_rows({{0, 1, 3}, {1, 0, 2}, {3, 2, 0}});
  const auto cuts = enumerate_cuts(build_dendrogram(theta));
  REQUIRE(cuts.size() == 3);
  CHECK(cuts[0] == Partition{{0}, {1}, {2}});
  CHECK(cuts[1] == Partition{{0, 1}, {2}});
  CHECK(cuts[2] == Partition{{0, 1, 2}});
  CHECK(enumerate_cuts(build_dendrogram(ConnectivityMatrix(3))).size() == 1);
}

TEST_CASE("fixed-height cut joins exactly the groups below the line") {
  // 29 detections; the groups below are joined below height 50 and every
  // other pair sits above it: 29 - 10 + 4 = 23 clusters.
  const std::vector<std::vector<std::size_t>> groups{{18, 25}, {6, 27}, {2, 14, 28, 19}, {13, 29}};
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(29, 29, 80.0);
  for (const auto& g : groups) {
    for (std::size_t a : g) {
      for (std::size_t b : g) m(a - 1, b - 1) = 1.0 + 0.5 * static_cast<double>(a + b);
    }
  }
  const auto cut = cut_at_height(build_dendrogram(ConnectivityMatrix(m)), 50.0);
  CHECK(cut.size() == 23);
  std::vector<std::vector<std::size_t>> joined;
  for (const auto& c : cut) {
    if (c.size() > 1) joined.push_back(c);
  }
  std::vector<std::vector<std::size_t>> want;
  for (auto g : groups) {
    for (auto& d : g) --d;
    want.push_back(g);
  }
  CHECK(oracle::sorted_groups(joined) == oracle::sorted_groups(want));
}

TEST_CASE("Dunn index") {
  // {a,b},{c}: theta(a,b)=1, theta(a,c)=5, theta(b,c)=7
  const auto theta = from_rows({{0, 1, 5}, {1, 0, 7}, {5, 7, 0}});
  const auto score = dunn_index(Partition{{0, 1}, {2}}, theta);
  REQUIRE(score);
  CHECK(*score == 5.0);
  CHECK_FALSE(dunn_index(Partition{{0}, {1}, {2}}, theta));
  SUBCASE("zero diameter") {
    const auto t = from_rows({{0, 0, 4}, {0, 0, 0}, {4, 0, 0}});
    CHECK(*dunn_index(Partition{{0, 1}, {2}}, from_rows({{0, 0, 4}, {0, 0, 3}, {4, 3, 0}})) == kInf);
    CHECK_FALSE(dunn_index(Partition{{0, 1}, {2}}, t));
  }
  SUBCASE("forbidden entries are ignored across clusters") {
    const auto t = from_rows({{0, 1, kInf}, {1, 0, 7}, {kInf, 7, 0}});
    CHECK(*dunn_index(Partition{{0, 1}, {2}}, t) == 7.0);
  }
  SUBCASE("no admissible separation is infinitely separated") {
    const auto t = from_rows({{0, 1, kInf}, {1, 0, kInf}, {kInf, kInf, 0}});
    CHECK(*dunn_index(Partition{{0, 1}, {2}}, t) == kInf);
    CHECK(*dunn_index(Partition{{0, 1, 2}}, from_rows({{0, 1, 2}, {1, 0, 2}, {2, 2, 0}})) == kInf);
  }
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto t = random_theta(rng, 2 + trial % 7);
    for (const auto& p : enumerate_cuts(build_dendrogram(t))) {
      const auto got = dunn_index(p, t);
      const double want = oracle::dunn(p, to_oracle(t));
      if (std::isnan(want)) {
        CHECK_FALSE(got);
      } else {
        REQUIRE(got);
        CHECK(*got == want);
      }
    }
  }
}

TEST_CASE("partition selection") {
  CHECK(select_partition(build_dendrogram(ConnectivityMatrix(1)), ConnectivityMatrix(1)) ==
        Partition{{0}});
  CHECK(select_partition(build_dendrogram(ConnectivityMatrix(2)), ConnectivityMatrix(2)) ==
        Partition{{0}, {1}});
  SUBCASE("two views of one isolated vehicle merge") {
    const auto t = from_rows({{0, 0.3}, {0.3, 0}});
    CHECK(select_partition(build_dendrogram(t), t) == Partition{{0, 1}});
  }
  SUBCASE("identical views merge") {
    const auto t = from_rows({{0, 0}, {0, 0}});
    CHECK(select_partition(build_dendrogram(t), t) == Partition{{0, 1}});
  }
  SUBCASE("identical views equally close to a third stay apart") {
    const auto t = from_rows({{0, 0, 0}, {0, 0, kInf}, {0, kInf, 0}});
    CHECK(select_partition(build_dendrogram(t), t) == Partition{{0}, {1}, {2}});
  }
  SUBCASE("compact pairs win when the full merge is forbidden") {
    const auto t = from_rows({{0, 1, 6, kInf}, {1, 0, 5, 7}, {6, 5, 0, 2}, {kInf, 7, 2, 0}});
    CHECK(select_partition(build_dendrogram(t), t) == Partition{{0, 1}, {2, 3}});
  }
  SUBCASE("a fully admissible frame collapses to one cluster") {
    const auto t = from_rows({{0, 1, 6, 9}, {1, 0, 4, 7}, {6, 4, 0, 2}, {9, 7, 2, 0}});
    CHECK(select_partition(build_dendrogram(t), t) == Partition{{0, 1, 2, 3}});
  }
}

TEST_CASE("selection matches exhaustive cut evaluation") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 300; ++trial) {
    const auto t = random_theta(rng, 1 + trial % 8);
    const auto got = select_partition(build_dendrogram(t), t);
    CHECK(same_partition(got, oracle::best_cut(to_oracle(t))));
  }
}

TEST_CASE("selected clusters honor the constraints and partition the frame") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const auto f = random_frame(rng, 1 + trial % 20, 4, 25.0, 4);
    const auto theta = build_connectivity(f.batch, f.grounds, 8.0);
    const auto p = select_partition(build_dendrogram(theta), theta);
    std::vector<int> seen(f.grounds.size(), 0);
    for (const auto& cluster : p) {
      CHECK(cluster.size() <= 4);
      for (std::size_t a : cluster) {
        ++seen[a];
        for (std::size_t b : cluster) {
          if (a == b) continue;
          CHECK(f.batch.detections[a].camera_id != f.batch.detections[b].camera_id);
          CHECK_FALSE(theta.forbidden(a, b));
        }
      }
    }
    for (int s : seen) CHECK(s == 1);
    // determinism
    CHECK(select_partition(build_dendrogram(theta), theta) == p);
  }
}

TEST_CASE("centroids") {
  const Anchor anchor{42.0, -90.0};
  const auto p = make_ground_point_local(anchor, 3.0, -2.0);
  const std::vector<GroundPoint> one{p};
  const auto c1 = centroid(one, anchor);
  CHECK(c1.east == p.east);
  CHECK(c1.north == p.north);
  const std::vector<GroundPoint> two{make_ground_point_local(anchor, 0, 0),
                                     make_ground_point_local(anchor, 4, 0)};
  const auto mid = centroid(two, anchor);
  CHECK(ground_distance(mid, two[0]) == Approx(2.0).epsilon(1e-12));
  CHECK(ground_distance(mid, two[1]) == Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(centroid(std::vector<GroundPoint>{}, anchor), std::invalid_argument);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<GroundPoint> pts;
    for (int i = 0; i < 3; ++i) pts.push_back(make_ground_point_local(anchor, u(rng), u(rng)));
    const auto c = centroid(pts, anchor);
    CHECK(c.east == Approx((pts[0].east + pts[1].east + pts[2].east) / 3.0).epsilon(1e-12));
    CHECK(c.north == Approx((pts[0].north + pts[1].north + pts[2].north) / 3.0).epsilon(1e-12));
    const auto local = to_local(anchor, c.phi, c.lambda);
    CHECK(std::abs(local.east - c.east) < 1e-9);
  }
}
