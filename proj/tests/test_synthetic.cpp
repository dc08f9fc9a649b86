#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/LU>

#include "fcc/errors.hpp"
#include "fcc/graph_ops.hpp"
#include "fcc/rng.hpp"
#include "fcc/synthetic.hpp"
#include "support.hpp"

namespace fcc {
namespace {

// Pinhole map written out by hand: rotate into the look-at frame, divide by
// depth, shift to the image center.
std::optional<std::array<double, 2>> reproject(const Camera& cam, const Eigen::Vector3d& p,
                                               const SyntheticConfig& cfg) {
  const double dx = p.x() - cam.center.x();
  const double dy = p.y() - cam.center.y();
  const double dz = p.z() - cam.center.z();
  double c[3];
  for (int r = 0; r < 3; ++r) c[r] = cam.rotation(r, 0) * dx + cam.rotation(r, 1) * dy + cam.rotation(r, 2) * dz;
  if (c[2] <= 0.0) return std::nullopt;
  const double u = cfg.focal_length * c[0] / c[2] + cfg.image_width / 2;
  const double v = cfg.focal_length * c[1] / c[2] + cfg.image_height / 2;
  if (u < 0 || v < 0 || u > cfg.image_width || v > cfg.image_height) return std::nullopt;
  return std::array<double, 2>{u, v};
}

TEST(Rng, ReproducibleAndInRange) {
  Rng a(42, 3);
  Rng b(42, 3);
  Rng c(42, 4);
  bool differs = false;
  for (int k = 0; k < 1000; ++k) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    differs = differs || x != c.uniform();
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
    const std::size_t v = a.below(7);
    EXPECT_EQ(v, b.below(7));
    c.below(7);
    EXPECT_LT(v, 7u);
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, NormalMoments) {
  Rng r(1);
  double s = 0.0, ss = 0.0;
  constexpr int kN = 200000;
  for (int k = 0; k < kN; ++k) {
    const double x = r.normal();
    s += x;
    ss += x * x;
  }
  EXPECT_NEAR(s / kN, 0.0, 0.01);
  EXPECT_NEAR(ss / kN, 1.0, 0.01);
}

TEST(Config, Validation) {
  SyntheticConfig c;
  EXPECT_NO_THROW(c.validate());
  c.num_points = 1;
  EXPECT_THROW(c.validate(), ConfigInvalidError);
  c = {};
  c.pair_prob = 1.5;
  EXPECT_THROW(c.validate(), ConfigInvalidError);
  c = {};
  c.corruption = RemoveAddCorruption{0.1, -0.1};
  EXPECT_THROW(c.validate(), ConfigInvalidError);
  c = {};
  c.corruption = ReplaceCorruption{2.0};
  EXPECT_THROW(c.validate(), ConfigInvalidError);
}

TEST(Scene, PointsOnSphereCamerasOutsideUnitBall) {
  SyntheticConfig c;
  c.seed = 3;
  const SyntheticScene s = generate_scene(c);
  ASSERT_EQ(s.points.size(), 100u);
  ASSERT_EQ(s.cameras.size(), 100u);
  for (const auto& p : s.points) EXPECT_NEAR(p.norm(), 1.0, 1e-12);
  for (const auto& cam : s.cameras) {
    EXPECT_GE(cam.center.norm(), 1.0);
    EXPECT_NEAR((cam.rotation * cam.rotation.transpose() - Eigen::Matrix3d::Identity()).norm(), 0.0, 1e-12);
    EXPECT_NEAR(cam.rotation.determinant(), 1.0, 1e-12);
    // Optical axis points at the origin.
    EXPECT_NEAR((cam.rotation.row(2).transpose() + cam.center.normalized()).norm(), 0.0, 1e-12);
  }
}

TEST(Scene, OnAxisPointHitsImageCenter) {
  const SyntheticConfig c;
  const Camera cam = Camera::looking_at_origin({0.0, 0.0, 2.0}, 0.7);
  const auto px = project(cam, {0.0, 0.0, 1.0}, c);
  ASSERT_TRUE(px.has_value());
  EXPECT_NEAR(px->x(), 500.0, 1e-12);
  EXPECT_NEAR(px->y(), 500.0, 1e-12);
  EXPECT_FALSE(project(cam, {0.0, 0.0, 3.0}, c).has_value());
}

TEST(Scene, RollTurnsTheImagePlane) {
  const SyntheticConfig c;
  const Camera a = Camera::looking_at_origin({0.0, 0.0, 3.0}, 0.0);
  const Camera b = Camera::looking_at_origin({0.0, 0.0, 3.0}, std::numbers::pi / 2);
  const Eigen::Vector3d p(0.2, 0.1, 0.0);
  const auto pa = project(a, p, c);
  const auto pb = project(b, p, c);
  ASSERT_TRUE(pa && pb);
  EXPECT_NEAR((*pa - Eigen::Vector2d(500, 500)).norm(), (*pb - Eigen::Vector2d(500, 500)).norm(), 1e-9);
  EXPECT_NEAR((*pa - Eigen::Vector2d(500, 500)).dot(*pb - Eigen::Vector2d(500, 500)), 0.0, 1e-9);
}

TEST(Scene, CameraCentersHaveZeroMean) {
  // The mean of 10^4 draws of c * (1 + 1/|c|) for c ~ N(0, 10 I). Each
  // coordinate has standard deviation below sqrt(10) + 1.
  double sum[3] = {0, 0, 0};
  constexpr int kSeeds = 10000;
  SyntheticConfig c;
  c.num_points = 2;
  c.num_cameras = 2;
  for (int seed = 0; seed < kSeeds; ++seed) {
    c.seed = static_cast<std::uint64_t>(seed);
    const SyntheticScene s = generate_scene(c);
    for (int k = 0; k < 3; ++k) sum[k] += s.cameras[0].center[k];
  }
  const double sigma = std::sqrt(10.0) + 1.0;
  for (int k = 0; k < 3; ++k) EXPECT_LT(std::abs(sum[k] / kSeeds), 3 * sigma / 100);
}

TEST(Projection, IndependentReprojection) {
  SyntheticConfig c;
  c.seed = 12;
  const SyntheticScene s = generate_scene(c);
  std::size_t visible = 0;
  for (std::size_t cam = 0; cam < s.cameras.size(); ++cam) {
    std::size_t next = 0;
    for (std::size_t p = 0; p < s.points.size(); ++p) {
      const auto want = reproject(s.cameras[cam], s.points[p], c);
      if (!want) continue;
      ASSERT_LT(next, s.keypoints[cam].size());
      const auto& kp = s.keypoints[cam][next++];
      EXPECT_EQ(kp.point_id, static_cast<int>(p));
      EXPECT_NEAR(kp.pixel.x(), (*want)[0], 1e-9);
      EXPECT_NEAR(kp.pixel.y(), (*want)[1], 1e-9);
    }
    EXPECT_EQ(next, s.keypoints[cam].size());
    visible += next;
  }
  EXPECT_GT(visible, 0u);
  const ProjectedKeypoints kp = project_keypoints(s, c);
  EXPECT_EQ(static_cast<std::size_t>(kp.partition.total_keypoints()), kp.truth_point_ids.size());
  EXPECT_EQ(kp.partition.image_count() + kp.dropped_cameras, 100);
}

TEST(Projection, BehindCameraIsInvisible) {
  const SyntheticConfig c;
  const Camera cam = Camera::looking_at_origin({0.0, 0.0, 2.0}, 0.0);
  EXPECT_FALSE(project(cam, {0.0, 0.0, 5.0}, c).has_value());
}

TEST(Projection, DropsCamerasSeeingFewPoints) {
  SyntheticScene s;
  s.points = {{0, 0, 1}, {0, 0, -1}};
  s.cameras = {Camera::looking_at_origin({0, 0, 3}, 0), Camera::looking_at_origin({3, 0, 0}, 0)};
  s.keypoints = {{{0, {500, 500}}}, {{0, {1, 1}}, {1, {2, 2}}}};
  const ProjectedKeypoints kp = project_keypoints(s, SyntheticConfig{});
  EXPECT_EQ(kp.dropped_cameras, 1);
  EXPECT_EQ(kp.partition.image_count(), 1);
  EXPECT_EQ(kp.image_camera, std::vector<int>{1});
}

LabeledInstance instance(Corruption corruption, std::uint64_t seed = 2) {
  SyntheticConfig c;
  c.corruption = corruption;
  c.seed = seed;
  return generate_instance(c);
}

void expect_structure(const LabeledInstance& inst) {
  const auto edges = inst.graph.upper_edges();
  ASSERT_EQ(edges.size(), inst.good.size());
  const auto& part = inst.partition();
  // Good flags follow the truth ids; each image pair is a partial permutation.
  std::map<std::pair<Index, Index>, int> used;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [i, j] = edges[e];
    EXPECT_NE(part.image_of(i), part.image_of(j));
    EXPECT_EQ(inst.good[e], inst.truth_point_ids[i] == inst.truth_point_ids[j]);
    EXPECT_EQ(++used[std::pair(i, part.image_of(j))], 1);
    EXPECT_EQ(++used[std::pair(j, part.image_of(i))], 1);
  }
  // Good components carry one point id each.
  const MatchGraph good = MatchGraph::from_upper_edges(part, inst.good_edges());
  const ComponentLabeling cc = connected_components(good);
  std::map<Index, int> id_of;
  for (Index k = 0; k < part.total_keypoints(); ++k) {
    const auto [it, fresh] = id_of.emplace(cc.labels[k], inst.truth_point_ids[k]);
    EXPECT_EQ(it->second, inst.truth_point_ids[k]);
  }
}

TEST(Matches, NoCorruptionAllGood) {
  for (const Corruption& c : {Corruption{ReplaceCorruption{0.0}}, Corruption{RemoveAddCorruption{0.0, 0.0}}}) {
    const LabeledInstance inst = instance(c);
    EXPECT_GT(inst.good.size(), 0u);
    for (bool g : inst.good) EXPECT_TRUE(g);
    expect_structure(inst);
  }
}

TEST(Matches, RemoveEverythingGivesEmptyGraph) {
  EXPECT_EQ(instance(RemoveAddCorruption{1.0, 0.0}).graph.edge_count(), 0u);
}

TEST(Matches, ReplaceHalfGivesHalfBad) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const LabeledInstance inst = instance(ReplaceCorruption{0.5}, seed);
    std::size_t bad = 0;
    for (bool g : inst.good) bad += !g;
    const double frac = static_cast<double>(bad) / static_cast<double>(inst.good.size());
    EXPECT_GE(frac, 0.45);
    EXPECT_LE(frac, 0.55);
    expect_structure(inst);
  }
}

TEST(Matches, RemoveAddStructure) { expect_structure(instance(RemoveAddCorruption{0.2, 0.01})); }

TEST(Matches, PairFilterHonoursMinimumOverlap) {
  SyntheticConfig c;
  c.num_points = 30;
  c.num_cameras = 20;
  c.seed = 5;
  c.corruption = ReplaceCorruption{0.0};
  const SyntheticScene scene = generate_scene(c);
  const ProjectedKeypoints kp = project_keypoints(scene, c);
  const LabeledInstance inst = generate_matches(scene, kp, c);
  // With no corruption each retained pair contributes exactly its shared points.
  std::map<std::pair<Index, Index>, int> per_pair;
  for (const auto& e : inst.graph.upper_edges()) {
    ++per_pair[{inst.partition().image_of(e.i), inst.partition().image_of(e.j)}];
  }
  EXPECT_EQ(per_pair.size(), inst.camera_pairs_retained);
  for (const auto& [pair, count] : per_pair) EXPECT_GE(count, c.min_common_points);
}

TEST(Matches, SeedDeterminism) {
  const LabeledInstance a = instance(ReplaceCorruption{0.5}, 77);
  const LabeledInstance b = instance(ReplaceCorruption{0.5}, 77);
  EXPECT_EQ(a.graph, b.graph);
  EXPECT_EQ(a.good, b.good);
  EXPECT_EQ(a.truth_point_ids, b.truth_point_ids);
  EXPECT_NE(instance(ReplaceCorruption{0.5}, 78).graph, a.graph);
}

}  // namespace
}  // namespace fcc
