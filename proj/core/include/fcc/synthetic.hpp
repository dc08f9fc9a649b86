#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "fcc/match_graph.hpp"

namespace fcc {

/// Each true match is, independently with `probability`, swapped for a false
/// match to a free keypoint of the other camera showing a different point.
struct ReplaceCorruption {
  double probability = 0.5;
};

/// Each true match is removed with `remove_probability`; then every pair of
/// still-unmatched keypoints showing different points gets a false match
/// with `add_probability`.
struct RemoveAddCorruption {
  double remove_probability = 0.0;
  double add_probability = 0.0;
};

using Corruption = std::variant<ReplaceCorruption, RemoveAddCorruption>;

struct SyntheticConfig {
  int num_points = 100;
  int num_cameras = 100;
  double pair_prob = 0.5;
  Corruption corruption = ReplaceCorruption{0.5};
  int min_common_points = 5;
  double focal_length = 500.0;
  double image_width = 1000.0;
  double image_height = 1000.0;
  double camera_cov_scale = 10.0;
  std::uint64_t seed = 0;

  /// Throws ConfigInvalidError.
  void validate() const;
};

/// World-to-camera pose; rotation rows are the image x axis, the image y axis
/// and the optical axis.
struct Camera {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();

  /// Optical axis toward the origin, then the image plane rotated
  /// counterclockwise by `roll` about that axis.
  static Camera looking_at_origin(const Eigen::Vector3d& center, double roll);

  Eigen::Vector3d to_camera(const Eigen::Vector3d& world) const { return rotation * (world - center); }
};

/// Pinhole projection with the principal point at the image center. Empty
/// when the point is behind the camera or lands outside the image.
std::optional<Eigen::Vector2d> project(const Camera& camera, const Eigen::Vector3d& point,
                                       const SyntheticConfig& cfg);

struct SceneKeypoint {
  int point_id = 0;
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
};

struct SyntheticScene {
  std::vector<Eigen::Vector3d> points;
  std::vector<Camera> cameras;
  /// Per camera, visible points in increasing point id.
  std::vector<std::vector<SceneKeypoint>> keypoints;
};

struct ProjectedKeypoints {
  ImagePartition partition;
  std::vector<int> truth_point_ids;
  /// Scene camera index of each image.
  std::vector<int> image_camera;
  /// Cameras seeing fewer than two points; they get no image.
  int dropped_cameras = 0;
};

struct LabeledInstance {
  MatchGraph graph;
  /// Aligned with graph.upper_edges(); true when both endpoints show the same point.
  std::vector<bool> good;
  std::vector<int> truth_point_ids;
  std::size_t camera_pairs_retained = 0;

  const ImagePartition& partition() const { return graph.partition(); }
  std::vector<Edge> good_edges() const;
  std::vector<Edge> bad_edges() const;
};

/// Sampling order: points (three normals each), then cameras (three normals
/// for the location, one uniform for the roll). Stream 0 of the seed.
SyntheticScene generate_scene(const SyntheticConfig& cfg);

ProjectedKeypoints project_keypoints(const SyntheticScene& scene, const SyntheticConfig& cfg);

/// Sampling order: one Bernoulli per image pair in lexicographic order, then
/// corruption of the retained pairs in the same order. Stream 1 of the seed.
LabeledInstance generate_matches(const SyntheticScene& scene, const ProjectedKeypoints& keypoints,
                                 const SyntheticConfig& cfg);

LabeledInstance generate_instance(const SyntheticConfig& cfg);

}  // namespace fcc
