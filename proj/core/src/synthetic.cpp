#include "fcc/synthetic.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fcc/errors.hpp"
#include "fcc/rng.hpp"

namespace fcc {
namespace {

constexpr std::uint64_t kSceneStream = 0;
constexpr std::uint64_t kMatchStream = 1;

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

Eigen::Vector3d gaussian3(Rng& rng) {
  const double x = rng.normal();
  const double y = rng.normal();
  const double z = rng.normal();
  return {x, y, z};
}

struct LocalMatch {
  Index k;
  Index l;
};

// Matches picked for replacement release their targets first; each picked
// match then draws a new target uniformly from the free keypoints of the other
// camera that show a different point. A pick with no candidate stays true.
void corrupt_replace(const ReplaceCorruption& c, std::span<const int> ids_a, std::span<const int> ids_b,
                     std::vector<LocalMatch>& matches, Rng& rng) {
  std::vector<bool> picked(matches.size());
  for (std::size_t e = 0; e < matches.size(); ++e) picked[e] = rng.bernoulli(c.probability);

  std::vector<bool> taken(ids_b.size(), false);
  for (std::size_t e = 0; e < matches.size(); ++e) {
    if (!picked[e]) taken[static_cast<std::size_t>(matches[e].l)] = true;
  }
  std::vector<Index> candidates;
  for (std::size_t e = 0; e < matches.size(); ++e) {
    if (!picked[e]) continue;
    auto& m = matches[e];
    candidates.clear();
    const int id = ids_a[static_cast<std::size_t>(m.k)];
    for (std::size_t l = 0; l < ids_b.size(); ++l) {
      if (!taken[l] && ids_b[l] != id) candidates.push_back(static_cast<Index>(l));
    }
    if (!candidates.empty()) m.l = candidates[rng.below(candidates.size())];
    taken[static_cast<std::size_t>(m.l)] = true;
  }
}

void corrupt_remove_add(const RemoveAddCorruption& c, std::span<const int> ids_a,
                        std::span<const int> ids_b, std::vector<LocalMatch>& matches, Rng& rng) {
  std::vector<LocalMatch> kept;
  for (const auto& m : matches) {
    if (!rng.bernoulli(c.remove_probability)) kept.push_back(m);
  }
  std::vector<bool> used_a(ids_a.size(), false);
  std::vector<bool> used_b(ids_b.size(), false);
  for (const auto& m : kept) {
    used_a[static_cast<std::size_t>(m.k)] = true;
    used_b[static_cast<std::size_t>(m.l)] = true;
  }
  if (c.add_probability > 0.0) {
    for (std::size_t k = 0; k < ids_a.size(); ++k) {
      for (std::size_t l = 0; l < ids_b.size() && !used_a[k]; ++l) {
        if (used_b[l] || ids_a[k] == ids_b[l]) continue;
        if (rng.bernoulli(c.add_probability)) {
          kept.push_back({static_cast<Index>(k), static_cast<Index>(l)});
          used_a[k] = true;
          used_b[l] = true;
        }
      }
    }
  }
  matches = std::move(kept);
}

}  // namespace

void SyntheticConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigInvalidError(msg); };
  if (num_points < 2) fail("need at least 2 scene points");
  if (num_cameras < 2) fail("need at least 2 cameras");
  if (!is_probability(pair_prob)) fail("pair probability must lie in [0,1]");
  if (const auto* r = std::get_if<ReplaceCorruption>(&corruption)) {
    if (!is_probability(r->probability)) fail("replace probability must lie in [0,1]");
  } else {
    const auto& ra = std::get<RemoveAddCorruption>(corruption);
    if (!is_probability(ra.remove_probability) || !is_probability(ra.add_probability)) {
      fail("remove/add probabilities must lie in [0,1]");
    }
  }
  if (min_common_points < 0) fail("min_common_points must be nonnegative");
  if (!(focal_length > 0.0) || !(image_width > 0.0) || !(image_height > 0.0)) {
    fail("focal length and image size must be positive");
  }
  if (!(camera_cov_scale > 0.0)) fail("camera covariance scale must be positive");
}

Camera Camera::looking_at_origin(const Eigen::Vector3d& center, double roll) {
  const Eigen::Vector3d axis = -center.normalized();
  Eigen::Vector3d up(0.0, 0.0, 1.0);
  if (std::abs(axis.dot(up)) > 1.0 - 1e-12) up = Eigen::Vector3d(0.0, 1.0, 0.0);
  const Eigen::Vector3d x0 = up.cross(axis).normalized();
  const Eigen::Vector3d y0 = axis.cross(x0);

  // Roll as an axis-angle rotation of the look-at frame about the optical axis.
  const Eigen::AngleAxisd spin(roll, axis);
  Camera cam;
  cam.center = center;
  cam.rotation.row(0) = (spin * x0).transpose();
  cam.rotation.row(1) = (spin * y0).transpose();
  cam.rotation.row(2) = axis.transpose();
  return cam;
}

std::optional<Eigen::Vector2d> project(const Camera& camera, const Eigen::Vector3d& point,
                                       const SyntheticConfig& cfg) {
  const Eigen::Vector3d pc = camera.to_camera(point);
  if (!(pc.z() > 0.0)) return std::nullopt;
  const Eigen::Vector2d pixel(cfg.focal_length * pc.x() / pc.z() + 0.5 * cfg.image_width,
                              cfg.focal_length * pc.y() / pc.z() + 0.5 * cfg.image_height);
  if (pixel.x() < 0.0 || pixel.x() > cfg.image_width || pixel.y() < 0.0 ||
      pixel.y() > cfg.image_height) {
    return std::nullopt;
  }
  return pixel;
}

SyntheticScene generate_scene(const SyntheticConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed, kSceneStream);
  SyntheticScene scene;
  scene.points.reserve(static_cast<std::size_t>(cfg.num_points));
  while (scene.points.size() < static_cast<std::size_t>(cfg.num_points)) {
    const Eigen::Vector3d g = gaussian3(rng);
    const double norm = g.norm();
    if (norm > 0.0) scene.points.push_back(g / norm);
  }
  const double sigma = std::sqrt(cfg.camera_cov_scale);
  scene.cameras.reserve(static_cast<std::size_t>(cfg.num_cameras));
  for (int c = 0; c < cfg.num_cameras; ++c) {
    Eigen::Vector3d loc = sigma * gaussian3(rng);
    const double roll = 2.0 * std::numbers::pi * rng.uniform();
    const double norm = loc.norm();
    // Push every location one unit further from the origin.
    loc = norm > 0.0 ? Eigen::Vector3d(loc * (1.0 + 1.0 / norm)) : Eigen::Vector3d(0.0, 0.0, 1.0);
    scene.cameras.push_back(Camera::looking_at_origin(loc, roll));
  }
  scene.keypoints.resize(scene.cameras.size());
  for (std::size_t c = 0; c < scene.cameras.size(); ++c) {
    for (std::size_t p = 0; p < scene.points.size(); ++p) {
      if (auto pixel = project(scene.cameras[c], scene.points[p], cfg)) {
        scene.keypoints[c].push_back({static_cast<int>(p), *pixel});
      }
    }
  }
  return scene;
}

ProjectedKeypoints project_keypoints(const SyntheticScene& scene, const SyntheticConfig& /*cfg*/) {
  ProjectedKeypoints out;
  std::vector<Index> sizes;
  for (std::size_t c = 0; c < scene.keypoints.size(); ++c) {
    const auto& kps = scene.keypoints[c];
    if (kps.size() < 2) {
      ++out.dropped_cameras;
      continue;
    }
    sizes.push_back(static_cast<Index>(kps.size()));
    out.image_camera.push_back(static_cast<int>(c));
    for (const auto& kp : kps) out.truth_point_ids.push_back(kp.point_id);
  }
  out.partition = ImagePartition(std::move(sizes));
  return out;
}

LabeledInstance generate_matches(const SyntheticScene& /*scene*/, const ProjectedKeypoints& keypoints,
                                 const SyntheticConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed, kMatchStream);
  const ImagePartition& part = keypoints.partition;
  const Index n = part.image_count();
  auto ids_of = [&](Index image) {
    return std::span<const int>(keypoints.truth_point_ids)
        .subspan(static_cast<std::size_t>(part.offsets()[static_cast<std::size_t>(image)]),
                 static_cast<std::size_t>(part.keypoints_in(image)));
  };

  std::vector<std::pair<Index, Index>> selected;
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) {
      if (rng.bernoulli(cfg.pair_prob)) selected.emplace_back(a, b);
    }
  }

  LabeledInstance inst;
  std::vector<Edge> edges;
  std::vector<LocalMatch> matches;
  for (const auto& [a, b] : selected) {
    const auto ids_a = ids_of(a);
    const auto ids_b = ids_of(b);
    // Both id lists are increasing, so common points come from a merge.
    matches.clear();
    for (std::size_t k = 0, l = 0; k < ids_a.size() && l < ids_b.size();) {
      if (ids_a[k] < ids_b[l]) {
        ++k;
      } else if (ids_b[l] < ids_a[k]) {
        ++l;
      } else {
        matches.push_back({static_cast<Index>(k++), static_cast<Index>(l++)});
      }
    }
    if (matches.size() < static_cast<std::size_t>(cfg.min_common_points)) continue;
    ++inst.camera_pairs_retained;
    if (const auto* r = std::get_if<ReplaceCorruption>(&cfg.corruption)) {
      corrupt_replace(*r, ids_a, ids_b, matches, rng);
    } else {
      corrupt_remove_add(std::get<RemoveAddCorruption>(cfg.corruption), ids_a, ids_b, matches, rng);
    }
    for (const auto& m : matches) {
      edges.push_back(canonical(part.global_index(a, m.k), part.global_index(b, m.l)));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  inst.graph = MatchGraph::from_upper_edges(part, edges);
  inst.truth_point_ids = keypoints.truth_point_ids;
  inst.good.reserve(edges.size());
  for (const auto& e : edges) {
    inst.good.push_back(inst.truth_point_ids[static_cast<std::size_t>(e.i)] ==
                        inst.truth_point_ids[static_cast<std::size_t>(e.j)]);
  }
  return inst;
}

LabeledInstance generate_instance(const SyntheticConfig& cfg) {
  const SyntheticScene scene = generate_scene(cfg);
  const ProjectedKeypoints kps = project_keypoints(scene, cfg);
  return generate_matches(scene, kps, cfg);
}

std::vector<Edge> LabeledInstance::good_edges() const {
  const auto edges = graph.upper_edges();
  std::vector<Edge> out;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (good[e]) out.push_back(edges[e]);
  }
  return out;
}

std::vector<Edge> LabeledInstance::bad_edges() const {
  const auto edges = graph.upper_edges();
  std::vector<Edge> out;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!good[e]) out.push_back(edges[e]);
  }
  return out;
}

}  // namespace fcc
