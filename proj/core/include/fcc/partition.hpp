#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fcc {

/// Global keypoint index. Keypoint k of image a maps to offsets[a] + k.
using Index = std::int32_t;

/// Block structure of the keypoint graph: n images with m_i keypoints each.
///
/// The within-image graph (every pair of distinct keypoints sharing an image)
/// is implied by this partition and never stored.
class ImagePartition {
 public:
  ImagePartition() = default;

  /// Throws ConfigInvalidError when a count is not positive.
  explicit ImagePartition(std::vector<Index> keypoints_per_image);

  Index image_count() const { return static_cast<Index>(sizes_.size()); }
  Index total_keypoints() const { return offsets_.empty() ? 0 : offsets_.back(); }
  Index keypoints_in(Index image) const { return sizes_[static_cast<std::size_t>(image)]; }

  /// offsets()[a] is the first global index of image a; offsets().back() == N.
  std::span<const Index> offsets() const { return offsets_; }
  std::span<const Index> keypoints_per_image() const { return sizes_; }

  Index image_of(Index keypoint) const { return image_of_[static_cast<std::size_t>(keypoint)]; }

  /// Throws IndexOutOfRangeError for an invalid (image, local) pair.
  Index global_index(Index image, Index local) const;
  Index local_index(Index keypoint) const { return keypoint - offsets_[static_cast<std::size_t>(image_of(keypoint))]; }

  bool operator==(const ImagePartition& other) const { return sizes_ == other.sizes_; }

 private:
  std::vector<Index> sizes_;
  std::vector<Index> offsets_;
  std::vector<Index> image_of_;
};

}  // namespace fcc
