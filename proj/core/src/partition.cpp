#include "fcc/partition.hpp"

#include <string>

#include "fcc/errors.hpp"

namespace fcc {

ImagePartition::ImagePartition(std::vector<Index> keypoints_per_image)
    : sizes_(std::move(keypoints_per_image)) {
  offsets_.reserve(sizes_.size() + 1);
  offsets_.push_back(0);
  std::int64_t total = 0;
  for (std::size_t a = 0; a < sizes_.size(); ++a) {
    if (sizes_[a] <= 0) {
      throw ConfigInvalidError("image " + std::to_string(a) + " has no keypoints");
    }
    total += sizes_[a];
    if (total > INT32_MAX) throw ConfigInvalidError("too many keypoints for 32-bit indices");
    offsets_.push_back(static_cast<Index>(total));
  }
  image_of_.resize(static_cast<std::size_t>(total));
  for (std::size_t a = 0; a < sizes_.size(); ++a) {
    for (Index k = offsets_[a]; k < offsets_[a + 1]; ++k) {
      image_of_[static_cast<std::size_t>(k)] = static_cast<Index>(a);
    }
  }
}

Index ImagePartition::global_index(Index image, Index local) const {
  if (image < 0 || image >= image_count()) {
    throw IndexOutOfRangeError("image index " + std::to_string(image) + " out of range");
  }
  if (local < 0 || local >= keypoints_in(image)) {
    throw IndexOutOfRangeError("keypoint " + std::to_string(local) + " out of range for image " +
                               std::to_string(image));
  }
  return offsets_[static_cast<std::size_t>(image)] + local;
}

}  // namespace fcc
