#include "egrw/dataset.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace egrw {

Image LabeledDataset::image(std::size_t i) const {
  if (!is_image()) throw std::logic_error("dataset: rows are not images");
  Image img(image_height, image_width);
  for (std::size_t j = 0; j < dim(); ++j) img.pixels[j] = features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return img;
}

void LabeledDataset::set_image(std::size_t i, const Image& img) {
  if (img.height != image_height || img.width != image_width) {
    throw std::invalid_argument("dataset: image shape mismatch");
  }
  for (std::size_t j = 0; j < dim(); ++j) features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = img.pixels[j];
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> rows) const {
  LabeledDataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.num_classes = num_classes;
  out.image_height = image_height;
  out.image_width = image_width;
  if (noise_mask) out.noise_mask.emplace();
  if (pseudo_loss) out.pseudo_loss.emplace();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t i = rows[k];
    if (i >= size()) throw std::out_of_range("dataset subset: row " + std::to_string(i));
    out.features.row(static_cast<Eigen::Index>(k)) = features.row(static_cast<Eigen::Index>(i));
    if (has_labels()) out.labels.push_back(labels[i]);
    if (noise_mask) out.noise_mask->push_back((*noise_mask)[i]);
    if (pseudo_loss) out.pseudo_loss->push_back((*pseudo_loss)[i]);
  }
  return out;
}

void LabeledDataset::validate() const {
  const std::size_t n = size();
  if (has_labels()) {
    if (labels.size() != n) throw std::invalid_argument("dataset: label count differs from row count");
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] < 0 || labels[i] >= num_classes) {
        throw std::invalid_argument("dataset: label " + std::to_string(labels[i]) + " of example " +
                                    std::to_string(i) + " outside [0, " + std::to_string(num_classes) + ")");
      }
    }
  }
  if (noise_mask && noise_mask->size() != n) throw std::invalid_argument("dataset: noise mask length differs");
  if (pseudo_loss && pseudo_loss->size() != n) throw std::invalid_argument("dataset: pseudo-loss length differs");
  if (!features.allFinite()) throw std::invalid_argument("dataset: non-finite feature value");
}

}  // namespace egrw
