#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "egrw/image.hpp"

namespace egrw {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// n examples as rows of a feature matrix. Images are flattened row-major.
struct LabeledDataset {
  RowMatrix features;
  /// Empty for unlabeled (PCA) data.
  std::vector<int> labels;
  int num_classes = 0;
  std::size_t image_height = 0;
  std::size_t image_width = 0;
  /// true = corrupted. Present once a noise injector has run.
  std::optional<std::vector<bool>> noise_mask;
  /// Per-example pseudo-loss, computed once and cached.
  std::optional<std::vector<double>> pseudo_loss;

  std::size_t size() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
  bool has_labels() const { return !labels.empty(); }
  bool is_image() const { return image_height * image_width == dim() && dim() > 0; }

  Image image(std::size_t i) const;
  void set_image(std::size_t i, const Image& img);

  LabeledDataset subset(std::span<const std::size_t> rows) const;

  /// Throws std::invalid_argument when the columns disagree on n, a label is
  /// outside [0, num_classes), or a feature is non-finite.
  void validate() const;
};

}  // namespace egrw
