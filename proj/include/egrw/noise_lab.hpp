#pragma once

// Seeded corruption models: symmetric label flips, additive Gaussian pixel
// noise, random uniform-noise occlusion rectangles, and Gaussian blur.
//
// Dataset-level injectors pick exactly round(rate * n) examples without
// replacement and leave every other example bit-identical. Each corrupted
// example draws from its own sub-stream, substream_seed(seed, index), so the
// result does not depend on processing order.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "egrw/dataset.hpp"
#include "egrw/image.hpp"
#include "egrw/rng.hpp"

namespace egrw {

enum class NoiseKind { none, label_flip, gaussian, occlusion, blur };

std::string_view to_string(NoiseKind kind);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::none;
  /// Fraction of examples corrupted.
  double rate = 0.5;
  /// Severity ~ multiplier * Beta(beta_a, beta_b) unless fixed_sigma is set.
  double beta_a = 2.0;
  double beta_b = 5.0;
  double multiplier = 1.0;
  std::optional<double> fixed_sigma;
  double occlusion_min = 0.25;
  double occlusion_max = 1.0;

  void validate() const;

  /// Parses "none", "label:<rate>", "blur:<sigma>", "blur", "gaussian" (alias
  /// "random") or "occlusion". Kinds without an explicit rate use
  /// `default_rate`. Beta-drawn blur uses multiplier 10, Gaussian noise 1.
  static NoiseSpec parse(std::string_view text, double default_rate);
};

struct NoiseMask {
  std::vector<bool> noisy;
  /// Drawn severity (sigma, area fraction, ...) per example; 0 when clean.
  std::vector<double> severity;

  std::size_t count() const;
};

double sample_beta(double a, double b, Rng& rng);

struct LabelFlip {
  std::vector<int> labels;
  NoiseMask mask;
};

/// Flips exactly round(rate * n) labels, each to one of the other K-1
/// classes chosen uniformly.
LabelFlip flip_labels_symmetric(const std::vector<int>& labels, double rate, int num_classes,
                                std::uint64_t seed);

/// x + N(0, sigma^2) per pixel. Not clipped.
Image add_gaussian_noise(const Image& image, double sigma, std::uint64_t seed);

struct Occlusion {
  Image image;
  std::size_t top = 0;
  std::size_t left = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  /// The sampled target area fraction (before rounding to whole pixels).
  double area_fraction = 0.0;
};

/// Replaces a random rectangle with Uniform(0, 1) pixels. The area fraction is
/// Uniform(min_area, max_area); the aspect ratio is log-uniform in [1/3, 3],
/// clamped to fit; the position is uniform over valid placements.
Occlusion occlude(const Image& image, double min_area, double max_area, std::uint64_t seed);

/// Normalized 1-D Gaussian taps for offsets -R..R, R = ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian blur with replicate padding. sigma = 0 is the identity.
Image gaussian_blur(const Image& image, double sigma);

/// Applies `spec` to `ds` in place (labels for label_flip, pixels otherwise)
/// and records the mask on the dataset.
NoiseMask corrupt_dataset(LabeledDataset& ds, const NoiseSpec& spec, std::uint64_t seed);

}  // namespace egrw
