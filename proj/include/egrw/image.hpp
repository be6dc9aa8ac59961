#pragma once

// Grayscale image, row-major, pixel values nominally in [0, 1].

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace egrw {

struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(std::size_t h, std::size_t w, double fill = 0.0) : height(h), width(w), pixels(h * w, fill) {}
  Image(std::size_t h, std::size_t w, std::vector<double> px);

  bool empty() const { return pixels.empty(); }
  std::size_t size() const { return pixels.size(); }
  double& at(std::size_t row, std::size_t col) { return pixels[row * width + col]; }
  double at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }

  /// Pixel with replicate (clamp-to-edge) boundary handling.
  double clamped(std::ptrdiff_t row, std::ptrdiff_t col) const;

  bool operator==(const Image&) const = default;
};

/// Sum of absolute forward differences along rows and columns (anisotropic TV).
double total_variation(const Image& img);

/// Area-weighted box average to (out_h, out_w). Works for non-integer factors.
Image resize_box(const Image& img, std::size_t out_h, std::size_t out_w);

}  // namespace egrw
