#include "egrw/image.hpp"

#include <algorithm>
#include <cmath>

namespace egrw {

Image::Image(std::size_t h, std::size_t w, std::vector<double> px)
    : height(h), width(w), pixels(std::move(px)) {
  if (pixels.size() != h * w) throw std::invalid_argument("Image: pixel count does not match shape");
}

double Image::clamped(std::ptrdiff_t row, std::ptrdiff_t col) const {
  const auto h = static_cast<std::ptrdiff_t>(height);
  const auto w = static_cast<std::ptrdiff_t>(width);
  row = std::clamp<std::ptrdiff_t>(row, 0, h - 1);
  col = std::clamp<std::ptrdiff_t>(col, 0, w - 1);
  return pixels[static_cast<std::size_t>(row * w + col)];
}

double total_variation(const Image& img) {
  double tv = 0.0;
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      if (c + 1 < img.width) tv += std::abs(img.at(r, c + 1) - img.at(r, c));
      if (r + 1 < img.height) tv += std::abs(img.at(r + 1, c) - img.at(r, c));
    }
  }
  return tv;
}

namespace {

// Overlap weights of output cell i with input cells along one axis.
struct Span1D {
  std::size_t first;
  std::vector<double> weights;
};

std::vector<Span1D> box_spans(std::size_t in, std::size_t out) {
  std::vector<Span1D> spans(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t i = 0; i < out; ++i) {
    const double lo = static_cast<double>(i) * scale;
    const double hi = static_cast<double>(i + 1) * scale;
    const auto first = static_cast<std::size_t>(std::floor(lo));
    const auto last = std::min(in, static_cast<std::size_t>(std::ceil(hi)));
    spans[i].first = first;
    for (std::size_t j = first; j < last; ++j) {
      const double overlap = std::min(hi, static_cast<double>(j + 1)) - std::max(lo, static_cast<double>(j));
      spans[i].weights.push_back(std::max(overlap, 0.0) / scale);
    }
  }
  return spans;
}

}  // namespace

Image resize_box(const Image& img, std::size_t out_h, std::size_t out_w) {
  if (img.empty() || out_h == 0 || out_w == 0) throw std::invalid_argument("resize_box: empty shape");
  if (out_h == img.height && out_w == img.width) return img;
  const auto rows = box_spans(img.height, out_h);
  const auto cols = box_spans(img.width, out_w);
  Image out(out_h, out_w);
  for (std::size_t r = 0; r < out_h; ++r) {
    for (std::size_t c = 0; c < out_w; ++c) {
      double acc = 0.0;
      for (std::size_t a = 0; a < rows[r].weights.size(); ++a) {
        for (std::size_t b = 0; b < cols[c].weights.size(); ++b) {
          acc += rows[r].weights[a] * cols[c].weights[b] * img.at(rows[r].first + a, cols[c].first + b);
        }
      }
      out.at(r, c) = acc;
    }
  }
  return out;
}

}  // namespace egrw
