#include "egrw/pseudo_loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace egrw {

QualityScorer parse_scorer(std::string_view name) {
  if (name == "laplacian" || name == "laplacian_variance") return QualityScorer::laplacian_variance;
  throw std::invalid_argument("unknown scorer '" + std::string(name) + "'");
}

double laplacian_variance(const Image& image) {
  if (image.empty()) throw std::invalid_argument("laplacian_variance: empty image");
  const auto h = static_cast<std::ptrdiff_t>(image.height);
  const auto w = static_cast<std::ptrdiff_t>(image.width);
  std::vector<double> response;
  response.reserve(image.size());
  double mean = 0.0;
  for (std::ptrdiff_t r = 0; r < h; ++r) {
    for (std::ptrdiff_t c = 0; c < w; ++c) {
      const double v = image.clamped(r - 1, c) + image.clamped(r + 1, c) + image.clamped(r, c - 1) +
                       image.clamped(r, c + 1) - 4.0 * image.clamped(r, c);
      response.push_back(v);
      mean += v;
    }
  }
  mean /= static_cast<double>(response.size());
  double var = 0.0;
  for (double v : response) var += (v - mean) * (v - mean);
  return var / static_cast<double>(response.size());
}

double blur_pseudo_loss(const Image& image) { return -laplacian_variance(image); }

double score(QualityScorer scorer, const Image& image) {
  switch (scorer) {
    case QualityScorer::laplacian_variance: return blur_pseudo_loss(image);
  }
  throw std::logic_error("score: unhandled scorer");
}

const std::vector<double>& pseudo_loss_column(LabeledDataset& ds, QualityScorer scorer,
                                              bool standardize) {
  if (ds.pseudo_loss) return *ds.pseudo_loss;
  std::vector<double> column(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    column[i] = score(scorer, ds.image(i));
    if (!std::isfinite(column[i])) {
      throw std::runtime_error("pseudo-loss: scorer failed on example " + std::to_string(i));
    }
  }
  if (standardize && !column.empty()) {
    double mean = 0.0;
    for (double v : column) mean += v;
    mean /= static_cast<double>(column.size());
    double var = 0.0;
    for (double v : column) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(column.size()));
    for (double& v : column) v = sd > 0.0 ? (v - mean) / sd : v - mean;
  }
  ds.pseudo_loss = std::move(column);
  return *ds.pseudo_loss;
}

}  // namespace egrw
