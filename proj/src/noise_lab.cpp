#include "egrw/noise_lab.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace egrw {

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::none: return "none";
    case NoiseKind::label_flip: return "label";
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::occlusion: return "occlusion";
    case NoiseKind::blur: return "blur";
  }
  return "?";
}

void NoiseSpec::validate() const {
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("noise: rate must lie in [0, 1]");
  if (!(beta_a > 0.0 && beta_b > 0.0)) throw std::invalid_argument("noise: beta parameters must be positive");
  if (!(multiplier >= 0.0)) throw std::invalid_argument("noise: multiplier must be nonnegative");
  if (fixed_sigma && !(*fixed_sigma >= 0.0)) throw std::invalid_argument("noise: sigma must be nonnegative");
  if (!(occlusion_min > 0.0 && occlusion_min <= occlusion_max && occlusion_max <= 1.0)) {
    throw std::invalid_argument("noise: occlusion area range must satisfy 0 < min <= max <= 1");
  }
}

namespace {

double parse_number(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("noise: cannot parse " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

NoiseSpec NoiseSpec::parse(std::string_view text, double default_rate) {
  NoiseSpec spec;
  spec.rate = default_rate;
  const auto colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

  if (kind == "none") {
    spec.kind = NoiseKind::none;
    spec.rate = 0.0;
  } else if (kind == "label") {
    spec.kind = NoiseKind::label_flip;
    if (!arg.empty()) spec.rate = parse_number(arg, "label noise rate");
  } else if (kind == "gaussian" || kind == "random") {
    spec.kind = NoiseKind::gaussian;
    if (!arg.empty()) spec.multiplier = parse_number(arg, "gaussian multiplier");
  } else if (kind == "occlusion") {
    spec.kind = NoiseKind::occlusion;
  } else if (kind == "blur") {
    spec.kind = NoiseKind::blur;
    spec.multiplier = 10.0;
    if (!arg.empty()) spec.fixed_sigma = parse_number(arg, "blur sigma");
  } else {
    throw std::invalid_argument("noise: unknown kind '" + std::string(kind) + "'");
  }
  spec.validate();
  return spec;
}

std::size_t NoiseMask::count() const {
  return static_cast<std::size_t>(std::count(noisy.begin(), noisy.end(), true));
}

double sample_beta(double a, double b, Rng& rng) {
  if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("sample_beta: a and b must be positive");
  for (;;) {
    const double x = rng.gamma(a);
    const double y = rng.gamma(b);
    const double v = x / (x + y);
    if (v > 0.0 && v < 1.0) return v;
  }
}

namespace {

std::size_t corrupted_count(double rate, std::size_t n) {
  return static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
}

}  // namespace

LabelFlip flip_labels_symmetric(const std::vector<int>& labels, double rate, int num_classes,
                                std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("flip_labels: rate must lie in [0, 1]");
  const std::size_t n = labels.size();
  const std::size_t k = corrupted_count(rate, n);
  if (k > 0 && num_classes < 2) throw std::invalid_argument("flip_labels: need at least 2 classes");
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw std::invalid_argument("flip_labels: label out of range at example " + std::to_string(i));
    }
  }

  LabelFlip out{labels, {std::vector<bool>(n, false), std::vector<double>(n, 0.0)}};
  Rng rng(seed);
  for (std::size_t i : sample_without_replacement(n, k, rng)) {
    const int original = labels[i];
    // Uniform over the other K-1 classes.
    auto pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_classes - 1)));
    if (pick >= original) ++pick;
    out.labels[i] = pick;
    out.mask.noisy[i] = true;
    out.mask.severity[i] = 1.0;
  }
  return out;
}

Image add_gaussian_noise(const Image& image, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("add_gaussian_noise: sigma must be nonnegative");
  if (sigma == 0.0) return image;
  Rng rng(seed);
  Image out = image;
  for (double& p : out.pixels) p += sigma * rng.normal();
  return out;
}

Occlusion occlude(const Image& image, double min_area, double max_area, std::uint64_t seed) {
  if (image.empty()) throw std::invalid_argument("occlude: empty image");
  if (!(min_area > 0.0 && min_area <= max_area && max_area <= 1.0)) {
    throw std::invalid_argument("occlude: area range must satisfy 0 < min <= max <= 1");
  }
  Rng rng(seed);
  const double h = static_cast<double>(image.height);
  const double w = static_cast<double>(image.width);

  const double frac = rng.uniform(min_area, max_area);
  const double aspect = std::exp(rng.uniform(std::log(1.0 / 3.0), std::log(3.0)));  // height / width
  const double area = frac * h * w;
  double rect_h = std::sqrt(area * aspect);
  double rect_w = std::sqrt(area / aspect);
  // Clamp one side to the image and give the area to the other.
  if (rect_h > h) {
    rect_h = h;
    rect_w = area / h;
  }
  if (rect_w > w) {
    rect_w = w;
    rect_h = std::min(h, area / w);
  }
  auto rh = static_cast<std::size_t>(std::clamp(std::llround(rect_h), 1LL, static_cast<long long>(image.height)));
  auto rw = static_cast<std::size_t>(std::clamp(std::llround(rect_w), 1LL, static_cast<long long>(image.width)));

  Occlusion out;
  out.area_fraction = frac;
  out.height = rh;
  out.width = rw;
  out.top = static_cast<std::size_t>(rng.below(image.height - rh + 1));
  out.left = static_cast<std::size_t>(rng.below(image.width - rw + 1));
  out.image = image;
  for (std::size_t r = out.top; r < out.top + rh; ++r) {
    for (std::size_t c = out.left; c < out.left + rw; ++c) out.image.at(r, c) = rng.uniform();
  }
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("gaussian_kernel: bad sigma");
  if (sigma == 0.0) return {1.0};
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
    const double v = std::exp(-static_cast<double>(k * k) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(k + radius)] = v;
    total += v;
  }
  for (double& t : taps) t /= total;
  return taps;
}

Image gaussian_blur(const Image& image, double sigma) {
  const auto taps = gaussian_kernel(sigma);
  if (taps.size() == 1 || image.empty()) return image;
  const auto radius = static_cast<std::ptrdiff_t>(taps.size() / 2);

  Image horizontal(image.height, image.width);
  for (std::size_t r = 0; r < image.height; ++r) {
    for (std::size_t c = 0; c < image.width; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        acc += taps[static_cast<std::size_t>(k + radius)] *
               image.clamped(static_cast<std::ptrdiff_t>(r), static_cast<std::ptrdiff_t>(c) + k);
      }
      horizontal.at(r, c) = acc;
    }
  }
  Image out(image.height, image.width);
  for (std::size_t r = 0; r < image.height; ++r) {
    for (std::size_t c = 0; c < image.width; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        acc += taps[static_cast<std::size_t>(k + radius)] *
               horizontal.clamped(static_cast<std::ptrdiff_t>(r) + k, static_cast<std::ptrdiff_t>(c));
      }
      out.at(r, c) = acc;
    }
  }
  return out;
}

NoiseMask corrupt_dataset(LabeledDataset& ds, const NoiseSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t n = ds.size();
  NoiseMask mask{std::vector<bool>(n, false), std::vector<double>(n, 0.0)};

  if (spec.kind == NoiseKind::none || spec.rate == 0.0) {
    ds.noise_mask = mask.noisy;
    return mask;
  }
  if (spec.kind == NoiseKind::label_flip) {
    if (!ds.has_labels()) throw std::invalid_argument("corrupt: label noise on an unlabeled dataset");
    auto flip = flip_labels_symmetric(ds.labels, spec.rate, ds.num_classes, seed);
    ds.labels = std::move(flip.labels);
    ds.noise_mask = flip.mask.noisy;
    return flip.mask;
  }

  // Pixel noise on non-image rows (synthetic vectors) treats each row as a 1 x d image.
  const std::size_t h = ds.is_image() ? ds.image_height : 1;
  const std::size_t w = ds.is_image() ? ds.image_width : ds.dim();

  Rng selector(seed);
  for (std::size_t i : sample_without_replacement(n, corrupted_count(spec.rate, n), selector)) {
    Rng local(substream_seed(seed, i));
    const auto row = static_cast<Eigen::Index>(i);
    Image img(h, w);
    for (std::size_t j = 0; j < ds.dim(); ++j) img.pixels[j] = ds.features(row, static_cast<Eigen::Index>(j));

    double severity = 0.0;
    switch (spec.kind) {
      case NoiseKind::gaussian:
        severity = spec.fixed_sigma ? *spec.fixed_sigma
                                    : spec.multiplier * sample_beta(spec.beta_a, spec.beta_b, local);
        img = add_gaussian_noise(img, severity, local());
        break;
      case NoiseKind::occlusion: {
        auto occ = occlude(img, spec.occlusion_min, spec.occlusion_max, local());
        severity = occ.area_fraction;
        img = std::move(occ.image);
        break;
      }
      case NoiseKind::blur:
        severity = spec.fixed_sigma ? *spec.fixed_sigma
                                    : spec.multiplier * sample_beta(spec.beta_a, spec.beta_b, local);
        img = gaussian_blur(img, severity);
        break;
      default:
        break;
    }
    for (std::size_t j = 0; j < ds.dim(); ++j) ds.features(row, static_cast<Eigen::Index>(j)) = img.pixels[j];
    mask.noisy[i] = true;
    mask.severity[i] = severity;
  }
  ds.noise_mask = mask.noisy;
  return mask;
}

}  // namespace egrw
