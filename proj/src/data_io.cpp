#include "egrw/data_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include <openssl/evp.h>

#include "egrw/report.hpp"
#include "egrw/rng.hpp"

namespace egrw {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
         std::uint32_t{b[off + 3]};
}

void put_be32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                         static_cast<char>(v)};
  out.write(bytes, 4);
}

template <typename Fn>
auto with_path_context(const fs::path& path, Fn&& fn) {
  try {
    return fn();
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::ofstream open_for_write(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish_write(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace

IdxData parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw FormatError("IDX: truncated magic at offset 0");
  if (bytes[0] != 0 || bytes[1] != 0) throw FormatError("IDX: bad magic, first two bytes must be zero");
  const std::uint8_t type = bytes[2];
  const std::size_t ndims = bytes[3];
  const bool ubyte_labels = type == 0x08 && ndims == 1;
  const bool ubyte_images = type == 0x08 && ndims == 3;
  const bool float_images = type == 0x0D && ndims == 3;
  if (!ubyte_labels && !ubyte_images && !float_images) {
    std::ostringstream os;
    os << "unsupported IDX type 0x" << std::hex << std::setw(2) << std::setfill('0') << int{type} << " with "
       << std::dec << ndims << " dimension(s)";
    throw FormatError(os.str());
  }
  const std::size_t header = 4 + 4 * ndims;
  if (bytes.size() < header) throw FormatError("IDX: truncated dimension header at offset 4");

  IdxData out;
  std::size_t count = 1;
  for (std::size_t i = 0; i < ndims; ++i) {
    const std::size_t dim = read_be32(bytes, 4 + 4 * i);
    if (dim != 0 && count > (std::size_t{1} << 40) / dim) throw FormatError("IDX: dimension product too large");
    count *= dim;
    out.dims.push_back(dim);
  }
  const std::size_t elem = float_images ? 4 : 1;
  const std::size_t expected = header + count * elem;
  if (bytes.size() != expected) {
    throw FormatError("IDX: payload has " + std::to_string(bytes.size() - header) + " bytes after offset " +
                      std::to_string(header) + ", expected " + std::to_string(count * elem));
  }

  out.values.resize(count);
  if (ubyte_labels) {
    for (std::size_t i = 0; i < count; ++i) out.values[i] = bytes[header + i];
  } else if (ubyte_images) {
    for (std::size_t i = 0; i < count; ++i) out.values[i] = bytes[header + i] / 255.0;
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint32_t raw = read_be32(bytes, header + 4 * i);
      const float v = std::bit_cast<float>(raw);
      if (!std::isfinite(v)) throw FormatError("IDX: non-finite float at offset " + std::to_string(header + 4 * i));
      out.values[i] = v;
    }
  }
  return out;
}

IdxData read_idx(const fs::path& path) {
  const auto bytes = read_bytes(path);
  return with_path_context(path, [&] { return parse_idx(bytes); });
}

void write_idx_labels(const fs::path& path, std::span<const int> labels) {
  auto out = open_for_write(path);
  out.write("\x00\x00\x08\x01", 4);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  for (int l : labels) {
    if (l < 0 || l > 255) throw std::invalid_argument("write_idx_labels: label does not fit in a byte");
    out.put(static_cast<char>(l));
  }
  finish_write(out, path);
}

void write_idx_images(const fs::path& path, const LabeledDataset& ds) {
  if (!ds.is_image()) throw std::invalid_argument("write_idx_images: dataset rows are not images");
  auto out = open_for_write(path);
  out.write("\x00\x00\x0D\x03", 4);
  put_be32(out, static_cast<std::uint32_t>(ds.size()));
  put_be32(out, static_cast<std::uint32_t>(ds.image_height));
  put_be32(out, static_cast<std::uint32_t>(ds.image_width));
  for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
      put_be32(out, std::bit_cast<std::uint32_t>(static_cast<float>(ds.features(i, j))));
    }
  }
  finish_write(out, path);
}

LabeledDataset load_idx_dataset(const fs::path& images, const std::optional<fs::path>& labels,
                                int num_classes) {
  const IdxData img = read_idx(images);
  if (img.dims.size() != 3) throw FormatError(images.string() + ": expected a 3-D image file");
  LabeledDataset ds;
  const auto n = static_cast<Eigen::Index>(img.dims[0]);
  ds.image_height = img.dims[1];
  ds.image_width = img.dims[2];
  ds.features = Eigen::Map<const RowMatrix>(img.values.data(), n, static_cast<Eigen::Index>(img.dims[1] * img.dims[2]));
  if (labels) {
    const IdxData lab = read_idx(*labels);
    if (lab.dims.size() != 1) throw FormatError(labels->string() + ": expected a 1-D label file");
    if (lab.dims[0] != img.dims[0]) {
      throw FormatError(labels->string() + ": " + std::to_string(lab.dims[0]) + " labels for " +
                        std::to_string(img.dims[0]) + " images");
    }
    ds.num_classes = num_classes;
    ds.labels.reserve(lab.values.size());
    for (std::size_t i = 0; i < lab.values.size(); ++i) {
      const int l = static_cast<int>(lab.values[i]);
      if (l >= num_classes) {
        throw FormatError(labels->string() + ": label " + std::to_string(l) + " at index " + std::to_string(i) +
                          " exceeds class count " + std::to_string(num_classes));
      }
      ds.labels.push_back(l);
    }
  }
  return ds;
}

Image parse_pgm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto skip_space_and_comments = [&] {
    while (pos < bytes.size()) {
      if (std::isspace(bytes[pos])) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n' && bytes[pos] != '\r') ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&](const char* field) {
    skip_space_and_comments();
    const std::size_t start = pos;
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > (1u << 24)) throw FormatError(std::string("PGM: ") + field + " too large at offset " + std::to_string(start));
      ++pos;
    }
    if (pos == start) throw FormatError(std::string("PGM: expected ") + field + " at offset " + std::to_string(start));
    return v;
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw FormatError("PGM: magic is not P5 at offset 0");
  pos = 2;
  const std::size_t width = read_uint("width");
  const std::size_t height = read_uint("height");
  const std::size_t maxval = read_uint("maxval");
  if (width == 0 || height == 0) throw FormatError("PGM: zero width or height");
  if (maxval == 0 || maxval > 255) throw FormatError("PGM: maxval " + std::to_string(maxval) + " outside [1, 255]");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw FormatError("PGM: expected whitespace after maxval at offset " + std::to_string(pos));
  }
  ++pos;
  if (bytes.size() - pos < width * height) {
    throw FormatError("PGM: truncated payload at offset " + std::to_string(pos) + ", need " +
                      std::to_string(width * height) + " bytes");
  }
  Image img(height, width);
  for (std::size_t i = 0; i < width * height; ++i) {
    img.pixels[i] = static_cast<double>(bytes[pos + i]) / static_cast<double>(maxval);
  }
  return img;
}

Image read_pgm(const fs::path& path) {
  const auto bytes = read_bytes(path);
  return with_path_context(path, [&] { return parse_pgm(bytes); });
}

namespace {

bool is_pgm(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".pgm";
}

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (directories ? entry.is_directory() : (entry.is_regular_file() && is_pgm(entry.path()))) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

LabeledDataset read_pgm_dir(const fs::path& dir, const PgmDirOptions& opts) {
  if (!fs::is_directory(dir)) throw std::runtime_error("'" + dir.string() + "' is not a directory");
  std::vector<std::pair<fs::path, int>> files;
  const auto classes = sorted_entries(dir, true);
  if (classes.empty()) {
    for (auto& f : sorted_entries(dir, false)) files.emplace_back(std::move(f), -1);
  } else {
    for (std::size_t c = 0; c < classes.size(); ++c) {
      for (auto& f : sorted_entries(classes[c], false)) files.emplace_back(std::move(f), static_cast<int>(c));
    }
  }
  if (files.empty()) throw std::runtime_error("no .pgm files under '" + dir.string() + "'");

  std::vector<Image> images;
  images.reserve(files.size());
  for (const auto& [path, label] : files) {
    Image img = read_pgm(path);
    if (opts.resize) img = resize_box(img, opts.resize->first, opts.resize->second);
    if (!images.empty() && (img.height != images.front().height || img.width != images.front().width)) {
      throw FormatError(path.string() + ": shape " + std::to_string(img.height) + "x" + std::to_string(img.width) +
                        " differs from " + std::to_string(images.front().height) + "x" +
                        std::to_string(images.front().width));
    }
    images.push_back(std::move(img));
  }

  LabeledDataset ds;
  ds.image_height = images.front().height;
  ds.image_width = images.front().width;
  ds.features.resize(static_cast<Eigen::Index>(images.size()), static_cast<Eigen::Index>(images.front().size()));
  for (std::size_t i = 0; i < images.size(); ++i) ds.set_image(i, images[i]);
  if (!classes.empty()) {
    ds.num_classes = static_cast<int>(classes.size());
    for (const auto& f : files) ds.labels.push_back(f.second);
  }
  return ds;
}

std::pair<LabeledDataset, LabeledDataset> split_train_test(const LabeledDataset& ds, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw std::invalid_argument("split: test fraction must lie in (0, 1)");
  }
  const std::size_t n = ds.size();
  if (n < 2) throw std::invalid_argument("split: need at least 2 examples");
  const auto n_test = static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(n)));
  if (n_test == 0 || n_test == n) {
    throw std::invalid_argument("split: fraction " + format_double(spec.test_fraction) + " of " +
                                std::to_string(n) + " examples leaves one side empty");
  }
  Rng rng(spec.seed);
  const auto perm = random_permutation(n, rng);
  const std::span<const std::size_t> all(perm);
  return {ds.subset(all.subspan(n_test)), ds.subset(all.first(n_test))};
}

void snapshot_weights(const WeightStore& store, const fs::path& path) {
  auto out = open_for_write(path);
  for (std::size_t i = 0; i < store.size(); ++i) {
    out << json{{"id", i}, {"log_weight", store.log_weight(i)}}.dump() << '\n';
  }
  finish_write(out, path);
}

namespace {

template <typename Fn>
void for_each_json_line(const fs::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(where + ": invalid JSON (" + e.what() + ")");
    }
    try {
      fn(record, where);
    } catch (const json::exception& e) {
      throw FormatError(where + ": " + e.what());
    }
  }
}

std::size_t checked_id(const json& record, const std::string& where, std::size_t expected) {
  const auto id = record.at("id").get<std::size_t>();
  if (id != expected) {
    throw FormatError(where + ": field \"id\" is " + std::to_string(id) + ", expected " + std::to_string(expected));
  }
  return id;
}

}  // namespace

WeightStore read_weight_snapshot(const fs::path& path) {
  std::vector<double> values;
  for_each_json_line(path, [&](const json& record, const std::string& where) {
    checked_id(record, where, values.size());
    const double lw = record.at("log_weight").get<double>();
    if (!std::isfinite(lw)) throw FormatError(where + ": field \"log_weight\" is not finite");
    values.push_back(lw);
  });
  WeightStore store(values.size());
  store.assign(values);
  return store;
}

void write_noise_mask(const NoiseMask& mask, const fs::path& path) {
  if (mask.severity.size() != mask.noisy.size()) throw std::invalid_argument("noise mask: column lengths differ");
  auto out = open_for_write(path);
  for (std::size_t i = 0; i < mask.noisy.size(); ++i) {
    out << json{{"id", i}, {"noisy", static_cast<bool>(mask.noisy[i])}, {"severity", mask.severity[i]}}.dump()
        << '\n';
  }
  finish_write(out, path);
}

NoiseMask read_noise_mask(const fs::path& path) {
  NoiseMask mask;
  for_each_json_line(path, [&](const json& record, const std::string& where) {
    checked_id(record, where, mask.noisy.size());
    mask.noisy.push_back(record.at("noisy").get<bool>());
    mask.severity.push_back(record.at("severity").get<double>());
  });
  return mask;
}

void write_scores(std::span<const double> scores, const fs::path& path) {
  auto out = open_for_write(path);
  out << "id,score\n";
  for (std::size_t i = 0; i < scores.size(); ++i) out << i << ',' << format_double(scores[i]) << '\n';
  finish_write(out, path);
}

std::vector<double> read_scores(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || (line != "id,score" && line != "id,score\r")) {
    throw FormatError(path.string() + ":1: expected header 'id,score'");
  }
  std::vector<double> scores;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw FormatError(where + ": expected 'id,score'");
    if (line.substr(0, comma) != std::to_string(scores.size())) throw FormatError(where + ": ids must be 0..n-1 in order");
    try {
      scores.push_back(parse_double(line.substr(comma + 1), where));
    } catch (const std::invalid_argument& e) {
      throw FormatError(e.what());
    }
  }
  return scores;
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::vector<ManifestEntry> entries;
  const fs::path base = path.parent_path();
  for_each_json_line(path, [&](const json& record, const std::string&) {
    ManifestEntry e;
    e.name = record.at("name").get<std::string>();
    e.path = record.at("path").get<std::string>();
    if (e.path.is_relative()) e.path = base / e.path;
    e.sha256 = record.at("sha256").get<std::string>();
    entries.push_back(std::move(e));
  });
  return entries;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256: init failed");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
  return os.str();
}

void verify_manifest_entry(const ManifestEntry& entry) {
  const std::string actual = sha256_file(entry.path);
  if (actual != entry.sha256) {
    throw FormatError("manifest: checksum mismatch for '" + entry.name + "' (" + entry.path.string() + "): expected " +
                      entry.sha256 + ", got " + actual);
  }
}

}  // namespace egrw
