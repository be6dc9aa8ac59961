#pragma once

// Dataset ingestion and persistence.
//
// Formats:
//   IDX        big-endian: 00 00 <type> <ndims>, ndims x uint32 sizes, payload.
//              Read: 08/1 (unsigned-byte labels), 08/3 (unsigned-byte images,
//              scaled by 1/255) and 0D/3 (float32 images, unscaled, the format
//              written for noise-injected datasets).
//   PGM        binary P5, maxval <= 255, comments allowed between header
//              tokens; pixels scaled by 1/maxval.
//   snapshots  JSON-lines {"id": int, "log_weight": float}
//   masks      JSON-lines {"id": int, "noisy": bool, "severity": float}
//   scores     CSV with header "id,score"
//   manifest   JSON-lines {"name": str, "path": str, "sha256": hex}; relative
//              paths resolve against the manifest's directory.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "egrw/dataset.hpp"
#include "egrw/image.hpp"
#include "egrw/noise_lab.hpp"
#include "egrw/weight_engine.hpp"

namespace egrw {

/// Malformed input. Messages name the file and byte offset or field.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);

struct IdxData {
  std::vector<std::size_t> dims;
  std::vector<double> values;
};

IdxData parse_idx(std::span<const std::uint8_t> bytes);
IdxData read_idx(const std::filesystem::path& path);

void write_idx_labels(const std::filesystem::path& path, std::span<const int> labels);
/// Writes float32 images (type 0D), preserving unclipped values.
void write_idx_images(const std::filesystem::path& path, const LabeledDataset& ds);

/// Pairs an IDX image file with an optional label file.
LabeledDataset load_idx_dataset(const std::filesystem::path& images,
                                const std::optional<std::filesystem::path>& labels,
                                int num_classes = 10);

Image parse_pgm(std::span<const std::uint8_t> bytes);
Image read_pgm(const std::filesystem::path& path);

struct PgmDirOptions {
  /// Box-average every image to (height, width).
  std::optional<std::pair<std::size_t, std::size_t>> resize;
};

/// Reads every *.pgm under `dir`. With subdirectories, each sorted subdirectory
/// is one class; otherwise the dataset is unlabeled.
LabeledDataset read_pgm_dir(const std::filesystem::path& dir, const PgmDirOptions& opts = {});

struct SplitSpec {
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
};

/// Seeded shuffle, then the first round(fraction * n) examples form the test side.
std::pair<LabeledDataset, LabeledDataset> split_train_test(const LabeledDataset& ds, const SplitSpec& spec);

void snapshot_weights(const WeightStore& store, const std::filesystem::path& path);
WeightStore read_weight_snapshot(const std::filesystem::path& path);

void write_noise_mask(const NoiseMask& mask, const std::filesystem::path& path);
NoiseMask read_noise_mask(const std::filesystem::path& path);

void write_scores(std::span<const double> scores, const std::filesystem::path& path);
std::vector<double> read_scores(const std::filesystem::path& path);

struct ManifestEntry {
  std::string name;
  std::filesystem::path path;
  std::string sha256;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
std::string sha256_file(const std::filesystem::path& path);
/// Throws FormatError when the file's digest differs from the manifest.
void verify_manifest_entry(const ManifestEntry& entry);

}  // namespace egrw
