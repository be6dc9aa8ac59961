#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "egrw/data_io.hpp"
#include "egrw/report.hpp"
#include "egrw/rng.hpp"

using namespace egrw;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("egrw_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::uint8_t> pgm(const std::string& header, const std::vector<std::uint8_t>& px) {
  std::vector<std::uint8_t> b(header.begin(), header.end());
  b.insert(b.end(), px.begin(), px.end());
  return b;
}

}  // namespace

TEST_CASE("IDX worked values") {
  const std::vector<std::uint8_t> labels{0, 0, 8, 1, 0, 0, 0, 3, 7, 2, 1};
  const auto l = parse_idx(labels);
  CHECK(l.dims == std::vector<std::size_t>{3});
  CHECK(l.values == std::vector<double>{7, 2, 1});

  const std::vector<std::uint8_t> images{0, 0, 8, 3, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 2, 0, 255, 0, 255};
  const auto im = parse_idx(images);
  CHECK(im.dims == std::vector<std::size_t>{1, 2, 2});
  CHECK(im.values == std::vector<double>{0, 1, 0, 1});

  const std::vector<std::uint8_t> wrong{0, 0, 8, 2, 0, 0, 0, 1, 0, 0, 0, 1, 5};
  CHECK_THROWS_WITH_AS(parse_idx(wrong), doctest::Contains("unsupported IDX type"), FormatError);

  std::vector<std::uint8_t> short_payload = labels;
  short_payload.pop_back();
  CHECK_THROWS_AS(parse_idx(short_payload), FormatError);
}

TEST_CASE("IDX write/read round trip") {
  const fs::path dir = scratch("idx");
  LabeledDataset ds;
  ds.image_height = 2;
  ds.image_width = 3;
  ds.num_classes = 4;
  ds.features.resize(2, 6);
  ds.features << 0.0, 0.25, -1.5, 2.0, 1.0, 0.125, 0.5, 0.5, 0.5, 0.5, 0.5, 3.75;
  ds.labels = {3, 1};
  write_idx_images(dir / "im.idx", ds);
  write_idx_labels(dir / "lab.idx", ds.labels);
  const auto back = load_idx_dataset(dir / "im.idx", dir / "lab.idx", 4);
  CHECK(back.features == ds.features);
  CHECK(back.labels == ds.labels);
  CHECK(back.image_height == 2);
  CHECK(back.image_width == 3);
}

TEST_CASE("PGM worked values") {
  const auto img = parse_pgm(pgm("P5 2 1 255\n", {0, 255}));
  CHECK(img.height == 1);
  CHECK(img.width == 2);
  CHECK(img.pixels == std::vector<double>{0.0, 1.0});

  const auto commented = parse_pgm(pgm("P5\n# foo\n2 # bar\n1\n255\n", {0, 255}));
  CHECK(commented.pixels == std::vector<double>{0.0, 1.0});

  CHECK_THROWS_AS(parse_pgm(pgm("P6 2 1 255\n", {0, 255, 0, 0, 0, 0})), FormatError);
  CHECK_THROWS_WITH_AS(parse_pgm(pgm("P5 2 2 255\n", {0, 255})), doctest::Contains("offset"), FormatError);
}

TEST_CASE("PGM directories") {
  const fs::path dir = scratch("pgm");
  fs::create_directories(dir / "s2");
  fs::create_directories(dir / "s1");
  write_file(dir / "s1" / "1.pgm", pgm("P5 2 2 255\n", {0, 51, 102, 255}));
  write_file(dir / "s1" / "2.pgm", pgm("P5 2 2 255\n", {255, 255, 0, 0}));
  write_file(dir / "s2" / "1.pgm", pgm("P5 2 2 255\n", {10, 20, 30, 40}));
  const auto ds = read_pgm_dir(dir);
  CHECK(ds.size() == 3);
  CHECK(ds.labels == std::vector<int>{0, 0, 1});
  CHECK(ds.num_classes == 2);
  CHECK(ds.features(0, 1) == doctest::Approx(0.2));

  PgmDirOptions opts;
  opts.resize = std::make_pair(std::size_t{1}, std::size_t{1});
  const auto small = read_pgm_dir(dir, opts);
  CHECK(small.dim() == 1);
  CHECK(small.features(0, 0) == doctest::Approx((0 + 51 + 102 + 255) / 4.0 / 255.0));

  write_file(dir / "s2" / "2.pgm", pgm("P5 3 1 255\n", {1, 2, 3}));
  CHECK_THROWS_AS(read_pgm_dir(dir), FormatError);

  const fs::path flat = scratch("pgm_flat");
  write_file(flat / "a.pgm", pgm("P5 1 1 255\n", {9}));
  write_file(flat / "b.pgm", pgm("P5 1 1 255\n", {8}));
  const auto unl = read_pgm_dir(flat);
  CHECK(unl.size() == 2);
  CHECK_FALSE(unl.has_labels());
}

TEST_CASE("train/test split") {
  LabeledDataset ds;
  ds.features.resize(10, 1);
  for (Eigen::Index i = 0; i < 10; ++i) ds.features(i, 0) = static_cast<double>(i);
  auto [train, test] = split_train_test(ds, {0.1, 3});
  CHECK(train.size() == 9);
  CHECK(test.size() == 1);
  std::vector<double> seen;
  for (Eigen::Index i = 0; i < 9; ++i) seen.push_back(train.features(i, 0));
  seen.push_back(test.features(0, 0));
  std::sort(seen.begin(), seen.end());
  for (int i = 0; i < 10; ++i) CHECK(seen[static_cast<std::size_t>(i)] == i);

  auto [t2, s2] = split_train_test(ds, {0.1, 3});
  CHECK(t2.features == train.features);

  LabeledDataset big;
  big.features.resize(100, 1);
  for (Eigen::Index i = 0; i < 100; ++i) big.features(i, 0) = static_cast<double>(i);
  auto a = split_train_test(big, {0.1, 1});
  auto b = split_train_test(big, {0.1, 2});
  CHECK(a.first.features != b.first.features);
  CHECK_THROWS(split_train_test(big, {0.0, 1}));
}

TEST_CASE("reports round trip") {
  ExperimentReport empty;
  CHECK(format_report(empty).find(kReportHeader) != std::string::npos);
  CHECK(parse_report(format_report(empty)) == empty);

  ExperimentReport r;
  r.config["seed"] = "3";
  r.config["variant"] = "vanilla,egr";
  r.add(0, "test", "accuracy", 0.1 + 0.2, "all");
  r.add(-1, "summary", "loss_mean", 1e-300, "egr");
  r.add(7, "train", "mean_weight", -0.0, "noisy");
  const fs::path dir = scratch("report");
  write_report(r, dir / "r.csv");
  CHECK(read_report(dir / "r.csv") == r);
  CHECK_THROWS_WITH(read_report(dir / "missing.csv"), doctest::Contains("missing.csv"));
}

TEST_CASE("weight snapshots, masks and scores") {
  const fs::path dir = scratch("jsonl");
  WeightStore fresh(3);
  snapshot_weights(fresh, dir / "w.jsonl");
  std::ifstream in(dir / "w.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    CHECK(line.find("\"log_weight\":0.0") != std::string::npos);
    ++lines;
  }
  CHECK(lines == 3);

  WeightStore w(3);
  std::vector<double> lw{-1.25, 0.1 + 0.2, -700.0};
  w.assign(lw);
  snapshot_weights(w, dir / "w2.jsonl");
  const auto back = read_weight_snapshot(dir / "w2.jsonl");
  CHECK(std::vector<double>(back.log_weights().begin(), back.log_weights().end()) == lw);

  NoiseMask mask{{true, false, true}, {0.3, 0.0, 1.0}};
  write_noise_mask(mask, dir / "m.jsonl");
  const auto m2 = read_noise_mask(dir / "m.jsonl");
  CHECK(m2.noisy == mask.noisy);
  CHECK(m2.severity == mask.severity);

  std::vector<double> scores{-2.5, 0.0, 1e-9};
  write_scores(scores, dir / "s.csv");
  CHECK(read_scores(dir / "s.csv") == scores);

  std::ofstream(dir / "bad.jsonl") << "{\"id\": 0, \"log_weight\": 0}\n{\"id\": 5, \"log_weight\": 1}\n";
  CHECK_THROWS_WITH_AS(read_weight_snapshot(dir / "bad.jsonl"), doctest::Contains("id"), FormatError);
}

TEST_CASE("manifest checksums") {
  const fs::path dir = scratch("manifest");
  std::ofstream(dir / "abc.txt") << "abc";
  CHECK(sha256_file(dir / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  std::ofstream(dir / "manifest.jsonl")
      << "{\"name\": \"abc\", \"path\": \"abc.txt\", \"sha256\": "
         "\"ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad\"}\n"
      << "{\"name\": \"bad\", \"path\": \"abc.txt\", \"sha256\": \"00\"}\n";
  const auto entries = read_manifest(dir / "manifest.jsonl");
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].path == dir / "abc.txt");
  CHECK_NOTHROW(verify_manifest_entry(entries[0]));
  CHECK_THROWS_AS(verify_manifest_entry(entries[1]), FormatError);
}

TEST_CASE("readers survive random bytes") {
  Rng rng(1234);
  const fs::path dir = scratch("fuzz");
  for (int inst = 0; inst < 3000; ++inst) {
    std::vector<std::uint8_t> bytes(rng.below(64));
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.below(256));
    // Bias some inputs toward valid prefixes so the parsers get past the magic.
    if (inst % 3 == 0 && bytes.size() >= 4) {
      bytes[0] = 0;
      bytes[1] = 0;
      bytes[2] = inst % 2 ? 0x08 : 0x0D;
      bytes[3] = static_cast<std::uint8_t>(1 + rng.below(3));
    }
    if (inst % 3 == 1 && bytes.size() >= 2) {
      bytes[0] = 'P';
      bytes[1] = '5';
    }
    try {
      parse_idx(bytes);
    } catch (const FormatError&) {
    }
    try {
      parse_pgm(bytes);
    } catch (const FormatError&) {
    }
    if (inst % 10 == 0) {
      write_file(dir / "f", bytes);
      try {
        read_weight_snapshot(dir / "f");
      } catch (const FormatError&) {
      }
      try {
        read_noise_mask(dir / "f");
      } catch (const FormatError&) {
      }
      try {
        read_scores(dir / "f");
      } catch (const FormatError&) {
      }
      try {
        read_report(dir / "f");
      } catch (const std::invalid_argument&) {
      }
    }
  }
  CHECK(true);
}
