// egrw: experiment harness for exponentiated-gradient example reweighting.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "egrw/config.hpp"
#include "egrw/data_io.hpp"
#include "egrw/experiments.hpp"
#include "egrw/noise_lab.hpp"
#include "egrw/pseudo_loss.hpp"
#include "egrw/report.hpp"

namespace fs = std::filesystem;
using namespace egrw;

namespace {

// One string option per config key; a flag given on the command line wins
// over the config file.
struct KeyedCommand {
  CLI::App* app = nullptr;
  std::vector<ConfigKey> schema;
  std::string config_path;
  std::map<std::string, std::string> flags;

  KeyedCommand(CLI::App& parent, const std::string& name, const std::string& help, std::vector<ConfigKey> keys)
      : app(parent.add_subcommand(name, help)), schema(std::move(keys)) {
    app->add_option("--config", config_path, "key = value config file");
    for (const auto& key : schema) {
      app->add_option("--" + key.name, flags[key.name], key.help + " [default: " + key.default_value + "]");
    }
  }

  Config resolve() const {
    Config cfg(schema);
    if (!config_path.empty()) cfg.merge_file(config_path);
    for (const auto& key : schema) {
      if (app->count("--" + key.name) > 0) cfg.set(key.name, flags.at(key.name));
    }
    return cfg;
  }
};

LabeledDataset load_any(const std::string& data, const std::string& labels) {
  if (fs::is_directory(data)) return read_pgm_dir(data);
  std::optional<fs::path> lab;
  if (!labels.empty()) lab = labels;
  return load_idx_dataset(data, lab);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exponentiated-gradient example reweighting experiments"};
  app.require_subcommand(1);

  KeyedCommand pca(app, "pca", "robust PCA experiment over repetitions", pca_config_schema());
  KeyedCommand classify(app, "classify", "noisy-label / blurred-image classification run", classify_config_schema());

  auto* inject = app.add_subcommand("inject-noise", "corrupt a dataset and write it with its noise mask");
  std::string inj_data, inj_labels, inj_kind = "gaussian", inj_out = "noisy";
  double inj_rate = 0.5;
  std::uint64_t inj_seed = 0;
  std::optional<double> inj_sigma, inj_mult;
  inject->add_option("--data", inj_data, "PGM directory or IDX image file")->required();
  inject->add_option("--labels", inj_labels, "IDX label file");
  inject->add_option("--kind", inj_kind, "label | gaussian | random | occlusion | blur | none");
  inject->add_option("--rate", inj_rate, "fraction of examples corrupted");
  inject->add_option("--seed", inj_seed, "seed");
  inject->add_option("--sigma", inj_sigma, "fixed gaussian/blur sigma");
  inject->add_option("--multiplier", inj_mult, "severity multiplier on the Beta(2,5) draw");
  inject->add_option("--out-dir", inj_out, "output directory");

  auto* scorecmd = app.add_subcommand("score", "per-image quality scores");
  std::string sc_scorer = "laplacian", sc_data, sc_out = "scores.csv";
  scorecmd->add_option("--scorer", sc_scorer, "laplacian");
  scorecmd->add_option("--data", sc_data, "PGM directory or IDX image file")->required();
  scorecmd->add_option("--out", sc_out, "CSV output (id,score)");

  auto* reportcmd = app.add_subcommand("report", "aggregate final rows of reports into mean and std");
  std::vector<std::string> rp_paths;
  std::string rp_out;
  reportcmd->add_option("reports", rp_paths, "report CSV files")->required();
  reportcmd->add_option("--out", rp_out, "summary CSV; stdout when omitted");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*pca.app) {
      const Config cfg = pca.resolve();
      const auto report = run_pca_experiment(cfg);
      write_report(report, cfg.get("out"));
      for (const auto& row : report.rows) {
        if (row.split == "summary") std::cout << row.group << ' ' << row.metric << ' ' << format_double(row.value) << '\n';
      }
    } else if (*classify.app) {
      const Config cfg = classify.resolve();
      WeightStore weights(0);
      const auto report = run_classification_experiment(cfg, &weights);
      write_report(report, cfg.get("out"));
      if (!cfg.get("weights-out").empty()) snapshot_weights(weights, cfg.get("weights-out"));
      for (const auto& row : report.rows) {
        if (row.split == "final") std::cout << row.group << ' ' << row.metric << ' ' << format_double(row.value) << '\n';
      }
    } else if (*inject) {
      LabeledDataset ds = load_any(inj_data, inj_labels);
      NoiseSpec spec = NoiseSpec::parse(inj_kind, inj_rate);
      if (inj_sigma) spec.fixed_sigma = inj_sigma;
      if (inj_mult) spec.multiplier = *inj_mult;
      spec.validate();
      const NoiseMask mask = corrupt_dataset(ds, spec, inj_seed);
      fs::create_directories(inj_out);
      write_idx_images(fs::path(inj_out) / "images.idx", ds);
      if (ds.has_labels()) write_idx_labels(fs::path(inj_out) / "labels.idx", ds.labels);
      write_noise_mask(mask, fs::path(inj_out) / "mask.jsonl");
      std::cout << mask.count() << " of " << ds.size() << " examples corrupted\n";
    } else if (*scorecmd) {
      const QualityScorer scorer = parse_scorer(sc_scorer);
      const LabeledDataset ds = load_any(sc_data, "");
      if (!ds.is_image()) throw std::invalid_argument("score: data has no image shape");
      std::vector<double> scores(ds.size());
      for (std::size_t i = 0; i < ds.size(); ++i) scores[i] = score(scorer, ds.image(i));
      write_scores(scores, sc_out);
    } else if (*reportcmd) {
      std::vector<fs::path> paths(rp_paths.begin(), rp_paths.end());
      const std::string summary = format_summary(aggregate_report_files(paths));
      if (rp_out.empty()) {
        std::cout << summary;
      } else {
        std::ofstream out(rp_out);
        if (!out) throw std::runtime_error("cannot write '" + rp_out + "'");
        out << summary;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "egrw: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
