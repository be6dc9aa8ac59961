#pragma once

// Experiment drivers behind the `egrw` subcommands.
//
// Report conventions (on top of the epoch,split,metric,value,group schema):
//   - config lines hold every effective key plus "experiment" (pca|classify)
//   - split "final" rows are the per-run results that `aggregate_reports`
//     reduces: classify emits (epochs-1, final, test_accuracy, acc, label),
//     pca emits (run, final, test_reconstruction_loss, loss, variant)
//   - pca also emits split "summary" rows at epoch -1 holding the mean and
//     sample std of each variant's loss over runs

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "egrw/config.hpp"
#include "egrw/dataset.hpp"
#include "egrw/report.hpp"
#include "egrw/weight_engine.hpp"

namespace egrw {

/// Configured root, else $EGRW_DATA_DIR, else "data".
std::filesystem::path resolve_data_root(const std::string& configured);

struct TrainTestData {
  LabeledDataset train;
  LabeledDataset test;
};

/// Loads <root>/<name>/{train,t10k}-{images-idx3,labels-idx1}-ubyte. When
/// `manifest` is given, every file used must be listed there with a matching
/// sha256.
TrainTestData load_idx_benchmark(const std::filesystem::path& root, const std::string& name,
                                 const std::optional<std::filesystem::path>& manifest);

/// Repetition i reseeds with seed + i, splits 90/10 (test-fraction), corrupts
/// the training part and runs every configured variant on it.
ExperimentReport run_pca_experiment(const Config& cfg);

/// One seeded run of reweighted training. If `final_weights` is given it
/// receives the final weight store.
ExperimentReport run_classification_experiment(const Config& cfg, WeightStore* final_weights = nullptr);

/// Rebuilds a Config from the config lines of a report.
Config config_from_report(const ExperimentReport& report, std::vector<ConfigKey> schema);

struct SummaryRow {
  std::string experiment;
  std::string dataset;
  std::string noise;
  std::string group;
  std::string metric;
  std::size_t n = 0;
  double mean = 0.0;
  /// Sample standard deviation; 0 when n == 1.
  double std = 0.0;
};

/// Groups "final" rows by (experiment, dataset, noise, group, metric) in
/// lexicographic order. Throws if a report lacks the experiment/dataset/noise
/// config keys.
std::vector<SummaryRow> aggregate_reports(const std::vector<ExperimentReport>& reports);
std::vector<SummaryRow> aggregate_report_files(const std::vector<std::filesystem::path>& paths);

/// CSV with a leading comment line stating the std convention; n=1 rows carry
/// flag "n=1".
std::string format_summary(const std::vector<SummaryRow>& rows);

}  // namespace egrw
