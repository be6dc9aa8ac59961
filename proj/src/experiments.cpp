#include "egrw/experiments.hpp"

#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "egrw/data_io.hpp"
#include "egrw/noise_lab.hpp"
#include "egrw/pca.hpp"
#include "egrw/pseudo_loss.hpp"
#include "egrw/rng.hpp"
#include "egrw/trainer.hpp"

namespace fs = std::filesystem;

namespace egrw {

fs::path resolve_data_root(const std::string& configured) {
  if (!configured.empty()) return configured;
  if (const char* env = std::getenv("EGRW_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return "data";
}

namespace {

fs::path normalized(const fs::path& p) { return fs::weakly_canonical(fs::absolute(p)); }

void check_against_manifest(const std::vector<ManifestEntry>& entries, const fs::path& file) {
  const fs::path want = normalized(file);
  for (const auto& e : entries) {
    if (normalized(e.path) == want) {
      verify_manifest_entry(e);
      return;
    }
  }
  throw std::runtime_error("manifest has no entry for '" + file.string() + "'");
}

std::pair<std::size_t, std::size_t> parse_resize(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw std::invalid_argument("resize: expected HxW, got '" + text + "'");
  const double h = parse_double(text.substr(0, x), "resize height");
  const double w = parse_double(text.substr(x + 1), "resize width");
  if (!(h >= 1 && w >= 1) || h != std::floor(h) || w != std::floor(w)) {
    throw std::invalid_argument("resize: expected positive integers, got '" + text + "'");
  }
  return {static_cast<std::size_t>(h), static_cast<std::size_t>(w)};
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(' ');
    const auto b = item.find_last_not_of(' ');
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

NoiseSpec pca_noise_spec(const Config& cfg) {
  NoiseSpec spec = NoiseSpec::parse(cfg.get("noise"), cfg.get_double("noise.rate"));
  if (spec.kind == NoiseKind::label_flip) throw std::invalid_argument("pca: label noise does not apply");
  spec.beta_a = cfg.get_double("noise.beta-a");
  spec.beta_b = cfg.get_double("noise.beta-b");
  if (auto m = cfg.get_optional_double("noise.multiplier")) spec.multiplier = *m;
  if (auto s = cfg.get_optional_double("noise.sigma")) spec.fixed_sigma = *s;
  spec.validate();
  return spec;
}

ExperimentReport report_with_config(const Config& cfg, const std::string& experiment) {
  ExperimentReport report;
  report.config = cfg.effective();
  report.config["experiment"] = experiment;
  return report;
}

}  // namespace

TrainTestData load_idx_benchmark(const fs::path& root, const std::string& name,
                                 const std::optional<fs::path>& manifest) {
  const fs::path dir = root / name;
  const fs::path files[4] = {dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte",
                             dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte"};
  for (const auto& f : files) {
    if (!fs::exists(f)) throw std::runtime_error("dataset '" + name + "': missing file '" + f.string() + "'");
  }
  if (manifest) {
    const auto entries = read_manifest(*manifest);
    for (const auto& f : files) check_against_manifest(entries, f);
  }
  return {load_idx_dataset(files[0], files[1], 10), load_idx_dataset(files[2], files[3], 10)};
}

ExperimentReport run_pca_experiment(const Config& cfg) {
  const std::uint64_t seed = cfg.get_uint("seed");
  const auto repetitions = cfg.get_uint("repetitions");
  const double test_fraction = cfg.get_double("test-fraction");
  NoiseSpec noise = pca_noise_spec(cfg);
  // Synthetic points are not pixels; unless told otherwise, gaussian noise gets
  // a fixed sigma with noise norm about 5x the signal norm.
  if (cfg.get("data") == "synthetic" && noise.kind == NoiseKind::gaussian && !noise.fixed_sigma &&
      !cfg.get_optional_double("noise.multiplier")) {
    noise.fixed_sigma = 5.0 * cfg.get_double("synthetic.signal") *
                        std::sqrt(static_cast<double>(cfg.get_uint("synthetic.rank")) /
                                  static_cast<double>(cfg.get_uint("synthetic.d")));
  }

  std::vector<PcaVariant> variants;
  for (const auto& name : split_list(cfg.get("variant"))) variants.push_back(parse_pca_variant(name));
  if (variants.empty()) throw std::invalid_argument("pca: no variant configured");

  PcaRunConfig base;
  base.k = static_cast<Eigen::Index>(cfg.get_uint("k"));
  base.iterations = static_cast<int>(cfg.get_uint("iters"));
  base.schedule.eta0 = cfg.get_double("eg.eta0");
  base.schedule.alpha = cfg.get_double("eg.alpha");
  const double r = cfg.get_double("eg.r");
  const auto cap = cfg.get_optional_double("eg.cap");
  // Validate every variant before any work.
  std::vector<PcaRunConfig> run_cfgs;
  for (PcaVariant v : variants) {
    PcaRunConfig rc = base;
    rc.variant = v;
    rc.eg.r = v == PcaVariant::regularized_egr ? r : 1.0;
    if (v == PcaVariant::capped_egr) rc.eg.cap = cap;
    rc.validate();
    run_cfgs.push_back(rc);
  }

  LabeledDataset data;
  const std::string source = cfg.get("data");
  if (source == "synthetic") {
    data = synthetic_low_rank(cfg.get_uint("synthetic.n"), cfg.get_uint("synthetic.d"), cfg.get_uint("synthetic.rank"),
                              cfg.get_double("synthetic.signal"), cfg.get_double("synthetic.noise"), seed);
  } else {
    PgmDirOptions opts;
    if (!cfg.get("resize").empty()) opts.resize = parse_resize(cfg.get("resize"));
    data = read_pgm_dir(source, opts);
  }
  if (base.k > static_cast<Eigen::Index>(data.dim())) {
    throw std::invalid_argument("pca: k = " + std::to_string(base.k) + " exceeds the data dimension " +
                                std::to_string(data.dim()));
  }

  ExperimentReport report = report_with_config(cfg, "pca");
  std::map<std::string, std::vector<double>> losses;
  for (std::uint64_t run = 0; run < repetitions; ++run) {
    try {
      const std::uint64_t run_seed = seed + run;
      auto [train, test] = split_train_test(data, SplitSpec{test_fraction, run_seed});
      if (train.size() == 0 || test.size() == 0) throw std::invalid_argument("split left an empty train or test set");
      const NoiseMask mask = corrupt_dataset(train, noise, substream_seed(run_seed, 1));
      const auto epoch = static_cast<std::int64_t>(run);
      for (const auto& rc : run_cfgs) {
        const std::string name(to_string(rc.variant));
        const auto result = egr_pca(train.features, rc);
        const double loss = evaluate_subspace(result.subspace, test.features);
        report.add(epoch, "final", "test_reconstruction_loss", loss, name);
        losses[name].push_back(loss);

        double sum[2] = {0.0, 0.0};
        std::size_t cnt[2] = {0, 0};
        for (std::size_t i = 0; i < train.size(); ++i) {
          const int g = mask.noisy[i] ? 1 : 0;
          sum[g] += result.weights[i];
          ++cnt[g];
        }
        if (cnt[0] > 0) report.add(epoch, "train", "mean_weight_clean", sum[0] / static_cast<double>(cnt[0]), name);
        if (cnt[1] > 0) report.add(epoch, "train", "mean_weight_noisy", sum[1] / static_cast<double>(cnt[1]), name);
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("pca run " + std::to_string(run) + ": " + e.what());
    }
  }
  for (const auto& rc : run_cfgs) {
    const std::string name(to_string(rc.variant));
    const auto& v = losses[name];
    if (v.empty()) continue;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    report.add(-1, "summary", "test_reconstruction_loss_mean", mean, name);
    report.add(-1, "summary", "test_reconstruction_loss_std", sample_std(v, mean), name);
  }
  return report;
}

ExperimentReport run_classification_experiment(const Config& cfg, WeightStore* final_weights) {
  TrainConfig tc;
  tc.epochs = static_cast<int>(cfg.get_int("epochs"));
  tc.batch_size = cfg.get_uint("batch-size");
  tc.eta_theta = cfg.get_double("eta-theta");
  tc.momentum = cfg.get_double("momentum");
  tc.model = parse_model_kind(cfg.get("model"));
  tc.hidden = static_cast<Eigen::Index>(cfg.get_uint("hidden"));
  tc.schedule.peak = cfg.get_double("eg.peak");
  tc.schedule.warmup_epochs = cfg.get_int("eg.warmup-epochs");
  tc.schedule.decay_factor = cfg.get_double("eg.decay-factor");
  tc.schedule.decay_interval_epochs = cfg.get_int("eg.decay-interval");
  tc.eg.r = cfg.get_double("eg.r");
  tc.eg.cap = cfg.get_optional_double("eg.cap");
  tc.loss_source = parse_loss_source(cfg.get("loss-source"));
  tc.seed = cfg.get_uint("seed");
  tc.validate();
  const NoiseSpec noise = NoiseSpec::parse(cfg.get("noise"), cfg.get_double("noise.rate"));
  const bool standardize = cfg.get_bool("pseudo.standardize");

  const fs::path root = resolve_data_root(cfg.get("data-dir"));
  std::optional<fs::path> manifest;
  if (!cfg.get("manifest").empty()) {
    manifest = fs::path(cfg.get("manifest"));
  } else if (fs::exists(root / "manifest.jsonl")) {
    manifest = root / "manifest.jsonl";
  }
  const std::string dataset = cfg.get("dataset");
  if (dataset != "mnist" && dataset != "fashion") throw std::invalid_argument("classify: unknown dataset '" + dataset + "'");
  auto data = load_idx_benchmark(root, dataset, manifest);

  if (const auto limit = cfg.get_uint("train-limit"); limit > 0 && limit < data.train.size()) {
    std::vector<std::size_t> rows(limit);
    for (std::size_t i = 0; i < limit; ++i) rows[i] = i;
    data.train = data.train.subset(rows);
  }
  corrupt_dataset(data.train, noise, substream_seed(tc.seed, 3));
  if (tc.loss_source == LossSource::pseudo_loss) {
    pseudo_loss_column(data.train, QualityScorer::laplacian_variance, standardize);
  }

  auto result = train(data.train, tc, &data.test);
  ExperimentReport report = report_with_config(cfg, "classify");
  report.rows = std::move(result.report.rows);
  std::string label = cfg.get("label");
  if (label.empty()) label = tc.schedule.peak > 0.0 ? "eg" : "baseline";
  report.add(tc.epochs - 1, "final", "test_accuracy", evaluate(result.model, data.test), label);
  if (final_weights != nullptr) *final_weights = std::move(result.weights);
  return report;
}

Config config_from_report(const ExperimentReport& report, std::vector<ConfigKey> schema) {
  Config cfg(std::move(schema));
  for (const auto& [key, value] : report.config) {
    if (key == "experiment") continue;
    cfg.set(key, value);
  }
  return cfg;
}

std::vector<SummaryRow> aggregate_reports(const std::vector<ExperimentReport>& reports) {
  using Key = std::tuple<std::string, std::string, std::string, std::string, std::string>;
  std::map<Key, std::vector<double>> groups;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& cfg = reports[i].config;
    auto need = [&](const std::string& key) -> const std::string& {
      auto it = cfg.find(key);
      if (it == cfg.end()) {
        throw std::invalid_argument("report " + std::to_string(i) + ": schema mismatch, missing config key '" + key + "'");
      }
      return it->second;
    };
    const std::string& experiment = need("experiment");
    std::string dataset;
    if (experiment == "pca") {
      dataset = need("data");
    } else if (experiment == "classify") {
      dataset = need("dataset");
    } else {
      throw std::invalid_argument("report " + std::to_string(i) + ": unknown experiment '" + experiment + "'");
    }
    const std::string& noise = need("noise");
    for (const auto& row : reports[i].rows) {
      if (row.split != "final") continue;
      groups[{experiment, dataset, noise, row.group, row.metric}].push_back(row.value);
    }
  }
  std::vector<SummaryRow> out;
  for (const auto& [key, values] : groups) {
    SummaryRow s;
    std::tie(s.experiment, s.dataset, s.noise, s.group, s.metric) = key;
    s.n = values.size();
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(s.n);
    s.std = sample_std(values, s.mean);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SummaryRow> aggregate_report_files(const std::vector<fs::path>& paths) {
  std::vector<ExperimentReport> reports;
  for (const auto& p : paths) reports.push_back(read_report(p));
  try {
    return aggregate_reports(reports);
  } catch (const std::invalid_argument& e) {
    // Report indices map back to the given paths.
    std::string msg = e.what();
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const std::string tag = "report " + std::to_string(i) + ":";
      if (msg.rfind(tag, 0) == 0) {
        msg = paths[i].string() + ":" + msg.substr(tag.size());
        break;
      }
    }
    throw std::invalid_argument(msg);
  }
}

std::string format_summary(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  os << "# std is the sample standard deviation over runs (n-1 denominator); n=1 rows report 0\n";
  os << "experiment,dataset,noise,group,metric,n,mean,std,flag\n";
  for (const auto& r : rows) {
    os << r.experiment << ',' << r.dataset << ',' << r.noise << ',' << r.group << ',' << r.metric << ',' << r.n << ','
       << format_double(r.mean) << ',' << format_double(r.std) << ',' << (r.n == 1 ? "n=1" : "") << '\n';
  }
  return os.str();
}

}  // namespace egrw
