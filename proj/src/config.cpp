#include "egrw/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "egrw/report.hpp"

namespace egrw {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

Config::Config(std::vector<ConfigKey> schema) : schema_(std::move(schema)) {
  for (const auto& key : schema_) {
    if (!values_.emplace(key.name, key.default_value).second) {
      throw std::logic_error("config schema: duplicate key '" + key.name + "'");
    }
  }
}

bool Config::has_key(const std::string& key) const { return values_.count(key) != 0; }

void Config::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("config: unknown key '" + key + "'");
  if (value.find('\n') != std::string::npos) throw std::invalid_argument("config: value of '" + key + "' spans lines");
  it->second = value;
}

void Config::merge_text(const std::string& text, const std::string& source) {
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw std::invalid_argument(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (!has_key(key)) throw std::invalid_argument(where + ": unknown key '" + key + "'");
    set(key, trim(line.substr(eq + 1)));
  }
}

void Config::merge_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  merge_text(ss.str(), path);
}

const std::string& Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::logic_error("config: no key '" + key + "' in schema");
  return it->second;
}

double Config::get_double(const std::string& key) const {
  return parse_double(get(key), "config key '" + key + "'");
}

std::int64_t Config::get_int(const std::string& key) const {
  const std::string& s = get(key);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("config key '" + key + "': expected an integer, got '" + s + "'");
  }
  return v;
}

std::uint64_t Config::get_uint(const std::string& key) const {
  const std::string& s = get(key);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("config key '" + key + "': expected a nonnegative integer, got '" + s + "'");
  }
  return v;
}

bool Config::get_bool(const std::string& key) const {
  const std::string& s = get(key);
  if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "off" || s == "no") return false;
  throw std::invalid_argument("config key '" + key + "': expected a boolean, got '" + s + "'");
}

std::optional<double> Config::get_optional_double(const std::string& key) const {
  if (get(key).empty()) return std::nullopt;
  return get_double(key);
}

std::vector<ConfigKey> pca_config_schema() {
  return {
      {"data", "synthetic", "PGM directory (one subdirectory per class) or 'synthetic'"},
      {"resize", "", "box-average images to HxW, e.g. 64x64; empty keeps the native size"},
      {"noise", "gaussian", "gaussian | occlusion | blur | none"},
      {"noise.rate", "0.5", "fraction of training examples corrupted"},
      {"noise.beta-a", "2", "severity Beta(a, b) shape a"},
      {"noise.beta-b", "5", "severity Beta(a, b) shape b"},
      {"noise.multiplier", "", "severity multiplier; empty = 1 for gaussian, 10 for blur"},
      {"noise.sigma", "", "fixed gaussian/blur sigma instead of a Beta draw; synthetic gaussian defaults to 5*signal*sqrt(rank/d)"},
      {"variant", "vanilla,egr,regularized_egr", "comma list of vanilla, egr, capped_egr, regularized_egr"},
      {"k", "25", "subspace dimension"},
      {"iters", "100", "alternating EG iterations"},
      {"eg.eta0", "0.1", "initial EG rate of eta0 / t^alpha"},
      {"eg.alpha", "0.8", "decay exponent of eta0 / t^alpha"},
      {"eg.r", "0.5", "regularizer exponent for regularized_egr"},
      {"eg.cap", "", "absolute per-weight cap for capped_egr"},
      {"test-fraction", "0.1", "held-out clean test fraction"},
      {"repetitions", "1", "runs; run i uses seed + i"},
      {"seed", "0", "base seed"},
      {"synthetic.n", "150", "synthetic: number of points"},
      {"synthetic.d", "10", "synthetic: ambient dimension"},
      {"synthetic.rank", "2", "synthetic: true subspace rank"},
      {"synthetic.signal", "3", "synthetic: std of the in-subspace coordinates"},
      {"synthetic.noise", "0", "synthetic: std of isotropic noise on every point"},
      {"out", "report.csv", "report path"},
  };
}

std::vector<ConfigKey> classify_config_schema() {
  return {
      {"dataset", "mnist", "mnist | fashion"},
      {"data-dir", "", "dataset root; empty uses $EGRW_DATA_DIR, then ./data"},
      {"manifest", "", "checksum manifest; empty uses <data-dir>/manifest.jsonl when present"},
      {"noise", "label:0.5", "label:<rate> | blur:<sigma> | none"},
      {"noise.rate", "0.4", "fraction of training images blurred for blur noise"},
      {"model", "softmax", "softmax | mlp"},
      {"hidden", "128", "hidden width of the mlp"},
      {"loss-source", "training", "training | laplacian"},
      {"pseudo.standardize", "true", "standardize the pseudo-loss column over the training set"},
      {"epochs", "30", "training epochs"},
      {"batch-size", "1000", "mini-batch size"},
      {"eta-theta", "0.1", "model learning rate"},
      {"momentum", "0.9", "heavy-ball momentum"},
      {"eg.peak", "0.1", "peak EG rate after warm-up; 0 disables reweighting"},
      {"eg.warmup-epochs", "20", "linear warm-up length in epochs"},
      {"eg.decay-factor", "0.95", "multiplicative decay per interval"},
      {"eg.decay-interval", "1", "epochs per decay step"},
      {"eg.r", "0.98", "regularizer exponent"},
      {"eg.cap", "", "absolute cap on batch-normalized weights"},
      {"train-limit", "0", "use only the first N training examples; 0 = all"},
      {"seed", "0", "run seed"},
      {"label", "", "group label in the report; empty = eg or baseline"},
      {"out", "report.csv", "report path"},
      {"weights-out", "", "JSON-lines snapshot of the final log-weights"},
  };
}

}  // namespace egrw
