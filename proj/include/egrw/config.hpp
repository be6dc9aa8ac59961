#pragma once

// Flat key = value experiment configuration.
//
// File syntax: one "key = value" per line, '#' starts a comment, blank lines
// ignored. Unknown keys are rejected. Precedence: schema defaults, then the
// config file, then command-line flags of the same name.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace egrw {

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

class Config {
 public:
  explicit Config(std::vector<ConfigKey> schema);

  const std::vector<ConfigKey>& schema() const { return schema_; }
  bool has_key(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  /// Applies every "key = value" line of `text`; `source` names it in errors.
  void merge_text(const std::string& text, const std::string& source);
  void merge_file(const std::string& path);

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  /// Empty value means "not set".
  std::optional<double> get_optional_double(const std::string& key) const;

  /// Every key with its effective value.
  const std::map<std::string, std::string>& effective() const { return values_; }

  bool operator==(const Config& other) const { return values_ == other.values_; }

 private:
  std::vector<ConfigKey> schema_;
  std::map<std::string, std::string> values_;
};

/// Keys of `egrw pca`.
std::vector<ConfigKey> pca_config_schema();
/// Keys of `egrw classify`.
std::vector<ConfigKey> classify_config_schema();

}  // namespace egrw
