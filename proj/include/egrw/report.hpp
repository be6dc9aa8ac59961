#pragma once

// Experiment reports: per-epoch (or per-run) metric rows plus the effective
// configuration that produced them.
//
// CSV layout:
//   # egrw report v1
//   # config <key>=<value>        one line per effective config key, sorted
//   epoch,split,metric,value,group
//   <int>,<text>,<text>,<real>,<text>
//
// `split` is "train", "test", "final" (one value per run meant for
// aggregation) or "summary". Values are written in shortest round-trip form.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace egrw {

struct ReportRow {
  std::int64_t epoch = 0;
  std::string split;
  std::string metric;
  double value = 0.0;
  std::string group;

  bool operator==(const ReportRow&) const = default;
};

struct ExperimentReport {
  std::map<std::string, std::string> config;
  std::vector<ReportRow> rows;

  void add(std::int64_t epoch, std::string split, std::string metric, double value, std::string group);

  bool operator==(const ExperimentReport&) const = default;
};

inline constexpr const char* kReportHeader = "epoch,split,metric,value,group";

std::string format_report(const ExperimentReport& report);
ExperimentReport parse_report(const std::string& text);

void write_report(const ExperimentReport& report, const std::filesystem::path& path);
ExperimentReport read_report(const std::filesystem::path& path);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s, const std::string& what);

}  // namespace egrw
