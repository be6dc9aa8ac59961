#include "egrw/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace egrw {

void ExperimentReport::add(std::int64_t epoch, std::string split, std::string metric, double value,
                           std::string group) {
  rows.push_back({epoch, std::move(split), std::move(metric), value, std::move(group)});
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

double parse_double(const std::string& s, const std::string& what) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument(what + ": cannot parse number '" + s + "'");
  }
  return v;
}

namespace {

void check_field(const std::string& s, const char* what) {
  if (s.find_first_of(",\n\r") != std::string::npos) {
    throw std::invalid_argument(std::string("report: ") + what + " '" + s + "' contains a separator");
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string format_report(const ExperimentReport& report) {
  std::ostringstream os;
  os << "# egrw report v1\n";
  for (const auto& [key, value] : report.config) {
    if (key.find_first_of("=\n") != std::string::npos || value.find('\n') != std::string::npos) {
      throw std::invalid_argument("report: config entry '" + key + "' cannot be serialized");
    }
    os << "# config " << key << '=' << value << '\n';
  }
  os << kReportHeader << '\n';
  for (const auto& row : report.rows) {
    check_field(row.split, "split");
    check_field(row.metric, "metric");
    check_field(row.group, "group");
    os << row.epoch << ',' << row.split << ',' << row.metric << ',' << format_double(row.value) << ','
       << row.group << '\n';
  }
  return os.str();
}

ExperimentReport parse_report(const std::string& text) {
  ExperimentReport report;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = "report line " + std::to_string(line_no);
    if (line[0] == '#') {
      static const std::string kConfig = "# config ";
      if (line.rfind(kConfig, 0) == 0) {
        const std::string entry = line.substr(kConfig.size());
        const auto eq = entry.find('=');
        if (eq == std::string::npos) throw std::invalid_argument(where + ": config entry without '='");
        report.config[entry.substr(0, eq)] = entry.substr(eq + 1);
      }
      continue;
    }
    if (!header_seen) {
      if (line != kReportHeader) throw std::invalid_argument(where + ": expected header '" + kReportHeader + "'");
      header_seen = true;
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != 5) throw std::invalid_argument(where + ": expected 5 fields");
    ReportRow row;
    std::int64_t epoch = 0;
    auto [ptr, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), epoch);
    if (ec != std::errc() || ptr != fields[0].data() + fields[0].size()) {
      throw std::invalid_argument(where + ": bad epoch '" + fields[0] + "'");
    }
    row.epoch = epoch;
    row.split = fields[1];
    row.metric = fields[2];
    row.value = parse_double(fields[3], where + " value");
    row.group = fields[4];
    report.rows.push_back(std::move(row));
  }
  if (!header_seen) throw std::invalid_argument("report: missing header line");
  return report;
}

void write_report(const ExperimentReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << format_report(report);
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

ExperimentReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_report(ss.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

}  // namespace egrw
