#pragma once

// Registry of reproducible experiments. Each run writes one CSV with a fixed
// schema (and an SVG chart for scans) and reports named checks.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace jumpvar {

struct ExperimentConfig {
  std::string experiment;
  /// {"name": ..., params...}; empty object selects the experiment default.
  nlohmann::json model = nlohmann::json::object();
  /// Function spec, e.g. "values:1,-1", "power:0.75", "identity"; empty for default.
  std::string function;
  std::optional<std::size_t> n;
  std::optional<std::size_t> replicates;
  std::uint64_t seed = 42;
  std::filesystem::path out_dir = "out";

  /// Throws InvalidConfig with the offending field named.
  static ExperimentConfig from_json(const nlohmann::json& doc);
  static ExperimentConfig from_file(const std::filesystem::path& path);
};

struct CsvRow {
  std::string experiment;
  std::string model;
  std::string function;
  std::size_t n = 0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::string metric;
  double value = 0.0;
  std::optional<double> stderr;
  std::optional<double> oracle_value;
  std::string check_name;
  std::optional<bool> check_passed;
};

struct CheckSummary {
  std::string name;
  std::string anchor;
  std::size_t passed = 0;
  std::size_t total = 0;
  bool ok() const { return passed == total; }
};

struct RunReport {
  std::string experiment;
  std::size_t n = 0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::vector<CsvRow> rows;
  std::vector<CheckSummary> checks;
  /// Monotone-growth scans: estimate vs n per series, for the chart.
  struct Series {
    std::string label;
    std::vector<std::size_t> n;
    std::vector<double> value;
  };
  std::vector<Series> series;
  double seconds = 0.0;
  bool all_passed() const;
};

struct ExperimentInfo {
  std::string name;
  std::string anchor;
  std::string description;
  std::size_t default_n = 0;
  std::size_t default_replicates = 1;
};

const std::vector<ExperimentInfo>& list_experiments();

/// Runs the experiment without touching the filesystem.
RunReport run_experiment(const ExperimentConfig& config);
/// Runs and writes <out>/<experiment>.csv (and .svg when there are series).
RunReport run_and_write(const ExperimentConfig& config);

void write_csv(const RunReport& report, std::ostream& os);
void write_svg(const RunReport& report, std::ostream& os);

}  // namespace jumpvar
