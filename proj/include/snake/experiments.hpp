#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "snake/config.hpp"
#include "snake/manifest.hpp"

namespace snake {

struct RunOptions {
  std::uint64_t seed = 1;
  int workers = 0;  // 0 keeps the OpenMP default
  bool deterministic = true;
  std::filesystem::path out_dir = "out";
  bool write_files = true;
};

struct ExperimentResult {
  std::vector<CriterionResult> criteria;
  std::map<std::string, double> metrics;
  std::vector<std::string> files;  // relative to out_dir

  bool passed() const;
  void check(const std::string& name, bool pass, const std::string& detail = {});
};

const std::vector<std::string>& experiment_names();
// Config keys accepted by an experiment; throws listing valid names for unknown ones.
const std::set<std::string>& experiment_keys(const std::string& name);

// Runs one experiment; writes CSVs under out_dir when opts.write_files.
ExperimentResult run_experiment(const std::string& name, const Config& cfg, const RunOptions& opts);

// Runs, writes CSVs and manifest.txt into out_dir, and returns the manifest.
RunManifest run(const std::string& name, const Config& cfg, const RunOptions& opts);
// Writes metrics.csv and manifest.txt for a result produced by run_experiment.
RunManifest record(const std::string& name, const Config& cfg, const RunOptions& opts, const ExperimentResult& res,
                   double wall_seconds);

// CSV with a header row; numbers are written with 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  CsvWriter& cell(const std::string& s);
  CsvWriter& cell(double v);
  void end_row();

 private:
  std::ofstream out_;
  std::size_t columns_ = 0;
  std::size_t filled_ = 0;
};

}  // namespace snake
