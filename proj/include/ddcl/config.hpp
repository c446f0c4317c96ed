#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ddcl/data.hpp"
#include "ddcl/engine.hpp"
#include "ddcl/report.hpp"

namespace ddcl {

enum class DataSource { synthetic, csv };

struct DatasetConfig {
  DataSource source = DataSource::synthetic;
  // Synthetic: the benchmark of run seed s uses derive_seed(synthetic.seed, s).
  SyntheticSpec synthetic;
  std::filesystem::path train_csv;
  std::filesystem::path test_csv;
  std::size_t classes_per_round = 4;
  SchedulePolicy schedule = SchedulePolicy::split_similar;
};

struct OutputConfig {
  std::filesystem::path dir = "results";
  bool record_timing = false;
  bool checkpoints = false;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  MethodConfig method;
  std::vector<std::uint64_t> seeds{0};
  OutputConfig output;
};

// Parses an INI document ([section] / key = value / '#' or ';' comments).
// Relative paths resolve against `base_dir`. Throws ConfigError naming the
// offending "section.key".
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// Dataset for one run seed.
Dataset build_dataset(const DatasetConfig& cfg, std::uint64_t run_seed);

Json config_to_json(const ExperimentConfig& cfg);

}  // namespace ddcl
