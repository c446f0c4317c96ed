#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ddcl/config.hpp"
#include "ddcl/report.hpp"

namespace ddcl {

// Process exit codes of the harness commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

// One method variant to execute for every configured seed.
struct Variant {
  std::string label;
  MethodConfig method;
};

// Runs every (variant, seed) pair; the result order is variant-major, seed-minor
// regardless of how the work was scheduled.
std::vector<RunRecord> run_variants(const ExperimentConfig& cfg, const std::vector<Variant>& variants);

// `run <config>`: results.json and curves.csv in the output directory.
int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);

// `compare <config> --methods a,b`: also summary.csv with per-round means over seeds.
int cmd_compare(const std::filesystem::path& config_path, const std::vector<std::string>& methods, std::ostream& out,
                std::ostream& err);

// `ablate <config> --m 0,1,2`: sweeps m_similar for the expert method plus the
// old-distillation baseline "B"; writes ablation.csv and ablation_summary.csv.
int cmd_ablate(const std::filesystem::path& config_path, const std::vector<std::size_t>& m_values, std::ostream& out,
               std::ostream& err);

}  // namespace ddcl
