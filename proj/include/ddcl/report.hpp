#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "ddcl/memory.hpp"
#include "ddcl/metrics.hpp"

namespace ddcl {

using Json = nlohmann::ordered_json;

// "%.17g": every real written by the harness goes through this.
std::string format_real(double v);

// Deterministic JSON text: two-space indent, keys in insertion order, reals via
// format_real, arrays of scalars kept on one line.
std::string dump_json(const Json& value);

// One run of one method variant on one seed.
struct RunRecord {
  std::string label;  // method name, or ablation variant ("B", "m0", ...)
  std::string method;
  std::size_t m_similar = 0;
  std::uint64_t seed = 0;
  std::vector<RoundReport> rounds;
};

Json round_to_json(const RunRecord& run, const RoundReport& round, bool record_timing);
Json memory_to_json(const ExemplarMemory& memory);
ExemplarMemory memory_from_json(const Json& value);

// curves.csv: round,method,seed,mean_accuracy,confusion_errors,forgetting_errors
void write_curves_csv(const std::filesystem::path& path, std::span<const RunRecord> runs);

// Writes `text` to `path`, replacing any previous content.
void write_text(const std::filesystem::path& path, const std::string& text);

// Mean over rounds of the per-round mean accuracy.
double average_over_rounds(const RunRecord& run);

}  // namespace ddcl
