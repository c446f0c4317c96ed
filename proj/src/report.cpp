#include "ddcl/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ddcl/error.hpp"

namespace ddcl {

std::string format_real(double v) {
  if (!std::isfinite(v)) throw NumericError("refusing to serialize a non-finite value");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

bool is_scalar(const Json& v) { return !v.is_object() && !v.is_array(); }

void dump_scalar(const Json& v, std::ostringstream& out) {
  if (v.is_number_float()) {
    out << format_real(v.get<double>());
  } else {
    out << v.dump();
  }
}

void dump_value(const Json& v, std::ostringstream& out, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
  if (v.is_object()) {
    if (v.empty()) {
      out << "{}";
      return;
    }
    out << "{\n";
    bool first = true;
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (!first) out << ",\n";
      first = false;
      out << pad << Json(it.key()).dump() << ": ";
      dump_value(it.value(), out, depth + 1);
    }
    out << '\n' << close_pad << '}';
  } else if (v.is_array()) {
    if (v.empty()) {
      out << "[]";
      return;
    }
    bool flat = true;
    for (const auto& e : v) flat = flat && is_scalar(e);
    if (flat) {
      out << '[';
      for (std::size_t k = 0; k < v.size(); ++k) {
        if (k > 0) out << ", ";
        dump_scalar(v[k], out);
      }
      out << ']';
      return;
    }
    out << "[\n";
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (k > 0) out << ",\n";
      out << pad;
      dump_value(v[k], out, depth + 1);
    }
    out << '\n' << close_pad << ']';
  } else {
    dump_scalar(v, out);
  }
}

}  // namespace

std::string dump_json(const Json& value) {
  std::ostringstream out;
  dump_value(value, out, 0);
  out << '\n';
  return out.str();
}

Json round_to_json(const RunRecord& run, const RoundReport& round, bool record_timing) {
  Json j;
  j["label"] = run.label;
  j["method"] = run.method;
  j["m_similar"] = run.m_similar;
  j["seed"] = run.seed;
  j["round"] = round.round;
  j["new_classes"] = round.new_classes;
  j["mean_accuracy"] = round.mean_accuracy;
  j["confusion_errors"] = round.confusion_errors;
  j["forgetting_errors"] = round.forgetting_errors;
  j["test_samples"] = round.test_samples;
  Json acc = Json::object();
  for (const auto& [id, a] : round.per_class_accuracy) acc[std::to_string(id)] = a;
  j["per_class_accuracy"] = std::move(acc);
  Json pairs = Json::object();
  for (const auto& [nid, olds] : round.similar_pairs) pairs[std::to_string(nid)] = olds;
  j["similar_pairs"] = std::move(pairs);
  j["expert_classes"] = round.expert_classes;
  j["expert_final_loss"] = round.expert_final_loss;
  j["train_final_loss"] = round.train_final_loss;
  Json mem = Json::object();
  for (const auto& [id, idx] : round.memory) mem[std::to_string(id)] = idx;
  j["memory"] = std::move(mem);
  if (record_timing) j["wall_seconds"] = round.wall_seconds;
  return j;
}

Json memory_to_json(const ExemplarMemory& memory) {
  Json j;
  j["budget"] = memory.budget();
  j["sized_for"] = memory.sized_for();
  Json classes = Json::object();
  for (const auto& [id, idx] : memory.classes()) classes[std::to_string(id)] = idx;
  j["classes"] = std::move(classes);
  return j;
}

ExemplarMemory memory_from_json(const Json& value) {
  try {
    ExemplarMemory memory(value.at("budget").get<std::size_t>());
    std::map<ClassId, std::vector<std::size_t>> per_class;
    for (auto it = value.at("classes").begin(); it != value.at("classes").end(); ++it) {
      per_class[static_cast<ClassId>(std::stol(it.key()))] = it.value().get<std::vector<std::size_t>>();
    }
    memory.restore(value.at("sized_for").get<std::size_t>(), std::move(per_class));
    return memory;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("memory checkpoint: ") + e.what());
  }
}

void write_curves_csv(const std::filesystem::path& path, std::span<const RunRecord> runs) {
  std::ostringstream out;
  out << "round,method,seed,mean_accuracy,confusion_errors,forgetting_errors\n";
  for (const auto& run : runs) {
    for (const auto& r : run.rounds) {
      out << r.round << ',' << run.label << ',' << run.seed << ',' << format_real(r.mean_accuracy) << ','
          << r.confusion_errors << ',' << r.forgetting_errors << '\n';
    }
  }
  write_text(path, out.str());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

double average_over_rounds(const RunRecord& run) {
  std::vector<double> means;
  for (const auto& r : run.rounds) means.push_back(r.mean_accuracy);
  return mean_accuracy(means);
}

}  // namespace ddcl
