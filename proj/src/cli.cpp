#include "ddcl/cli.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <future>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "ddcl/checkpoint.hpp"
#include "ddcl/error.hpp"

namespace ddcl {

namespace {

std::string seed_list(const std::vector<std::uint64_t>& seeds) {
  std::string s;
  for (auto v : seeds) s += (s.empty() ? "" : ",") + std::to_string(v);
  return s;
}

RunRecord execute(const ExperimentConfig& cfg, const Variant& variant, std::uint64_t seed) {
  const Dataset dataset = build_dataset(cfg.dataset, seed);
  const auto rounds = schedule_rounds(dataset, cfg.dataset.classes_per_round, cfg.dataset.schedule);
  MethodConfig method = variant.method;
  method.seed = seed;
  RunRecord record{variant.label, std::string(to_string(method.method)), method.m_similar, seed, {}};

  RoundCallback on_round;
  if (cfg.output.checkpoints) {
    const auto dir = cfg.output.dir / "checkpoints";
    std::filesystem::create_directories(dir);
    on_round = [&, dir](const EngineState& state, const RoundReport& report) {
      const std::string stem = variant.label + "_seed" + std::to_string(seed) + "_round" + std::to_string(report.round);
      save_checkpoint(dir / (stem + ".bin"), *state.model);
      Json side;
      side["class_order"] = state.class_order;
      side["memory"] = memory_to_json(state.memory);
      write_text(dir / (stem + ".json"), dump_json(side));
    };
  }
  spdlog::info("{} seed {}: {} rounds", variant.label, seed, rounds.size());
  record.rounds = run_experiment(dataset, rounds, method, on_round);
  for (const auto& r : record.rounds) {
    spdlog::debug("{} seed {} round {}: acc {:.4f} confusion {} forgetting {} ({:.2f}s)", variant.label, seed, r.round,
                  r.mean_accuracy, r.confusion_errors, r.forgetting_errors, r.wall_seconds);
  }
  return record;
}

Json results_document(const std::string& command, const ExperimentConfig& cfg, const std::vector<RunRecord>& runs) {
  Json doc;
  doc["schema"] = "ddcl-results/1";
  doc["command"] = command;
  doc["config"] = config_to_json(cfg);
  Json entries = Json::array();
  for (const auto& run : runs) {
    for (const auto& r : run.rounds) entries.push_back(round_to_json(run, r, cfg.output.record_timing));
  }
  doc["entries"] = std::move(entries);
  return doc;
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error at " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

std::vector<RunRecord> execute_and_write(const std::string& command, const ExperimentConfig& cfg,
                                         const std::vector<Variant>& variants) {
  auto runs = run_variants(cfg, variants);
  std::filesystem::create_directories(cfg.output.dir);
  const Json doc = results_document(command, cfg, runs);
  write_text(cfg.output.dir / "results.json", dump_json(doc));
  write_curves_csv(cfg.output.dir / "curves.csv", runs);
  return runs;
}

}  // namespace

std::vector<RunRecord> run_variants(const ExperimentConfig& cfg, const std::vector<Variant>& variants) {
  struct Task {
    const Variant* variant;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const auto& v : variants) {
    for (auto seed : cfg.seeds) tasks.push_back({&v, seed});
  }
  std::vector<RunRecord> records(tasks.size());
  const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, tasks.size());
  if (workers <= 1) {
    for (std::size_t k = 0; k < tasks.size(); ++k) records[k] = execute(cfg, *tasks[k].variant, tasks[k].seed);
    return records;
  }
  // Fixed stride per worker; each slot is written by exactly one worker.
  std::vector<std::future<void>> pending;
  for (std::size_t w = 0; w < workers; ++w) {
    pending.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t k = w; k < tasks.size(); k += workers) records[k] = execute(cfg, *tasks[k].variant, tasks[k].seed);
    }));
  }
  for (auto& f : pending) f.get();
  return records;
}

int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = load_config(config_path);
    const std::string label(to_string(cfg.method.method));
    const auto runs = execute_and_write("run", cfg, {{label, cfg.method}});
    out << "wrote " << runs.size() << " run(s) for seeds " << seed_list(cfg.seeds) << " to "
        << cfg.output.dir.string() << '\n';
    return kExitOk;
  });
}

int cmd_compare(const std::filesystem::path& config_path, const std::vector<std::string>& methods, std::ostream& out,
                std::ostream& err) {
  return guarded(err, [&] {
    if (methods.size() < 2) throw ConfigError("--methods", "compare needs at least two methods");
    const ExperimentConfig cfg = load_config(config_path);
    std::vector<Variant> variants;
    for (const auto& name : methods) {
      auto parsed = parse_method(name);
      if (!parsed) throw ConfigError("--methods", "unknown method '" + name + "'");
      for (const auto& v : variants) {
        if (v.label == name) throw ConfigError("--methods", "method '" + name + "' listed twice");
      }
      MethodConfig m = cfg.method;
      m.method = *parsed;
      if (m.method == Method::finetune) m.inference = InferenceRule::softmax;
      variants.push_back({name, m});
    }

    // label -> round -> (sum acc, sum confusion, sum forgetting, n)
    struct Sums {
      double acc = 0, confusion = 0, forgetting = 0;
      std::size_t n = 0;
    };
    Json summary = Json::array();
    std::ostringstream csv;
    std::ostringstream table;
    const auto runs = run_variants(cfg, variants);
    csv << "method,round,mean_accuracy,confusion_errors,forgetting_errors\n";
    table << "method                      round  mean_acc  confusion  forgetting\n";
    for (const auto& v : variants) {
      std::map<std::size_t, Sums> by_round;
      for (const auto& run : runs) {
        if (run.label != v.label) continue;
        for (const auto& r : run.rounds) {
          auto& s = by_round[r.round];
          s.acc += r.mean_accuracy;
          s.confusion += static_cast<double>(r.confusion_errors);
          s.forgetting += static_cast<double>(r.forgetting_errors);
          ++s.n;
        }
      }
      for (const auto& [round, s] : by_round) {
        const double n = static_cast<double>(s.n);
        Json row;
        row["method"] = v.label;
        row["round"] = round;
        row["mean_accuracy"] = s.acc / n;
        row["confusion_errors"] = s.confusion / n;
        row["forgetting_errors"] = s.forgetting / n;
        summary.push_back(row);
        csv << v.label << ',' << round << ',' << format_real(s.acc / n) << ',' << format_real(s.confusion / n) << ','
            << format_real(s.forgetting / n) << '\n';
        char line[160];
        std::snprintf(line, sizeof line, "%-27s %5zu  %8.4f  %9.1f  %10.1f\n", v.label.c_str(), round, s.acc / n,
                      s.confusion / n, s.forgetting / n);
        table << line;
      }
    }
    std::filesystem::create_directories(cfg.output.dir);
    Json doc = results_document("compare", cfg, runs);
    doc["summary"] = std::move(summary);
    write_text(cfg.output.dir / "results.json", dump_json(doc));
    write_curves_csv(cfg.output.dir / "curves.csv", runs);
    write_text(cfg.output.dir / "summary.csv", csv.str());
    out << table.str();
    return kExitOk;
  });
}

int cmd_ablate(const std::filesystem::path& config_path, const std::vector<std::size_t>& m_values, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&] {
    if (m_values.empty()) throw ConfigError("--m", "at least one value required");
    const ExperimentConfig cfg = load_config(config_path);
    std::vector<Variant> variants;
    MethodConfig baseline = cfg.method;
    baseline.method = Method::distill_old_only;
    baseline.m_similar = 0;
    variants.push_back({"B", baseline});
    for (std::size_t m : m_values) {
      const std::string label = "m" + std::to_string(m);
      for (const auto& v : variants) {
        if (v.label == label) throw ConfigError("--m", "value " + std::to_string(m) + " listed twice");
      }
      MethodConfig proposed = cfg.method;
      proposed.method = Method::distill_old_plus_expert;
      proposed.m_similar = m;
      variants.push_back({label, proposed});
    }

    const auto runs = run_variants(cfg, variants);
    Json rows = Json::array();
    std::ostringstream csv;
    std::ostringstream summary_csv;
    std::ostringstream table;
    csv << "variant,seed,final_accuracy,avg_over_rounds\n";
    summary_csv << "variant,final_accuracy,avg_over_rounds\n";
    table << "variant  final_acc  avg_over_rounds\n";
    for (const auto& v : variants) {
      double final_sum = 0.0;
      double avg_sum = 0.0;
      std::size_t n = 0;
      for (const auto& run : runs) {
        if (run.label != v.label) continue;
        const double final_acc = run.rounds.back().mean_accuracy;
        const double avg = average_over_rounds(run);
        Json row;
        row["variant"] = v.label;
        row["seed"] = run.seed;
        row["final_accuracy"] = final_acc;
        row["avg_over_rounds"] = avg;
        rows.push_back(row);
        csv << v.label << ',' << run.seed << ',' << format_real(final_acc) << ',' << format_real(avg) << '\n';
        final_sum += final_acc;
        avg_sum += avg;
        ++n;
      }
      const double dn = static_cast<double>(n);
      summary_csv << v.label << ',' << format_real(final_sum / dn) << ',' << format_real(avg_sum / dn) << '\n';
      char line[96];
      std::snprintf(line, sizeof line, "%-7s  %9.4f  %15.4f\n", v.label.c_str(), final_sum / dn, avg_sum / dn);
      table << line;
    }
    std::filesystem::create_directories(cfg.output.dir);
    Json doc = results_document("ablate", cfg, runs);
    doc["ablation"] = std::move(rows);
    write_text(cfg.output.dir / "results.json", dump_json(doc));
    write_curves_csv(cfg.output.dir / "curves.csv", runs);
    write_text(cfg.output.dir / "ablation.csv", csv.str());
    write_text(cfg.output.dir / "ablation_summary.csv", summary_csv.str());
    out << table.str();
    return kExitOk;
  });
}

}  // namespace ddcl
