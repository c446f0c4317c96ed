// Command-line harness for discriminative-distillation continual learning runs.
//
//   ddcl run <config.ini>
//   ddcl compare <config.ini> --methods distill_old_only,distill_old_plus_expert
//   ddcl ablate <config.ini> --m 0,1,2
//
// Log verbosity comes from DDCL_LOG (trace, debug, info, warn, error, off).

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "ddcl/cli.hpp"

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("ddcl");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("DDCL_LOG")) spdlog::set_level(spdlog::level::from_str(level));

  CLI::App app{"Class-incremental learning with discriminative distillation"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> methods;
  std::vector<std::size_t> m_values;

  auto* run = app.add_subcommand("run", "Run the configured method for every seed");
  run->add_option("config", config, "Experiment config (INI)")->required();

  auto* compare = app.add_subcommand("compare", "Run several methods on identical seeds and rounds");
  compare->add_option("config", config, "Experiment config (INI)")->required();
  compare->add_option("--methods", methods, "Comma-separated method names")->required()->delimiter(',');

  auto* ablate = app.add_subcommand("ablate", "Sweep the number of similar old classes per new class");
  ablate->add_option("config", config, "Experiment config (INI)")->required();
  ablate->add_option("--m", m_values, "Comma-separated values of m_similar")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ddcl::kExitConfig;
  }

  if (run->parsed()) return ddcl::cmd_run(config, std::cout, std::cerr);
  if (compare->parsed()) return ddcl::cmd_compare(config, methods, std::cout, std::cerr);
  return ddcl::cmd_ablate(config, m_values, std::cout, std::cerr);
}
