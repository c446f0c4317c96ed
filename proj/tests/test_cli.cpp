#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "ddcl/checkpoint.hpp"
#include "ddcl/cli.hpp"
#include "ddcl/config.hpp"
#include "ddcl/error.hpp"
#include "ddcl/report.hpp"

using namespace ddcl;
namespace fs = std::filesystem;

namespace {

const char* kTiny = R"([dataset]
source = synthetic
meta_classes = 2
classes_per_meta = 2
background_classes = 2
dim = 4
intra_meta_spread = 2.0
inter_meta_spread = 10.0
train_per_class = 20
test_per_class = 5
seed = 3
classes_per_round = 2
schedule = split_similar

[model]
hidden = 6

[method]
name = distill_old_plus_expert
memory_K = 12
expert_full_epochs = 2
expert_balanced_epochs = 1

[training]
epochs = 2
batch_size = 16

[runs]
seeds = 1,2

[output]
dir = out
)";

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ddcl_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "exp.ini";
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("run writes results and reruns byte-identically") {
  const fs::path dir = fresh_dir("run");
  const fs::path cfg = write_config(dir, kTiny);
  std::ostringstream out;
  std::ostringstream err;
  REQUIRE(cmd_run(cfg, out, err) == kExitOk);
  const std::string results = slurp(dir / "out" / "results.json");
  const std::string curves = slurp(dir / "out" / "curves.csv");
  const Json doc = Json::parse(results);
  CHECK(doc["schema"] == "ddcl-results/1");
  CHECK(doc["command"] == "run");
  CHECK(doc["entries"].size() == 2 * 3);
  CHECK_FALSE(doc["entries"][0].contains("wall_seconds"));
  CHECK(read_csv(dir / "out" / "curves.csv").size() == 1 + 6);
  REQUIRE(cmd_run(cfg, out, err) == kExitOk);
  CHECK(slurp(dir / "out" / "results.json") == results);
  CHECK(slurp(dir / "out" / "curves.csv") == curves);
}

TEST_CASE("exit codes") {
  const fs::path dir = fresh_dir("codes");
  std::ostringstream out;
  std::ostringstream err;
  CHECK(cmd_run(dir / "missing.ini", out, err) == kExitConfig);

  std::string bad = kTiny;
  bad.replace(bad.find("memory_K"), 8, "memory_Q");
  const fs::path bad_cfg = write_config(dir, bad);
  err.str("");
  CHECK(cmd_run(bad_cfg, out, err) == kExitConfig);
  CHECK(err.str().find("method.memory_Q") != std::string::npos);

  const fs::path csv_cfg =
      write_config(dir, "[dataset]\nsource = csv\ntrain_csv = nope.csv\ntest_csv = nope.csv\n[output]\ndir = o\n");
  CHECK(cmd_run(csv_cfg, out, err) == kExitRuntime);

  const fs::path ok_cfg = write_config(dir, kTiny);
  CHECK(cmd_compare(ok_cfg, {"finetune"}, out, err) == kExitConfig);
  CHECK(cmd_compare(ok_cfg, {"finetune", "icarl"}, out, err) == kExitConfig);
  CHECK(cmd_compare(ok_cfg, {"finetune", "finetune"}, out, err) == kExitConfig);
}

TEST_CASE("compare writes per-round means") {
  const fs::path dir = fresh_dir("compare");
  const fs::path cfg = write_config(dir, kTiny);
  std::ostringstream out;
  std::ostringstream err;
  REQUIRE(cmd_compare(cfg, {"distill_old_only", "distill_old_plus_expert"}, out, err) == kExitOk);
  const auto summary = read_csv(dir / "out" / "summary.csv");
  REQUIRE(summary.size() == 1 + 2 * 3);
  CHECK(summary[0] == std::vector<std::string>{"method", "round", "mean_accuracy", "confusion_errors",
                                               "forgetting_errors"});
  const auto curves = read_csv(dir / "out" / "curves.csv");
  double sum = 0.0;
  for (std::size_t i = 1; i < curves.size(); ++i) {
    if (curves[i][1] == "distill_old_only" && curves[i][0] == "3") sum += std::stod(curves[i][3]);
  }
  for (const auto& row : summary) {
    if (row[0] == "distill_old_only" && row[1] == "3") CHECK(std::stod(row[2]) == doctest::Approx(sum / 2.0));
  }
  CHECK(Json::parse(slurp(dir / "out" / "results.json")).contains("summary"));
}

TEST_CASE("ablate emits one row per variant and seed") {
  const fs::path dir = fresh_dir("ablate");
  const fs::path cfg = write_config(dir, kTiny);
  std::ostringstream out;
  std::ostringstream err;
  REQUIRE(cmd_ablate(cfg, {0, 1, 2}, out, err) == kExitOk);
  const auto rows = read_csv(dir / "out" / "ablation.csv");
  REQUIRE(rows.size() == 1 + 4 * 2);
  CHECK(rows[1][0] == "B");
  CHECK(rows[3][0] == "m0");
  const auto curves = read_csv(dir / "out" / "curves.csv");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    double sum = 0.0;
    int n = 0;
    std::string last;
    for (std::size_t k = 1; k < curves.size(); ++k) {
      if (curves[k][1] == rows[i][0] && curves[k][2] == rows[i][1]) {
        sum += std::stod(curves[k][3]);
        last = curves[k][3];
        ++n;
      }
    }
    REQUIRE(n == 3);
    CHECK(std::stod(rows[i][3]) == doctest::Approx(sum / 3.0).epsilon(1e-12));
    CHECK(rows[i][2] == last);
  }
  CHECK(read_csv(dir / "out" / "ablation_summary.csv").size() == 1 + 4);
  CHECK(cmd_ablate(cfg, {1, 1}, out, err) == kExitConfig);
}

TEST_CASE("checkpoints are written per round") {
  const fs::path dir = fresh_dir("ckpt");
  std::string text = kTiny;
  text += "checkpoints = true\n";
  const fs::path cfg = write_config(dir, text);
  std::ostringstream out;
  std::ostringstream err;
  REQUIRE(cmd_run(cfg, out, err) == kExitOk);
  const fs::path bin = dir / "out" / "checkpoints" / "distill_old_plus_expert_seed1_round3.bin";
  REQUIRE(fs::exists(bin));
  CHECK(load_checkpoint(bin).output_dim() == 6);
  const Json side = Json::parse(slurp(dir / "out" / "checkpoints" / "distill_old_plus_expert_seed1_round3.json"));
  CHECK(side["class_order"].size() == 6);
  CHECK(memory_from_json(side["memory"]).total_stored() <= 12);
}

TEST_CASE("config parsing") {
  const ExperimentConfig cfg = parse_config(kTiny, "/base");
  CHECK(cfg.dataset.synthetic.classes_per_meta == 2);
  CHECK(cfg.method.hidden == std::vector<std::size_t>{6});
  CHECK(cfg.method.memory_K == 12);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(cfg.output.dir == fs::path("/base/out"));
  CHECK(cfg.method.lambda1 == 1.0);
  CHECK(cfg.method.T_n == 2.0);

  try {
    parse_config("[method]\nbogus = 1\n");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "method.bogus");
  }
  CHECK_THROWS_AS(parse_config("[extras]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[method]\nname = icarl\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[training]\nepochs = -3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[method]\nT_n = 0.5\n"), ConfigError);
}

TEST_CASE("json output is deterministic text") {
  Json v;
  v["b"] = 0.1;
  v["a"] = std::vector<int>{1, 2, 3};
  const std::string text = dump_json(v);
  CHECK(text.find("0.10000000000000001") != std::string::npos);
  CHECK(text.find("[1, 2, 3]") != std::string::npos);
  CHECK(text.find("\"b\"") < text.find("\"a\""));
  CHECK(format_real(0.5) == "0.5");
  CHECK_THROWS_AS(format_real(INFINITY), NumericError);
}
