#include "ddcl/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ddcl/error.hpp"
#include "ddcl/rng.hpp"

namespace ddcl {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

// Typed, checked access to one section of the INI tree.
class Section {
 public:
  Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}

  ~Section() = default;

  // Keys present in the file but never read are rejected by `finish`.
  void finish() const {
    if (tree_ == nullptr) return;
    for (const auto& [key, node] : *tree_) {
      if (!read_.contains(key)) throw ConfigError(path(key), "unknown key");
    }
  }

  bool has(const std::string& key) {
    read_.insert(key);
    return tree_ != nullptr && tree_->find(key) != tree_->not_found();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    return trim(tree_->get<std::string>(key));
  }

  std::string required_text(const std::string& key) {
    if (!has(key)) throw ConfigError(path(key), "required key missing");
    return trim(tree_->get<std::string>(key));
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback, std::uint64_t min = 0) {
    if (!has(key)) return fallback;
    const auto v = parse_unsigned(key, text(key, ""));
    if (v < min) throw ConfigError(path(key), "must be >= " + std::to_string(min));
    return v;
  }

  double real(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return parse_real(key, text(key, ""));
  }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const std::string v = text(key, "");
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError(path(key), "expected true or false, got '" + v + "'");
  }

  std::vector<std::uint64_t> counts(const std::string& key, std::vector<std::uint64_t> fallback) {
    if (!has(key)) return fallback;
    std::vector<std::uint64_t> out;
    for (const auto& item : split(text(key, ""))) out.push_back(parse_unsigned(key, item));
    return out;
  }

  std::vector<double> reals(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    std::vector<double> out;
    for (const auto& item : split(text(key, ""))) out.push_back(parse_real(key, item));
    return out;
  }

  std::string path(const std::string& key) const { return name_ + "." + key; }

 private:
  static std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> items;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (!item.empty()) items.push_back(item);
    }
    return items;
  }

  std::uint64_t parse_unsigned(const std::string& key, const std::string& v) const {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
      throw ConfigError(path(key), "expected a non-negative integer, got '" + v + "'");
    }
    return out;
  }

  double parse_real(const std::string& key, const std::string& v) const {
    double out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty() || !std::isfinite(out)) {
      throw ConfigError(path(key), "expected a finite number, got '" + v + "'");
    }
    return out;
  }

  std::string name_;
  const pt::ptree* tree_;
  std::set<std::string> read_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <typename T, typename Parse>
T choice(Section& s, const std::string& key, T fallback, Parse parse) {
  if (!s.has(key)) return fallback;
  const std::string v = s.text(key, "");
  auto parsed = parse(v);
  if (!parsed) throw ConfigError(s.path(key), "unrecognized value '" + v + "'");
  return *parsed;
}

std::optional<DataSource> parse_source(std::string_view v) {
  if (v == "synthetic") return DataSource::synthetic;
  if (v == "csv") return DataSource::csv;
  return std::nullopt;
}

std::optional<SchedulePolicy> parse_policy(std::string_view v) {
  if (v == "id_order") return SchedulePolicy::id_order;
  if (v == "split_similar") return SchedulePolicy::split_similar;
  return std::nullopt;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()), e.message());
  }
  static const std::set<std::string> kSections{"dataset", "model", "method", "training", "runs", "output"};
  for (const auto& [name, node] : tree) {
    if (!kSections.contains(name)) throw ConfigError(name, "unknown section");
    if (node.empty() && !node.data().empty()) throw ConfigError(name, "key outside of any section");
  }
  auto section = [&](const std::string& name) {
    auto it = tree.find(name);
    return Section(name, it == tree.not_found() ? nullptr : &it->second);
  };

  ExperimentConfig cfg;
  {
    Section s = section("dataset");
    auto& d = cfg.dataset;
    d.source = choice(s, "source", DataSource::synthetic, parse_source);
    auto& syn = d.synthetic;
    syn.meta_classes = s.count("meta_classes", syn.meta_classes);
    syn.classes_per_meta = s.count("classes_per_meta", syn.classes_per_meta, 1);
    syn.background_classes = s.count("background_classes", syn.background_classes);
    syn.dim = s.count("dim", syn.dim, 1);
    syn.intra_meta_spread = s.real("intra_meta_spread", syn.intra_meta_spread);
    syn.inter_meta_spread = s.real("inter_meta_spread", syn.inter_meta_spread);
    syn.within_class_std = s.real("within_class_std", syn.within_class_std);
    syn.train_per_class = s.count("train_per_class", syn.train_per_class, 1);
    syn.test_per_class = s.count("test_per_class", syn.test_per_class, 1);
    syn.seed = s.count("seed", syn.seed);
    if (d.source == DataSource::csv) {
      d.train_csv = resolve(base_dir, s.required_text("train_csv"));
      d.test_csv = resolve(base_dir, s.required_text("test_csv"));
    } else {
      if (s.has("train_csv")) throw ConfigError(s.path("train_csv"), "only valid with source = csv");
      if (s.has("test_csv")) throw ConfigError(s.path("test_csv"), "only valid with source = csv");
      if (!(syn.intra_meta_spread > 0.0)) throw ConfigError(s.path("intra_meta_spread"), "must be positive");
      if (!(syn.inter_meta_spread > syn.intra_meta_spread)) {
        throw ConfigError(s.path("inter_meta_spread"), "must exceed intra_meta_spread");
      }
      if (!(syn.within_class_std > 0.0)) throw ConfigError(s.path("within_class_std"), "must be positive");
      if (syn.total_classes() < 2) throw ConfigError(s.path("meta_classes"), "benchmark needs at least two classes");
    }
    d.classes_per_round = s.count("classes_per_round", d.classes_per_round, 1);
    d.schedule = choice(s, "schedule", d.schedule, parse_policy);
    s.finish();
  }
  auto& m = cfg.method;
  {
    Section s = section("model");
    const auto hidden = s.counts("hidden", {m.hidden.begin(), m.hidden.end()});
    m.hidden.assign(hidden.begin(), hidden.end());
    for (auto h : m.hidden) {
      if (h == 0) throw ConfigError(s.path("hidden"), "widths must be positive");
    }
    m.head_init_scale = s.real("head_init_scale", m.head_init_scale);
    if (m.head_init_scale < 0.0) throw ConfigError(s.path("head_init_scale"), "must be >= 0");
    s.finish();
  }
  {
    Section s = section("method");
    m.method = choice(s, "name", m.method, parse_method);
    m.m_similar = s.count("m_similar", m.m_similar);
    m.lambda1 = s.real("lambda1", m.lambda1);
    m.lambda2 = s.real("lambda2", m.lambda2);
    m.T_n = s.real("T_n", m.T_n);
    m.T_o = s.real("T_o", m.T_o);
    m.inference = choice(s, "inference", m.inference, parse_inference);
    m.memory_K = s.count("memory_K", m.memory_K);
    m.exemplar_policy = choice(s, "exemplar_policy", m.exemplar_policy, parse_exemplar_policy);
    m.normalize_features = s.flag("normalize_features", m.normalize_features);
    m.expert_init = choice(s, "expert_init", m.expert_init, parse_expert_init);
    m.expert_full_epochs = s.count("expert_full_epochs", m.expert_full_epochs);
    m.expert_balanced_epochs = s.count("expert_balanced_epochs", m.expert_balanced_epochs);
    if (m.lambda1 < 0.0) throw ConfigError(s.path("lambda1"), "must be >= 0");
    if (m.lambda2 < 0.0) throw ConfigError(s.path("lambda2"), "must be >= 0");
    if (m.T_n < 1.0) throw ConfigError(s.path("T_n"), "must be >= 1");
    if (m.T_o < 1.0) throw ConfigError(s.path("T_o"), "must be >= 1");
    if (m.method == Method::finetune && m.inference == InferenceRule::nearest_mean_exemplars) {
      throw ConfigError(s.path("inference"), "finetune keeps no exemplars; use softmax");
    }
    s.finish();
  }
  {
    Section s = section("training");
    auto& t = m.schedule;
    t.epochs = s.count("epochs", t.epochs, 1);
    t.batch_size = s.count("batch_size", t.batch_size, 1);
    t.lr = s.real("lr", t.lr);
    t.decay_at = s.reals("decay_at", t.decay_at);
    t.decay_factor = s.real("decay_factor", t.decay_factor);
    if (!(t.lr > 0.0)) throw ConfigError(s.path("lr"), "must be positive");
    if (!(t.decay_factor > 0.0)) throw ConfigError(s.path("decay_factor"), "must be positive");
    for (double f : t.decay_at) {
      if (!(f > 0.0 && f < 1.0)) throw ConfigError(s.path("decay_at"), "fractions must lie in (0, 1)");
    }
    s.finish();
  }
  {
    Section s = section("runs");
    cfg.seeds = s.counts("seeds", cfg.seeds);
    if (cfg.seeds.empty()) throw ConfigError(s.path("seeds"), "at least one seed required");
    s.finish();
  }
  {
    Section s = section("output");
    cfg.output.dir = resolve(base_dir, s.text("dir", cfg.output.dir.string()));
    cfg.output.record_timing = s.flag("record_timing", cfg.output.record_timing);
    cfg.output.checkpoints = s.flag("checkpoints", cfg.output.checkpoints);
    s.finish();
  }
  try {
    m.validate();
  } catch (const InputError& e) {
    throw ConfigError("method", e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot read config file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.parent_path());
}

Dataset build_dataset(const DatasetConfig& cfg, std::uint64_t run_seed) {
  if (cfg.source == DataSource::csv) {
    Dataset ds;
    ds.train = load_csv(cfg.train_csv);
    ds.test = load_csv(cfg.test_csv);
    if (ds.train.empty()) throw SchemaError(cfg.train_csv.string() + ": no samples");
    if (!ds.test.empty() && ds.test.front().features.size() != ds.train.front().features.size()) {
      throw SchemaError("train and test CSV feature widths differ");
    }
    return ds;
  }
  SyntheticSpec spec = cfg.synthetic;
  spec.seed = derive_seed(cfg.synthetic.seed, run_seed);
  return generate(spec);
}

Json config_to_json(const ExperimentConfig& cfg) {
  Json j;
  Json& d = j["dataset"];
  d["source"] = cfg.dataset.source == DataSource::csv ? "csv" : "synthetic";
  if (cfg.dataset.source == DataSource::csv) {
    d["train_csv"] = cfg.dataset.train_csv.filename().string();
    d["test_csv"] = cfg.dataset.test_csv.filename().string();
  } else {
    const auto& s = cfg.dataset.synthetic;
    d["meta_classes"] = s.meta_classes;
    d["classes_per_meta"] = s.classes_per_meta;
    d["background_classes"] = s.background_classes;
    d["dim"] = s.dim;
    d["intra_meta_spread"] = s.intra_meta_spread;
    d["inter_meta_spread"] = s.inter_meta_spread;
    d["within_class_std"] = s.within_class_std;
    d["train_per_class"] = s.train_per_class;
    d["test_per_class"] = s.test_per_class;
    d["seed"] = s.seed;
  }
  d["classes_per_round"] = cfg.dataset.classes_per_round;
  d["schedule"] = cfg.dataset.schedule == SchedulePolicy::id_order ? "id_order" : "split_similar";
  const auto& m = cfg.method;
  j["model"]["hidden"] = m.hidden;
  j["model"]["head_init_scale"] = m.head_init_scale;
  Json& me = j["method"];
  me["name"] = std::string(to_string(m.method));
  me["m_similar"] = m.m_similar;
  me["lambda1"] = m.lambda1;
  me["lambda2"] = m.lambda2;
  me["T_n"] = m.T_n;
  me["T_o"] = m.T_o;
  me["inference"] = std::string(to_string(m.inference));
  me["memory_K"] = m.memory_K;
  me["exemplar_policy"] = std::string(to_string(m.exemplar_policy));
  me["normalize_features"] = m.normalize_features;
  me["expert_init"] = std::string(to_string(m.expert_init));
  me["expert_full_epochs"] = m.expert_full_epochs;
  me["expert_balanced_epochs"] = m.expert_balanced_epochs;
  Json& t = j["training"];
  t["epochs"] = m.schedule.epochs;
  t["batch_size"] = m.schedule.batch_size;
  t["lr"] = m.schedule.lr;
  t["decay_at"] = m.schedule.decay_at;
  t["decay_factor"] = m.schedule.decay_factor;
  j["runs"]["seeds"] = cfg.seeds;
  return j;
}

}  // namespace ddcl
