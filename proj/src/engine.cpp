#include "ddcl/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>

#include "ddcl/error.hpp"
#include "ddcl/rng.hpp"
#include "ddcl/similarity.hpp"
#include "ddcl/trainer.hpp"

namespace ddcl {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::finetune: return "finetune";
    case Method::distill_old_only: return "distill_old_only";
    case Method::distill_old_plus_expert: return "distill_old_plus_expert";
  }
  return "?";
}

std::string_view to_string(InferenceRule r) {
  return r == InferenceRule::softmax ? "softmax" : "nearest_mean_exemplars";
}

std::string_view to_string(ExpertInitMode m) { return m == ExpertInitMode::warm ? "warm" : "scratch"; }

std::string_view to_string(ExemplarPolicy p) { return p == ExemplarPolicy::herding ? "herding" : "random"; }

std::optional<Method> parse_method(std::string_view text) {
  for (Method m : {Method::finetune, Method::distill_old_only, Method::distill_old_plus_expert}) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

std::optional<InferenceRule> parse_inference(std::string_view text) {
  for (InferenceRule r : {InferenceRule::softmax, InferenceRule::nearest_mean_exemplars}) {
    if (text == to_string(r)) return r;
  }
  return std::nullopt;
}

std::optional<ExpertInitMode> parse_expert_init(std::string_view text) {
  for (ExpertInitMode m : {ExpertInitMode::warm, ExpertInitMode::scratch}) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

std::optional<ExemplarPolicy> parse_exemplar_policy(std::string_view text) {
  for (ExemplarPolicy p : {ExemplarPolicy::herding, ExemplarPolicy::random}) {
    if (text == to_string(p)) return p;
  }
  return std::nullopt;
}

void MethodConfig::validate() const {
  auto finite_at_least = [](double v, double lo) { return std::isfinite(v) && v >= lo; };
  if (!finite_at_least(T_n, 1.0) || !finite_at_least(T_o, 1.0)) throw InputError("temperatures must be >= 1");
  if (!finite_at_least(lambda1, 0.0) || !finite_at_least(lambda2, 0.0)) throw InputError("lambdas must be >= 0");
  if (!(schedule.lr > 0.0) || !std::isfinite(schedule.lr)) throw InputError("learning rate must be positive");
  if (schedule.batch_size == 0) throw InputError("batch size must be positive");
  if (!finite_at_least(head_init_scale, 0.0)) throw InputError("head_init_scale must be >= 0");
  for (std::size_t h : hidden) {
    if (h == 0) throw InputError("hidden widths must be positive");
  }
  for (double f : schedule.decay_at) {
    if (!(f > 0.0 && f < 1.0)) throw InputError("decay points are epoch fractions in (0, 1)");
  }
  if (!(schedule.decay_factor > 0.0) || !std::isfinite(schedule.decay_factor)) {
    throw InputError("decay factor must be positive");
  }
  if (method == Method::finetune && inference == InferenceRule::nearest_mean_exemplars) {
    throw InputError("finetune keeps no exemplars, so nearest_mean_exemplars inference is unavailable");
  }
}

ExpertSchedule MethodConfig::expert_schedule() const {
  return {expert_full_epochs, expert_balanced_epochs, schedule.batch_size, schedule.lr, schedule.decay_at,
          schedule.decay_factor};
}

EngineState make_state(const MethodConfig& cfg) {
  EngineState state;
  state.memory = ExemplarMemory(cfg.memory_K);
  return state;
}

std::uint64_t round_seed(std::uint64_t base, std::size_t round, SeedStream stream) {
  return derive_seed(base, static_cast<std::uint64_t>(round) * 8 + static_cast<std::uint64_t>(stream));
}

namespace {

Matrix penultimate(const MlpClassifier& model, const Matrix& x, bool normalize) {
  Matrix f = features(model, x);
  return normalize ? l2_normalize_rows(f) : f;
}

}  // namespace

RoundLog run_round(EngineState& state, const Dataset& dataset, const RoundSpec& round, const MethodConfig& cfg) {
  cfg.validate();
  if (round.new_classes.empty()) throw InputError("round " + std::to_string(round.index) + " has no classes");
  std::set<ClassId> seen(state.class_order.begin(), state.class_order.end());
  std::map<ClassId, Matrix> new_data;
  for (ClassId id : round.new_classes) {
    if (!seen.insert(id).second) throw InputError("class " + std::to_string(id) + " was already learned");
    auto it = round.train_indices.find(id);
    if (it == round.train_indices.end() || it->second.empty()) {
      throw InputError("class " + std::to_string(id) + " has no training data");
    }
    new_data.emplace(id, gather_features(dataset.train, it->second));
  }

  RoundLog log;
  const std::size_t r = round.index;
  const bool keeps_memory = cfg.method != Method::finetune;

  std::optional<MlpClassifier> old_model = state.model;
  MlpClassifier student = [&] {
    if (!old_model) {
      std::vector<std::size_t> dims{dataset.dim()};
      dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
      dims.push_back(round.new_classes.size());
      return MlpClassifier(dims, round_seed(cfg.seed, r, SeedStream::init));
    }
    return expand_head(*old_model, round.new_classes.size(), cfg.head_init_scale,
                       round_seed(cfg.seed, r, SeedStream::head));
  }();

  // Step 1 and 2: confusable old classes and the expert trained on them.
  if (old_model && cfg.method == Method::distill_old_plus_expert) {
    std::map<ClassId, Matrix> new_feats;
    for (const auto& [id, x] : new_data) new_feats.emplace(id, penultimate(*old_model, x, cfg.normalize_features));
    std::map<ClassId, Matrix> old_feats;
    std::map<ClassId, Matrix> old_inputs;
    for (const auto& [id, indices] : state.memory.classes()) {
      if (indices.empty()) continue;
      Matrix x = gather_features(dataset.train, indices);
      old_feats.emplace(id, penultimate(*old_model, x, cfg.normalize_features));
      old_inputs.emplace(id, std::move(x));
    }
    log.similar = select_similar(class_centres(new_feats), class_centres(old_feats), cfg.m_similar);

    std::map<ClassId, Matrix> selected;
    for (const auto& [nid, olds] : log.similar) {
      for (ClassId oid : olds) selected.emplace(oid, old_inputs.at(oid));
    }
    ExpertInit init{cfg.expert_init == ExpertInitMode::warm ? &*old_model : nullptr, cfg.hidden};
    log.expert = train_expert(new_data, selected, init, cfg.expert_schedule(),
                              round_seed(cfg.seed, r, SeedStream::expert));
  }

  for (ClassId id : round.new_classes) state.class_order.push_back(id);
  std::map<ClassId, std::size_t> position;
  for (std::size_t p = 0; p < state.class_order.size(); ++p) position[state.class_order[p]] = p;

  // Step 3: training set D = new data + stored exemplars.
  std::vector<std::size_t> sample_ids;
  for (ClassId id : round.new_classes) {
    const auto& idx = round.train_indices.at(id);
    sample_ids.insert(sample_ids.end(), idx.begin(), idx.end());
  }
  if (keeps_memory) {
    for (const auto& [id, idx] : state.memory.classes()) sample_ids.insert(sample_ids.end(), idx.begin(), idx.end());
  }
  const Matrix inputs = gather_features(dataset.train, sample_ids);
  std::vector<std::size_t> labels;
  labels.reserve(sample_ids.size());
  for (std::size_t s : sample_ids) labels.push_back(position.at(dataset.train[s].class_id));

  std::optional<Teacher> old_teacher;
  std::optional<Teacher> expert_teacher;
  if (old_model && keeps_memory) {
    std::vector<std::size_t> identity(old_model->output_dim());
    for (std::size_t k = 0; k < identity.size(); ++k) identity[k] = k;
    old_teacher = Teacher{&*old_model, std::move(identity), cfg.T_o};
  }
  if (log.expert) {
    expert_teacher = Teacher{&log.expert->model, expert_index_map(log.expert->class_list, state.class_order), cfg.T_n};
  }

  std::vector<std::size_t> everything(sample_ids.size());
  for (std::size_t k = 0; k < everything.size(); ++k) everything[k] = k;
  const LossWeights weights{cfg.lambda1, cfg.lambda2};
  Rng rng(round_seed(cfg.seed, r, SeedStream::student));
  for (std::size_t epoch = 0; epoch < cfg.schedule.epochs; ++epoch) {
    auto stats = train_epoch(student, inputs, labels, everything, cfg.schedule.batch_size, cfg.schedule.lr_at(epoch),
                             old_teacher ? &*old_teacher : nullptr, expert_teacher ? &*expert_teacher : nullptr,
                             weights, rng, "round " + std::to_string(r) + " epoch " + std::to_string(epoch));
    log.epoch_losses.push_back(stats.mean_loss);
    log.minibatch_losses.insert(log.minibatch_losses.end(), stats.minibatch_losses.begin(),
                                stats.minibatch_losses.end());
  }
  state.model = std::move(student);

  if (keeps_memory) {
    state.memory.rebalance(state.class_order.size());
    for (ClassId id : round.new_classes) {
      const auto& idx = round.train_indices.at(id);
      const Matrix feats = penultimate(*state.model, new_data.at(id), cfg.normalize_features);
      state.memory.admit_class(id, feats, idx, cfg.exemplar_policy,
                               derive_seed(round_seed(cfg.seed, r, SeedStream::exemplars), static_cast<std::uint64_t>(id)));
    }
  }
  ++state.rounds_done;
  return log;
}

std::vector<ClassId> predict(const EngineState& state, const Dataset& dataset, const Matrix& batch,
                             InferenceRule rule) {
  if (!state.model) throw StateError("predict before any round was learned");
  std::vector<ClassId> out;
  out.reserve(batch.rows());
  if (rule == InferenceRule::softmax) {
    const Matrix logits = predict_logits(*state.model, batch);
    for (std::size_t i = 0; i < logits.rows(); ++i) {
      auto row = logits.row(i);
      std::size_t best = 0;
      for (std::size_t p = 1; p < row.size(); ++p) {
        if (row[p] > row[best] || (row[p] == row[best] && state.class_order[p] < state.class_order[best])) best = p;
      }
      out.push_back(state.class_order[best]);
    }
    return out;
  }

  std::map<ClassId, Vector> means;
  for (const auto& [id, idx] : state.memory.classes()) {
    if (idx.empty()) continue;
    means.emplace(id, column_mean(features(*state.model, gather_features(dataset.train, idx))));
  }
  if (means.empty()) throw StateError("nearest_mean_exemplars inference needs stored exemplars");
  const Matrix feats = features(*state.model, batch);
  for (std::size_t i = 0; i < feats.rows(); ++i) {
    ClassId best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& [id, mean] : means) {
      const double d = squared_distance(feats.row(i), mean);
      if (d < best_dist) {
        best_dist = d;
        best = id;
      }
    }
    out.push_back(best);
  }
  return out;
}

RoundReport evaluate(const EngineState& state, const Dataset& dataset, InferenceRule rule, const MetaClassMap& meta) {
  const std::set<ClassId> learned(state.class_order.begin(), state.class_order.end());
  std::vector<std::size_t> rows;
  std::vector<ClassId> truth;
  for (std::size_t i = 0; i < dataset.test.size(); ++i) {
    if (learned.contains(dataset.test[i].class_id)) {
      rows.push_back(i);
      truth.push_back(dataset.test[i].class_id);
    }
  }
  RoundReport report;
  report.round = state.rounds_done;
  report.test_samples = rows.size();
  if (rows.empty()) throw StateError("no test samples for the learned classes");
  const auto predicted = predict(state, dataset, gather_features(dataset.test, rows), rule);
  report.per_class_accuracy = per_class_accuracy(truth, predicted);
  report.mean_accuracy = mean_accuracy(report.per_class_accuracy);
  const ErrorSplit split = decompose_errors(truth, predicted, meta);
  report.confusion_errors = split.confusion;
  report.forgetting_errors = split.forgetting;
  report.memory = state.memory.classes();
  return report;
}

std::vector<RoundReport> run_experiment(const Dataset& dataset, const std::vector<RoundSpec>& rounds,
                                        const MethodConfig& cfg, const RoundCallback& on_round) {
  if (rounds.empty()) throw InputError("run_experiment needs at least one round");
  cfg.validate();
  const MetaClassMap meta = dataset.meta_classes();
  EngineState state = make_state(cfg);
  std::vector<RoundReport> reports;
  for (const RoundSpec& round : rounds) {
    const auto start = std::chrono::steady_clock::now();
    const RoundLog log = run_round(state, dataset, round, cfg);
    RoundReport report = evaluate(state, dataset, cfg.inference, meta);
    report.round = round.index;
    report.new_classes = round.new_classes;
    report.similar_pairs = log.similar;
    if (log.expert) {
      report.expert_classes = log.expert->class_list;
      if (!log.expert->epoch_losses.empty()) report.expert_final_loss = log.expert->epoch_losses.back();
    }
    if (!log.epoch_losses.empty()) report.train_final_loss = log.epoch_losses.back();
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_round) on_round(state, report);
    reports.push_back(std::move(report));
  }
  return reports;
}

}  // namespace ddcl
