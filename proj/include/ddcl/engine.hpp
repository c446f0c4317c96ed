#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ddcl/data.hpp"
#include "ddcl/expert.hpp"
#include "ddcl/memory.hpp"
#include "ddcl/metrics.hpp"
#include "ddcl/mlp.hpp"

namespace ddcl {

enum class Method {
  finetune,                 // cross-entropy on new data only, no memory
  distill_old_only,         // exemplars + old-classifier distillation
  distill_old_plus_expert,  // ... plus distillation from the discriminative expert
};

enum class InferenceRule { softmax, nearest_mean_exemplars };
enum class ExpertInitMode { warm, scratch };

std::string_view to_string(Method m);
std::string_view to_string(InferenceRule r);
std::string_view to_string(ExpertInitMode m);
std::string_view to_string(ExemplarPolicy p);
std::optional<Method> parse_method(std::string_view text);
std::optional<InferenceRule> parse_inference(std::string_view text);
std::optional<ExpertInitMode> parse_expert_init(std::string_view text);
std::optional<ExemplarPolicy> parse_exemplar_policy(std::string_view text);

struct MethodConfig {
  Method method = Method::distill_old_plus_expert;
  std::size_t m_similar = 1;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double T_n = 2.0;
  double T_o = 2.0;
  InferenceRule inference = InferenceRule::softmax;
  std::size_t memory_K = 2000;
  ExemplarPolicy exemplar_policy = ExemplarPolicy::herding;
  // L2-normalize penultimate features before herding and class-centre matching.
  bool normalize_features = false;

  std::vector<std::size_t> hidden{64};
  double head_init_scale = 0.05;
  Schedule schedule;

  std::size_t expert_full_epochs = 80;
  std::size_t expert_balanced_epochs = 40;
  ExpertInitMode expert_init = ExpertInitMode::warm;

  std::uint64_t seed = 0;

  void validate() const;
  ExpertSchedule expert_schedule() const;
};

struct EngineState {
  std::optional<MlpClassifier> model;
  // Output position -> class id of the current model.
  std::vector<ClassId> class_order;
  ExemplarMemory memory{0};
  std::size_t rounds_done = 0;
};

EngineState make_state(const MethodConfig& cfg);

// What happened inside one round, for reporting and tests.
struct RoundLog {
  SimilarAssignment similar;
  std::optional<ExpertBundle> expert;
  std::vector<double> epoch_losses;
  std::vector<double> minibatch_losses;
};

// Seed for one randomness consumer of one round.
enum class SeedStream : std::uint64_t { init = 0, student = 1, head = 2, expert = 3, exemplars = 4 };
std::uint64_t round_seed(std::uint64_t base, std::size_t round, SeedStream stream);

// Learns the classes of `round`. The first round trains a fresh classifier with
// cross-entropy; later rounds warm-start from the previous classifier with an
// expanded head and train on the new data plus every stored exemplar under
// cross-entropy + lambda1 * old distillation + lambda2 * expert distillation.
RoundLog run_round(EngineState& state, const Dataset& dataset, const RoundSpec& round, const MethodConfig& cfg);

// Class predictions for the rows of `batch`. Ties go to the lowest class id.
std::vector<ClassId> predict(const EngineState& state, const Dataset& dataset, const Matrix& batch,
                             InferenceRule rule);

// Test-set evaluation over every class learned so far.
RoundReport evaluate(const EngineState& state, const Dataset& dataset, InferenceRule rule, const MetaClassMap& meta);

using RoundCallback = std::function<void(const EngineState&, const RoundReport&)>;

std::vector<RoundReport> run_experiment(const Dataset& dataset, const std::vector<RoundSpec>& rounds,
                                        const MethodConfig& cfg, const RoundCallback& on_round = {});

}  // namespace ddcl
