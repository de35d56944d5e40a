#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "aqa/action_space.hpp"
#include "aqa/agents.hpp"
#include "aqa/dataset.hpp"
#include "aqa/executor.hpp"
#include "aqa/linucb.hpp"
#include "aqa/metrics.hpp"
#include "aqa/reinforce.hpp"

namespace aqa {

struct EpisodeRecord {
  std::size_t timestep = 0;
  std::size_t epoch = 0;
  std::string question_id;
  std::string context_label;
  ContextVector context{std::vector<double>{0.0}};
  ActionId action;
  double f1 = 0.0;
  double latency_s = 0.0;
  double reward = 0.0;
  bool failed = false;
  /// Score of every action at selection time, canonical order. May be empty.
  std::vector<double> ucb_scores;
};

struct TrainOptions {
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
  bool record_ucb_scores = true;
};

struct TrainResult {
  BanditModel model;
  std::vector<EpisodeRecord> episodes;
};

/// Runs epochs x |questions| bandit steps. The question order is reshuffled
/// each epoch from the seed; the bandit state carries over between epochs.
TrainResult train(std::span<const QuestionRecord> questions, const LabelSchema& schema,
                  const ActionSpace& space, BanditModel model, const AgentBackend& backend,
                  const RewardConfig& reward_cfg, const TrainOptions& options);

struct MetricSummary {
  std::string label;
  std::size_t count = 0;
  double mean_f1 = 0.0;
  double mean_latency_s = 0.0;
  double mean_reward = 0.0;
};

struct EvaluationReport {
  std::string name;
  std::vector<MetricSummary> per_context;
  MetricSummary overall;
  std::vector<ActionId> selections;
};

/// Greedy (alpha = 0) selection per question. Episode streams depend only on
/// the seed and question position, so two policies evaluated with the same
/// seed see the same agent draws for the same agent on the same question.
EvaluationReport evaluate(std::span<const QuestionRecord> questions, const LabelSchema& schema,
                          const ActionSpace& space, const BanditModel& model,
                          const AgentBackend& backend, const RewardConfig& reward_cfg,
                          std::uint64_t seed, std::string name = "AQA");

EvaluationReport evaluate(std::span<const QuestionRecord> questions, const LabelSchema& schema,
                          const StrategyGraph& graph, const AgentBackend& backend,
                          const RewardConfig& reward_cfg, std::uint64_t seed,
                          std::string name = "fixed");

nlohmann::ordered_json to_json(const EvaluationReport& report);

/// Side-by-side comparison: one column pair (F1, time) per report, one row
/// per context plus "Overall".
nlohmann::ordered_json comparison_table(std::span<const EvaluationReport> reports,
                                        const LabelSchema& schema);

struct BaselineOptions {
  std::size_t epochs = 200;
  double learning_rate = 0.01;
  std::size_t window = 50;
  double initial_prob = 0.5;
  std::uint64_t seed = 0;
};

struct BaselineResult {
  EdgePolicy policy;
  ActionId pruned;
  /// Row 0 is the initial policy, row k the policy after epoch k.
  std::vector<std::vector<double>> epoch_probabilities;
  std::vector<double> epoch_mean_reward;
};

/// Context-blind REINFORCE over edge probabilities on the full candidate set.
BaselineResult train_baseline(std::span<const QuestionRecord> questions, const ActionSpace& space,
                              const AgentBackend& backend, const RewardConfig& reward_cfg,
                              const BaselineOptions& options);

void write_edge_probabilities_csv(std::ostream& out, const BaselineResult& result,
                                  const ActionSpace& space);

void write_episodes_csv(std::ostream& out, std::span<const EpisodeRecord> episodes);
std::vector<EpisodeRecord> read_episodes_csv(std::istream& in);

struct ModalSelection {
  ActionId action;
  double frequency = 0.0;
  std::size_t window = 0;
};

/// Most selected action among the last `last_n` episodes with this label
/// (ties: smallest id). Throws if no episode carries the label.
ModalSelection modal_selection(std::span<const EpisodeRecord> episodes, std::string_view label,
                               std::size_t last_n = 100);

/// Recomputes every record's reward from its f1 and latency; returns the
/// indices of records that differ bitwise.
std::vector<std::size_t> audit_rewards(std::span<const EpisodeRecord> episodes,
                                       const RewardConfig& reward_cfg);

}  // namespace aqa
