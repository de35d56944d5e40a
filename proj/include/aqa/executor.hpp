#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aqa/action_space.hpp"
#include "aqa/agents.hpp"

namespace aqa {

struct ExecutionTrace {
  /// Keyed by agent index; only agents that were invoked appear.
  std::map<NodeIndex, AgentResponse> per_node;
  std::vector<NodeIndex> invocation_order;
  /// Completion time of each invoked agent on the critical-path clock.
  std::map<NodeIndex, double> finish_s;
  std::string final_answer;
  double total_latency_s = 0.0;

  bool any_failed() const;
};

struct ExecutionRequest {
  std::string_view question;
  std::span<const std::string> gold;
  std::string_view context_label;
  std::uint64_t episode_seed = 0;
};

struct ExecutionOptions {
  /// Run each wave of ready agents on separate threads. Results are identical
  /// to sequential execution because every agent draws from its own stream.
  bool concurrent = false;
};

/// Seed of the random stream agent `agent_index` uses within one episode.
std::uint64_t agent_stream_seed(std::uint64_t episode_seed, NodeIndex agent_index);

/// Invokes the graph's agents in topological order (ties by index), passing
/// in-neighbour responses upstream, and aggregates at the final node.
/// Total latency is the critical path: each agent starts when its last
/// in-neighbour finishes.
ExecutionTrace execute(const StrategyGraph& graph, const ExecutionRequest& request,
                       const AgentBackend& backend, const ExecutionOptions& options = {});

/// Lowercase, trim, collapse whitespace runs to one space.
std::string normalize_answer(std::string_view text);

/// Most frequent normalized answer. Empty answers (failed nodes) only win when
/// every answer is empty. Ties go to the answer given by the smallest agent
/// index. Throws on empty input.
std::string majority_vote(std::span<const std::pair<AgentId, std::string>> answers);

}  // namespace aqa
