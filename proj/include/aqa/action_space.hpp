#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aqa/linucb.hpp"

namespace aqa {

struct AgentId {
  std::size_t index = 0;
  std::string name;

  bool operator==(const AgentId&) const = default;
};

using NodeIndex = std::size_t;

/// The aggregation node. Sorts after every agent index.
inline constexpr NodeIndex kFinalNode = std::numeric_limits<NodeIndex>::max();

struct Edge {
  NodeIndex from = 0;
  NodeIndex to = 0;

  auto operator<=>(const Edge&) const = default;
};

/// An arbitrary edge set over `num_agents` agents plus the final node.
struct CandidateGraph {
  std::size_t num_agents = 0;
  std::vector<Edge> edges;
};

enum class Constraint { cycle, final_degree, orphan_island };

std::string_view to_string(Constraint c);

struct Verdict {
  std::vector<Constraint> violations;

  bool valid() const noexcept { return violations.empty(); }
  bool violates(Constraint c) const;
};

/// Checks acyclicity, final in-degree >= 1 with out-degree 0, and that every
/// agent with an edge reaches the final node.
Verdict validate_graph(const CandidateGraph& g);

/// Sorted edge-list encoding of the sub-DAG that actually executes (nodes with
/// no path to the final node dropped), e.g. "0>1;1>F".
using CanonicalKey = std::string;
CanonicalKey canonical_form(const CandidateGraph& g);

/// All ordered agent pairs and every agent->final edge, in canonical order.
std::vector<Edge> candidate_edges(std::size_t num_agents);

/// One action: a validated DAG over the agents and the final node.
class StrategyGraph {
 public:
  StrategyGraph(std::vector<AgentId> agents, std::vector<Edge> edges, ActionId id);

  ActionId action_id() const noexcept { return id_; }
  const std::vector<AgentId>& agents() const noexcept { return agents_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  bool has_edge(Edge e) const;
  std::vector<NodeIndex> in_neighbors(NodeIndex node) const;
  /// Agents that take part in execution (non-zero degree), ascending.
  std::vector<NodeIndex> active_agents() const;
  CandidateGraph as_candidate() const { return {agents_.size(), edges_}; }
  CanonicalKey key() const { return canonical_form(as_candidate()); }

  std::string node_name(NodeIndex n) const;
  /// Human-readable "NoR->final, OneR->final".
  std::string describe() const;

 private:
  std::vector<AgentId> agents_;
  std::vector<Edge> edges_;
  ActionId id_;
};

struct EnumerationOptions {
  std::optional<std::size_t> max_edges;
  /// Per-pair mask; edges it rejects never enter the candidate set.
  std::function<bool(const Edge&)> edge_allowed;
  /// Extra whole-graph constraints, all of which must hold.
  std::vector<std::function<bool(const CandidateGraph&)>> predicates;
};

/// Ordered, deduplicated action set with stable ids (index = id).
class ActionSpace {
 public:
  ActionSpace(std::vector<AgentId> agents, std::vector<StrategyGraph> graphs);

  std::size_t size() const noexcept { return graphs_.size(); }
  const StrategyGraph& operator[](ActionId id) const { return graphs_.at(id.value); }
  const std::vector<StrategyGraph>& graphs() const noexcept { return graphs_; }
  const std::vector<AgentId>& agents() const noexcept { return agents_; }
  std::vector<ActionId> ids() const;

  std::optional<ActionId> find(const CanonicalKey& key) const;
  /// Looks up a valid candidate graph; throws if it is not an action.
  const StrategyGraph& lookup(const CandidateGraph& g) const;

 private:
  std::vector<AgentId> agents_;
  std::vector<StrategyGraph> graphs_;
  std::map<CanonicalKey, ActionId> by_key_;
};

ActionSpace enumerate_action_space(std::vector<AgentId> agents,
                                   const EnumerationOptions& options = {});

/// Builds agent ids 0..n-1 from names.
std::vector<AgentId> make_agents(std::span<const std::string> names);

nlohmann::json to_json(const StrategyGraph& g);

}  // namespace aqa
