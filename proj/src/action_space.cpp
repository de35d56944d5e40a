#include "aqa/action_space.hpp"

#include <algorithm>
#include <cstdint>
#include <set>
#include <sstream>

#include "aqa/error.hpp"

namespace aqa {

namespace {

// Dense node numbering for the graph algorithms: agents 0..n-1, final = n.
std::size_t dense(NodeIndex node, std::size_t n) { return node == kFinalNode ? n : node; }

void check_well_formed(const CandidateGraph& g) {
  for (const auto& e : g.edges) {
    const bool from_ok = e.from == kFinalNode || e.from < g.num_agents;
    const bool to_ok = e.to == kFinalNode || e.to < g.num_agents;
    if (!from_ok || !to_ok)
      throw Error(ErrorKind::invalid_input, "edge references a node outside the agent set");
  }
}

std::vector<std::vector<std::size_t>> adjacency(const CandidateGraph& g) {
  std::vector<std::vector<std::size_t>> adj(g.num_agents + 1);
  for (const auto& e : g.edges)
    adj[dense(e.from, g.num_agents)].push_back(dense(e.to, g.num_agents));
  return adj;
}

bool has_cycle(const std::vector<std::vector<std::size_t>>& adj) {
  enum class Mark : std::uint8_t { none, open, done };
  std::vector<Mark> mark(adj.size(), Mark::none);
  // Iterative DFS with an explicit (node, next-child) stack.
  for (std::size_t root = 0; root < adj.size(); ++root) {
    if (mark[root] != Mark::none) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    mark[root] = Mark::open;
    while (!stack.empty()) {
      auto& [u, i] = stack.back();
      if (i < adj[u].size()) {
        const auto v = adj[u][i++];
        if (mark[v] == Mark::open) return true;
        if (mark[v] == Mark::none) {
          mark[v] = Mark::open;
          stack.emplace_back(v, 0);
        }
      } else {
        mark[u] = Mark::done;
        stack.pop_back();
      }
    }
  }
  return false;
}

// Nodes with a directed path to `target` (target included).
std::vector<bool> reaches(const std::vector<std::vector<std::size_t>>& adj, std::size_t target) {
  std::vector<std::vector<std::size_t>> rev(adj.size());
  for (std::size_t u = 0; u < adj.size(); ++u)
    for (auto v : adj[u]) rev[v].push_back(u);
  std::vector<bool> seen(adj.size(), false);
  std::vector<std::size_t> todo{target};
  seen[target] = true;
  while (!todo.empty()) {
    const auto v = todo.back();
    todo.pop_back();
    for (auto u : rev[v])
      if (!seen[u]) {
        seen[u] = true;
        todo.push_back(u);
      }
  }
  return seen;
}

std::string encode(const std::vector<Edge>& edges) {
  std::ostringstream out;
  bool first = true;
  for (const auto& e : edges) {
    if (!first) out << ';';
    first = false;
    auto node = [&](NodeIndex n) {
      if (n == kFinalNode)
        out << 'F';
      else
        out << n;
    };
    node(e.from);
    out << '>';
    node(e.to);
  }
  return out.str();
}

bool canonical_less(const StrategyGraph& a, const StrategyGraph& b) {
  if (a.edges().size() != b.edges().size()) return a.edges().size() < b.edges().size();
  return a.edges() < b.edges();
}

}  // namespace

std::string_view to_string(Constraint c) {
  switch (c) {
    case Constraint::cycle: return "cycle";
    case Constraint::final_degree: return "final-degree";
    case Constraint::orphan_island: return "orphan-island";
  }
  return "unknown";
}

bool Verdict::violates(Constraint c) const {
  return std::find(violations.begin(), violations.end(), c) != violations.end();
}

Verdict validate_graph(const CandidateGraph& g) {
  check_well_formed(g);
  const auto n = g.num_agents;
  const auto adj = adjacency(g);
  Verdict verdict;

  if (has_cycle(adj)) verdict.violations.push_back(Constraint::cycle);

  std::size_t final_in = 0;
  const std::size_t final_out = adj[n].size();
  for (const auto& e : g.edges)
    if (e.to == kFinalNode) ++final_in;
  if (final_in == 0 || final_out != 0) verdict.violations.push_back(Constraint::final_degree);

  std::vector<std::size_t> degree(n + 1, 0);
  for (const auto& e : g.edges) {
    ++degree[dense(e.from, n)];
    ++degree[dense(e.to, n)];
  }
  const auto to_final = reaches(adj, n);
  for (std::size_t a = 0; a < n; ++a)
    if (degree[a] > 0 && !to_final[a]) {
      verdict.violations.push_back(Constraint::orphan_island);
      break;
    }
  return verdict;
}

CanonicalKey canonical_form(const CandidateGraph& g) {
  check_well_formed(g);
  const auto to_final = reaches(adjacency(g), g.num_agents);
  std::vector<Edge> kept;
  for (const auto& e : g.edges)
    if (to_final[dense(e.from, g.num_agents)] && to_final[dense(e.to, g.num_agents)])
      kept.push_back(e);
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  return encode(kept);
}

std::vector<Edge> candidate_edges(std::size_t num_agents) {
  std::vector<Edge> edges;
  for (NodeIndex i = 0; i < num_agents; ++i) {
    for (NodeIndex j = 0; j < num_agents; ++j)
      if (i != j) edges.push_back({i, j});
    edges.push_back({i, kFinalNode});
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

StrategyGraph::StrategyGraph(std::vector<AgentId> agents, std::vector<Edge> edges, ActionId id)
    : agents_(std::move(agents)), edges_(std::move(edges)), id_(id) {
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  const auto verdict = validate_graph(as_candidate());
  if (!verdict.valid())
    throw Error(ErrorKind::invalid_input,
                "strategy graph violates " + std::string(to_string(verdict.violations.front())));
}

bool StrategyGraph::has_edge(Edge e) const {
  return std::binary_search(edges_.begin(), edges_.end(), e);
}

std::vector<NodeIndex> StrategyGraph::in_neighbors(NodeIndex node) const {
  std::vector<NodeIndex> out;
  for (const auto& e : edges_)
    if (e.to == node) out.push_back(e.from);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeIndex> StrategyGraph::active_agents() const {
  std::set<NodeIndex> nodes;
  for (const auto& e : edges_) {
    if (e.from != kFinalNode) nodes.insert(e.from);
    if (e.to != kFinalNode) nodes.insert(e.to);
  }
  return {nodes.begin(), nodes.end()};
}

std::string StrategyGraph::node_name(NodeIndex n) const {
  return n == kFinalNode ? std::string("final") : agents_.at(n).name;
}

std::string StrategyGraph::describe() const {
  std::string out;
  for (const auto& e : edges_) {
    if (!out.empty()) out += ", ";
    out += node_name(e.from) + "->" + node_name(e.to);
  }
  return out;
}

ActionSpace::ActionSpace(std::vector<AgentId> agents, std::vector<StrategyGraph> graphs)
    : agents_(std::move(agents)), graphs_(std::move(graphs)) {
  for (std::size_t i = 0; i < graphs_.size(); ++i) {
    if (graphs_[i].action_id().value != i)
      throw Error(ErrorKind::config, "action ids must equal their position");
    if (!by_key_.emplace(graphs_[i].key(), ActionId{i}).second)
      throw Error(ErrorKind::config, "duplicate execution pattern in action space");
  }
}

std::vector<ActionId> ActionSpace::ids() const {
  std::vector<ActionId> ids;
  for (std::size_t i = 0; i < graphs_.size(); ++i) ids.push_back(ActionId{i});
  return ids;
}

std::optional<ActionId> ActionSpace::find(const CanonicalKey& key) const {
  auto it = by_key_.find(key);
  if (it == by_key_.end()) return std::nullopt;
  return it->second;
}

const StrategyGraph& ActionSpace::lookup(const CandidateGraph& g) const {
  const auto id = find(canonical_form(g));
  if (!id) throw Error(ErrorKind::unknown_action, "graph is not in the action space");
  return graphs_[id->value];
}

ActionSpace enumerate_action_space(std::vector<AgentId> agents,
                                   const EnumerationOptions& options) {
  if (agents.empty()) throw Error(ErrorKind::config, "agent list is empty");
  for (std::size_t i = 0; i < agents.size(); ++i)
    if (agents[i].index != i)
      throw Error(ErrorKind::config, "agent indices must be contiguous from 0");
  const std::size_t n = agents.size();
  if (n > 62) throw Error(ErrorKind::config, "too many agents to enumerate");

  std::vector<Edge> cand;
  for (const auto& e : candidate_edges(n))
    if (!options.edge_allowed || options.edge_allowed(e)) cand.push_back(e);

  // Backtracking over include/exclude decisions in candidate order. `reach[u]`
  // is the transitive closure as a bitset over dense nodes, so an inclusion
  // u->v closes a cycle exactly when v already reaches u.
  const std::size_t fin = n;
  auto bit = [](std::size_t k) { return std::uint64_t{1} << k; };
  std::vector<Edge> chosen;
  std::set<CanonicalKey> seen;
  std::vector<std::vector<Edge>> found;

  auto leaf = [&](const std::vector<std::uint64_t>& reach) {
    bool final_fed = false;
    std::uint64_t touched = 0;
    for (const auto& e : chosen) {
      if (e.to == kFinalNode) final_fed = true;
      touched |= bit(dense(e.from, n)) | bit(dense(e.to, n));
    }
    if (!final_fed) return;
    for (std::size_t a = 0; a < n; ++a)
      if ((touched & bit(a)) && !(reach[a] & bit(fin))) return;
    CandidateGraph g{n, chosen};
    for (const auto& pred : options.predicates)
      if (!pred(g)) return;
    if (seen.insert(canonical_form(g)).second) found.push_back(chosen);
  };

  std::function<void(std::size_t, const std::vector<std::uint64_t>&)> recurse =
      [&](std::size_t k, const std::vector<std::uint64_t>& reach) {
        if (k == cand.size()) {
          leaf(reach);
          return;
        }
        recurse(k + 1, reach);  // exclude

        if (options.max_edges && chosen.size() >= *options.max_edges) return;
        const auto u = dense(cand[k].from, n);
        const auto v = dense(cand[k].to, n);
        if (reach[v] & bit(u)) return;  // would close a cycle
        auto next = reach;
        const std::uint64_t gained = reach[v] | bit(v);
        for (std::size_t w = 0; w <= n; ++w)
          if (w == u || (reach[w] & bit(u))) next[w] |= gained;
        chosen.push_back(cand[k]);
        recurse(k + 1, next);
        chosen.pop_back();
      };
  recurse(0, std::vector<std::uint64_t>(n + 1, 0));

  std::vector<StrategyGraph> graphs;
  graphs.reserve(found.size());
  for (auto& edges : found) graphs.emplace_back(agents, std::move(edges), ActionId{0});
  std::sort(graphs.begin(), graphs.end(), canonical_less);
  std::vector<StrategyGraph> numbered;
  numbered.reserve(graphs.size());
  for (std::size_t i = 0; i < graphs.size(); ++i)
    numbered.emplace_back(agents, graphs[i].edges(), ActionId{i});
  return ActionSpace(std::move(agents), std::move(numbered));
}

std::vector<AgentId> make_agents(std::span<const std::string> names) {
  std::vector<AgentId> out;
  for (std::size_t i = 0; i < names.size(); ++i) out.push_back({i, names[i]});
  return out;
}

nlohmann::json to_json(const StrategyGraph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : g.edges()) edges.push_back({g.node_name(e.from), g.node_name(e.to)});
  return {{"action_id", g.action_id().value}, {"edges", edges}};
}

}  // namespace aqa
