#include "aqa/reinforce.hpp"

#include <algorithm>
#include <cmath>

#include "aqa/error.hpp"

namespace aqa {

namespace {

std::size_t dense(NodeIndex node, std::size_t n) { return node == kFinalNode ? n : node; }

// Edge u->v lies on a cycle iff u is reachable from v.
bool on_cycle(const CandidateGraph& g, const Edge& e) {
  const auto n = g.num_agents;
  std::vector<std::vector<std::size_t>> adj(n + 1);
  for (const auto& x : g.edges) adj[dense(x.from, n)].push_back(dense(x.to, n));
  std::vector<bool> seen(n + 1, false);
  std::vector<std::size_t> todo{dense(e.to, n)};
  const auto target = dense(e.from, n);
  while (!todo.empty()) {
    const auto u = todo.back();
    todo.pop_back();
    if (u == target) return true;
    if (seen[u]) continue;
    seen[u] = true;
    for (auto v : adj[u]) todo.push_back(v);
  }
  return false;
}

std::vector<bool> reaches_final(const CandidateGraph& g) {
  const auto n = g.num_agents;
  std::vector<bool> ok(n + 1, false);
  ok[n] = true;
  // Fixed point; graphs here are tiny.
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& e : g.edges)
      if (!ok[dense(e.from, n)] && ok[dense(e.to, n)]) {
        ok[dense(e.from, n)] = true;
        changed = true;
      }
  }
  return ok;
}

}  // namespace

EdgePolicy::EdgePolicy(std::size_t num_agents, double learning_rate, double initial_prob)
    : EdgePolicy(num_agents, candidate_edges(num_agents), learning_rate, initial_prob) {}

EdgePolicy::EdgePolicy(std::size_t num_agents, std::vector<Edge> candidates, double learning_rate,
                       double initial_prob)
    : num_agents_(num_agents), edges_(std::move(candidates)), learning_rate_(learning_rate) {
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::config, "learning rate must be > 0");
  if (!(initial_prob >= 0.0 && initial_prob <= 1.0))
    throw Error(ErrorKind::config, "initial edge probability must be in [0, 1]");
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  for (const auto& e : edges_) {
    if (e.from == kFinalNode || e.from == e.to)
      throw Error(ErrorKind::config, "candidate edges may not leave the final node or self-loop");
    if (e.from >= num_agents || (e.to != kFinalNode && e.to >= num_agents))
      throw Error(ErrorKind::config, "candidate edge outside the agent set");
  }
  probs_.assign(edges_.size(), initial_prob);
}

std::size_t EdgePolicy::index_of(const Edge& e) const {
  auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
  if (it == edges_.end() || *it != e)
    throw Error(ErrorKind::invalid_input, "edge is not a candidate of this policy");
  return static_cast<std::size_t>(it - edges_.begin());
}

double EdgePolicy::probability(const Edge& e) const { return probs_[index_of(e)]; }

void EdgePolicy::set_probability(const Edge& e, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_input, "probability outside [0, 1]");
  probs_[index_of(e)] = p;
}

void EdgePolicy::reinforce_step(const CandidateGraph& sampled, double reward, double baseline) {
  if (!std::isfinite(reward) || !std::isfinite(baseline))
    throw Error(ErrorKind::invalid_input, "reward and baseline must be finite");
  const double advantage = reward - baseline;
  if (advantage == 0.0) return;
  auto included = sampled.edges;
  std::sort(included.begin(), included.end());
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const double indicator =
        std::binary_search(included.begin(), included.end(), edges_[i]) ? 1.0 : 0.0;
    const double q = probs_[i] + learning_rate_ * advantage * (indicator - probs_[i]);
    probs_[i] = std::clamp(q, kEpsilon, 1.0 - kEpsilon);
  }
}

CandidateGraph sample_edges(const EdgePolicy& policy, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  CandidateGraph g{policy.num_agents(), {}};
  const auto& edges = policy.edges();
  const auto& probs = policy.probabilities();
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (unit(rng) < probs[i]) g.edges.push_back(edges[i]);
  return g;
}

CandidateGraph repair(CandidateGraph g, const EdgePolicy& policy) {
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());

  for (;;) {
    auto it = std::find_if(g.edges.begin(), g.edges.end(),
                           [&](const Edge& e) { return on_cycle(g, e); });
    if (it == g.edges.end()) break;
    g.edges.erase(it);
  }

  const bool fed = std::any_of(g.edges.begin(), g.edges.end(),
                               [](const Edge& e) { return e.to == kFinalNode; });
  if (!fed) {
    const Edge* best = nullptr;
    double best_p = -1.0;
    for (std::size_t i = 0; i < policy.edges().size(); ++i) {
      const auto& e = policy.edges()[i];
      if (e.to == kFinalNode && policy.probabilities()[i] > best_p) {
        best = &e;
        best_p = policy.probabilities()[i];
      }
    }
    if (!best) throw Error(ErrorKind::config, "policy has no agent->final candidate edge");
    g.edges.insert(std::upper_bound(g.edges.begin(), g.edges.end(), *best), *best);
  }

  for (;;) {
    const auto ok = reaches_final(g);
    auto it = std::find_if(g.edges.begin(), g.edges.end(), [&](const Edge& e) {
      return !ok[dense(e.from, g.num_agents)] || !ok[dense(e.to, g.num_agents)];
    });
    if (it == g.edges.end()) break;
    g.edges.erase(it);
  }
  return g;
}

const StrategyGraph& sample_graph(const EdgePolicy& policy, const ActionSpace& space, Rng& rng) {
  return space.lookup(repair(sample_edges(policy, rng), policy));
}

CandidateGraph prune_edges(const EdgePolicy& policy) {
  CandidateGraph g{policy.num_agents(), {}};
  for (std::size_t i = 0; i < policy.edges().size(); ++i)
    if (policy.probabilities()[i] >= 0.5) g.edges.push_back(policy.edges()[i]);
  return repair(std::move(g), policy);
}

const StrategyGraph& prune(const EdgePolicy& policy, const ActionSpace& space) {
  return space.lookup(prune_edges(policy));
}

MovingAverageBaseline::MovingAverageBaseline(std::size_t window) : window_(window) {
  if (window == 0) throw Error(ErrorKind::config, "baseline window must be >= 1");
}

double MovingAverageBaseline::value() const noexcept {
  if (recent_.empty()) return 0.0;
  double sum = 0.0;
  for (double r : recent_) sum += r;
  return sum / static_cast<double>(recent_.size());
}

void MovingAverageBaseline::push(double reward) {
  recent_.push_back(reward);
  if (recent_.size() > window_) recent_.pop_front();
}

}  // namespace aqa
