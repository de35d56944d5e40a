#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "aqa/action_space.hpp"
#include "aqa/rng.hpp"

namespace aqa {

/// Independent inclusion probability per candidate edge.
class EdgePolicy {
 public:
  static constexpr double kEpsilon = 1e-3;

  /// Full candidate set over `num_agents` agents.
  EdgePolicy(std::size_t num_agents, double learning_rate, double initial_prob = 0.5);
  EdgePolicy(std::size_t num_agents, std::vector<Edge> candidates, double learning_rate,
             double initial_prob = 0.5);

  std::size_t num_agents() const noexcept { return num_agents_; }
  double learning_rate() const noexcept { return learning_rate_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<double>& probabilities() const noexcept { return probs_; }

  double probability(const Edge& e) const;
  /// Direct assignment in [0, 1]; unlike updates this is not clamped to epsilon.
  void set_probability(const Edge& e, double p);

  /// q <- clamp(q + lr * (reward - baseline) * (1[e in sampled] - q), eps, 1 - eps)
  void reinforce_step(const CandidateGraph& sampled, double reward, double baseline);

 private:
  std::size_t index_of(const Edge& e) const;

  std::size_t num_agents_;
  std::vector<Edge> edges_;
  std::vector<double> probs_;
  double learning_rate_;
};

/// Independent Bernoulli draw per candidate edge; no repair.
CandidateGraph sample_edges(const EdgePolicy& policy, Rng& rng);

/// Makes an arbitrary edge subset valid: drops cycle edges in canonical order,
/// forces the most probable agent->final edge if the final node is unfed, then
/// drops edges touching agents that cannot reach the final node.
CandidateGraph repair(CandidateGraph g, const EdgePolicy& policy);

/// sample_edges + repair, resolved to its action in `space`.
const StrategyGraph& sample_graph(const EdgePolicy& policy, const ActionSpace& space, Rng& rng);

/// Deployment graph: edges with probability >= 0.5, repaired.
const StrategyGraph& prune(const EdgePolicy& policy, const ActionSpace& space);
CandidateGraph prune_edges(const EdgePolicy& policy);

/// Mean of the last `window` rewards; 0 before any reward is recorded.
class MovingAverageBaseline {
 public:
  explicit MovingAverageBaseline(std::size_t window = 50);

  double value() const noexcept;
  void push(double reward);
  std::size_t window() const noexcept { return window_; }

 private:
  std::size_t window_;
  std::deque<double> recent_;
};

}  // namespace aqa
