#include "aqa/reference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>

#include "aqa/error.hpp"
#include "aqa/rng.hpp"

namespace aqa {

namespace {

std::vector<NodeIndex> topological_order(const StrategyGraph& g) {
  const auto active = g.active_agents();
  std::map<NodeIndex, std::size_t> indeg;
  for (auto a : active) indeg[a] = g.in_neighbors(a).size();
  std::vector<NodeIndex> order;
  std::vector<NodeIndex> ready;
  for (auto a : active)
    if (indeg[a] == 0) ready.push_back(a);
  while (!ready.empty()) {
    std::sort(ready.begin(), ready.end(), std::greater<>());
    const auto u = ready.back();
    ready.pop_back();
    order.push_back(u);
    for (const auto& e : g.edges())
      if (e.from == u && e.to != kFinalNode && --indeg[e.to] == 0) ready.push_back(e.to);
  }
  return order;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// E[S * 1(lower < S <= upper)] for S log-normal with the cell's mean and CV.
double partial_expectation(const ContextStats& s, double lower, double upper) {
  const double m = s.latency_mean_s;
  if (s.latency_dispersion <= 0.0) return (m > lower && m <= upper) ? m : 0.0;
  const double sigma2 = std::log1p(s.latency_dispersion * s.latency_dispersion);
  const double sigma = std::sqrt(sigma2);
  const double mu = std::log(m) - 0.5 * sigma2;
  auto cdf_shifted = [&](double x) {
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    return normal_cdf((std::log(x) - mu - sigma2) / sigma);
  };
  return m * (cdf_shifted(upper) - cdf_shifted(lower));
}

}  // namespace

double expected_f1(const StrategyGraph& graph, const SimulatorBackend& sim,
                   std::string_view context_label) {
  const auto order = topological_order(graph);
  const auto voters = graph.in_neighbors(kFinalNode);
  const double copy = sim.options().upstream_copy_factor;
  const auto k = order.size();
  if (k > 20) throw Error(ErrorKind::invalid_input, "graph too large for exact enumeration");

  std::vector<double> base(k);
  std::vector<std::vector<std::size_t>> preds(k);
  std::map<NodeIndex, std::size_t> pos;
  for (std::size_t i = 0; i < k; ++i) pos[order[i]] = i;
  for (std::size_t i = 0; i < k; ++i) {
    base[i] = sim.profile(graph.agents()[order[i]]).at(context_label).f1_mean;
    for (auto p : graph.in_neighbors(order[i])) preds[i].push_back(pos.at(p));
  }

  // Correct answers are all the gold text, wrong ones are per-agent distinct
  // distractors: gold wins with >= 2 correct voters, or with exactly one when
  // that voter has the smallest index (all counts tie at 1).
  double total = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    double prob = 1.0;
    for (std::size_t i = 0; i < k && prob > 0.0; ++i) {
      double p = base[i];
      if (copy > 0.0) {
        const bool any_correct = std::any_of(preds[i].begin(), preds[i].end(),
                                             [&](std::size_t j) { return (mask >> j) & 1u; });
        if (any_correct) p = std::max(p, copy);
      }
      prob *= ((mask >> i) & 1u) ? p : 1.0 - p;
    }
    if (prob == 0.0) continue;
    std::size_t correct = 0;
    for (auto v : voters) correct += (mask >> pos.at(v)) & 1u;
    const bool gold_wins = correct >= 2 || (correct == 1 && ((mask >> pos.at(voters.front())) & 1u));
    if (gold_wins) total += prob;
  }
  return total;
}

double expected_penalty(const StrategyGraph& graph, const SimulatorBackend& sim,
                        std::string_view context_label, const PenaltySchedule& schedule,
                        std::size_t samples, std::uint64_t seed) {
  if (schedule.bands().empty()) return 0.0;
  const auto order = topological_order(graph);
  if (order.size() == 1) {
    const auto& s = sim.profile(graph.agents()[order.front()]).at(context_label);
    double t = 0.0;
    for (const auto& b : schedule.bands()) t += partial_expectation(s, b.lower_s, b.upper_s) / b.divisor;
    return t;
  }
  if (samples == 0) throw Error(ErrorKind::invalid_input, "need at least one latency sample");
  std::vector<const ContextStats*> stats;
  for (auto a : order) stats.push_back(&sim.profile(graph.agents()[a]).at(context_label));
  Rng rng(derive_seed(seed, Stream::reference, graph.action_id().value));
  double acc = 0.0;
  std::map<NodeIndex, double> finish;
  for (std::size_t n = 0; n < samples; ++n) {
    for (std::size_t i = 0; i < order.size(); ++i) {
      double start = 0.0;
      for (auto p : graph.in_neighbors(order[i])) start = std::max(start, finish[p]);
      finish[order[i]] = start + sample_latency(*stats[i], rng);
    }
    double total = 0.0;
    for (auto v : graph.in_neighbors(kFinalNode)) total = std::max(total, finish[v]);
    acc += schedule(total);
  }
  return acc / static_cast<double>(samples);
}

ReferenceTable reference_rewards(const ActionSpace& space, const SimulatorBackend& sim,
                                 const LabelSchema& schema, const RewardConfig& cfg,
                                 std::size_t samples, std::uint64_t seed) {
  ReferenceTable t;
  for (const auto& label : schema.labels()) {
    std::vector<double> f1, pen, rew;
    for (const auto& g : space.graphs()) {
      f1.push_back(expected_f1(g, sim, label));
      pen.push_back(expected_penalty(g, sim, label, cfg.schedule, samples, seed));
      rew.push_back(cfg.beta * f1.back() - (1.0 - cfg.beta) * pen.back());
    }
    const auto best = static_cast<std::size_t>(std::max_element(rew.begin(), rew.end()) - rew.begin());
    t.best_action.push_back(ActionId{best});
    t.best_reward.push_back(rew[best]);
    t.expected_f1.push_back(std::move(f1));
    t.expected_penalty.push_back(std::move(pen));
    t.expected_reward.push_back(std::move(rew));
  }
  return t;
}

std::vector<CalibrationRow> calibration_check(std::span<const AgentProfile> profiles,
                                              std::size_t samples, std::uint64_t seed,
                                              double f1_tolerance, double latency_rel_tolerance) {
  if (samples == 0) throw Error(ErrorKind::config, "calibration needs at least one sample");
  const std::string gold = "answer";
  std::vector<CalibrationRow> rows;
  std::uint64_t cell = 0;
  for (const auto& p : profiles) {
    for (const auto& [label, stats] : p.per_context) {
      Rng rng(derive_seed(seed, Stream::calibration, cell++));
      double f1 = 0.0, lat = 0.0;
      for (std::size_t i = 0; i < samples; ++i) {
        const auto r = simulate_answer(p, label, gold, rng);
        f1 += token_f1(r.text, gold);
        lat += r.latency_s;
      }
      CalibrationRow row{p.agent.name, label, stats.f1_mean, f1 / samples, stats.latency_mean_s,
                         lat / samples, false};
      row.within_tolerance =
          std::abs(row.observed_f1 - row.target_f1) <= f1_tolerance &&
          std::abs(row.observed_latency_s - row.target_latency_s) <=
              latency_rel_tolerance * row.target_latency_s;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace aqa
