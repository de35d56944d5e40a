#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aqa/action_space.hpp"
#include "aqa/agents.hpp"
#include "aqa/dataset.hpp"
#include "aqa/metrics.hpp"

namespace aqa {

/// True mean reward of every action in every context under the simulator,
/// used as reference lines next to the learned estimates. Indexed [label][action].
struct ReferenceTable {
  std::vector<std::vector<double>> expected_f1;
  std::vector<std::vector<double>> expected_penalty;
  std::vector<std::vector<double>> expected_reward;
  std::vector<ActionId> best_action;
  std::vector<double> best_reward;
};

/// Exact expected F1 of a graph: enumerates every correctness outcome of the
/// active agents in topological order and resolves the vote. Exact for
/// f1_dispersion = 0; with dispersion the copy rule is evaluated at the mean.
double expected_f1(const StrategyGraph& graph, const SimulatorBackend& sim,
                   std::string_view context_label);

/// E[T(S)] for the graph's critical-path latency. Closed form (log-normal
/// partial expectation) for single-agent graphs, seeded Monte Carlo otherwise.
double expected_penalty(const StrategyGraph& graph, const SimulatorBackend& sim,
                        std::string_view context_label, const PenaltySchedule& schedule,
                        std::size_t samples = 20000, std::uint64_t seed = 0);

ReferenceTable reference_rewards(const ActionSpace& space, const SimulatorBackend& sim,
                                 const LabelSchema& schema, const RewardConfig& cfg,
                                 std::size_t samples = 20000, std::uint64_t seed = 0);

struct CalibrationRow {
  std::string agent;
  std::string label;
  double target_f1 = 0.0;
  double observed_f1 = 0.0;
  double target_latency_s = 0.0;
  double observed_latency_s = 0.0;
  bool within_tolerance = false;
};

/// Draws `samples` single-agent answers per (agent, label) cell against a
/// one-token gold and compares the sample means with the profile.
std::vector<CalibrationRow> calibration_check(std::span<const AgentProfile> profiles,
                                              std::size_t samples, std::uint64_t seed,
                                              double f1_tolerance = 0.02,
                                              double latency_rel_tolerance = 0.02);

}  // namespace aqa
