#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aqa/action_space.hpp"
#include "aqa/rng.hpp"

namespace aqa {

/// Calibration target of one (agent, context) cell. Dispersions are
/// standard deviation of the per-question success probability and
/// coefficient of variation of latency, respectively.
struct ContextStats {
  double f1_mean = 0.0;
  double f1_dispersion = 0.0;
  double latency_mean_s = 1.0;
  double latency_dispersion = 0.1;
};

struct AgentProfile {
  AgentId agent;
  std::map<std::string, ContextStats, std::less<>> per_context;

  const ContextStats& at(std::string_view label) const;
};

struct UpstreamMessage {
  AgentId agent;
  std::string text;
};

struct AgentResponse {
  std::string text;
  double latency_s = 0.0;
  std::vector<UpstreamMessage> upstream_inputs;
  bool failed = false;
  std::string error;
};

/// Everything a backend may need for one agent call. Simulated backends use
/// `gold` and `stream_seed`; remote backends ignore both.
struct AnswerRequest {
  std::string_view question;
  std::span<const std::string> gold;
  std::string_view context_label;
  std::span<const UpstreamMessage> upstream;
  std::uint64_t stream_seed = 0;
};

class AgentBackend {
 public:
  virtual ~AgentBackend() = default;
  /// Must be safe to call concurrently for different requests.
  virtual AgentResponse answer(const AgentId& agent, const AnswerRequest& request) const = 0;
};

struct SimulatorOptions {
  /// When > 0, a call with upstream inputs succeeds with probability
  /// max(p, factor * best upstream F1). 0 disables the interaction.
  double upstream_copy_factor = 0.0;
};

/// Per-context F1 and mean latency of NoR, OneR and IRCoT on the training set.
std::vector<AgentProfile> default_profiles();

/// `{agent: {label: {f1_mean, latency_mean_s, f1_dispersion?, latency_dispersion?}}}`
/// Agent order follows the document.
std::vector<AgentProfile> parse_profiles(const nlohmann::ordered_json& doc);
std::vector<AgentProfile> load_profiles(const std::filesystem::path& path);
nlohmann::ordered_json profiles_to_json(std::span<const AgentProfile> profiles);

/// Token-disjoint from every gold answer and distinct per agent.
std::string distractor_for(const AgentId& agent, std::span<const std::string> gold);

/// Bernoulli gold-vs-distractor draw with success probability f1_mean and a
/// log-normal latency matched to latency_mean_s.
AgentResponse simulate_answer(const AgentProfile& profile, std::string_view context_label,
                              std::span<const std::string> gold, Rng& rng,
                              std::span<const UpstreamMessage> upstream = {},
                              const SimulatorOptions& options = {});

inline AgentResponse simulate_answer(const AgentProfile& profile, std::string_view context_label,
                                     const std::string& gold, Rng& rng) {
  return simulate_answer(profile, context_label, std::span<const std::string>(&gold, 1), rng);
}

/// Draws one latency sample from the cell's log-normal model.
double sample_latency(const ContextStats& stats, Rng& rng);

class SimulatorBackend final : public AgentBackend {
 public:
  explicit SimulatorBackend(std::vector<AgentProfile> profiles, SimulatorOptions options = {});

  AgentResponse answer(const AgentId& agent, const AnswerRequest& request) const override;

  const std::vector<AgentProfile>& profiles() const noexcept { return profiles_; }
  const SimulatorOptions& options() const noexcept { return options_; }
  const AgentProfile& profile(const AgentId& agent) const;
  std::vector<AgentId> agents() const;

 private:
  std::vector<AgentProfile> profiles_;
  SimulatorOptions options_;
};

/// POSTs {"question", "upstream": [{"agent","text"}]} to `endpoint` and expects
/// {"answer": str}. Throws BackendError on timeout, connection failure or a
/// malformed response; the error carries the elapsed wall-clock time.
AgentResponse remote_answer(const std::string& endpoint, std::string_view question,
                            std::span<const UpstreamMessage> upstream, double timeout_s);

class RemoteBackend final : public AgentBackend {
 public:
  RemoteBackend(std::map<std::string, std::string> endpoints, double timeout_s);

  AgentResponse answer(const AgentId& agent, const AnswerRequest& request) const override;

 private:
  std::map<std::string, std::string> endpoints_;
  double timeout_s_;
};

}  // namespace aqa
