#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aqa/action_space.hpp"
#include "aqa/agents.hpp"
#include "aqa/dataset.hpp"
#include "aqa/harness.hpp"
#include "aqa/metrics.hpp"

namespace aqa {

struct Config {
  struct ActionSpaceSection {
    std::string mode = "individual";  // "individual" or "collaborative"
    std::optional<std::size_t> max_edges;
    std::vector<std::string> agents{"NoR", "OneR", "IRCoT"};
  } action_space;

  struct BanditSection {
    double alpha = 2.0;
    std::optional<std::size_t> d;
  } bandit;

  struct RewardSection {
    std::optional<double> beta;
    std::optional<std::string> penalty_preset;
  } reward;

  struct TrainSection {
    std::optional<std::size_t> epochs;
    std::uint64_t seed = 0;
  } train;

  struct BaselineSection {
    std::size_t epochs = 200;
    double learning_rate = 0.01;
    std::size_t window = 50;
    double initial_prob = 0.5;
  } baseline;

  struct BackendSection {
    std::string kind = "simulator";  // "simulator" or "remote"
    std::optional<std::filesystem::path> profile;
    double upstream_copy_factor = 0.0;
    std::map<std::string, std::string> endpoints;
    double timeout_s = 30.0;
  } backend;

  struct DataSection {
    std::optional<std::filesystem::path> train;
    std::optional<std::filesystem::path> test;
    std::size_t train_per_label = 70;
    std::size_t test_per_label = 17;
    std::vector<std::string> labels{"A", "B", "C"};
    std::uint64_t seed = 0;
  } data;

  struct DiagnosticsSection {
    std::size_t stride = 1;
    std::size_t selection_window = 100;
  } diagnostics;
};

/// Unknown keys are rejected so that typos surface as config errors.
Config parse_config(const nlohmann::json& doc);
Config load_config(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const Config& cfg);

LabelSchema label_schema(const Config& cfg);
ActionSpace make_action_space(const Config& cfg);
/// Preset defaults to the action-space mode; beta defaults to 0.5, or 1 when
/// the preset is "none".
RewardConfig reward_config(const Config& cfg);
std::size_t train_epochs(const Config& cfg);
TrainOptions train_options(const Config& cfg);
BaselineOptions baseline_options(const Config& cfg);

std::vector<AgentProfile> simulator_profiles(const Config& cfg);
std::unique_ptr<AgentBackend> make_backend(const Config& cfg);
/// Simulator described by the config; empty for remote backends.
std::optional<SimulatorBackend> make_simulator(const Config& cfg);

struct Splits {
  std::vector<QuestionRecord> train;
  std::vector<QuestionRecord> test;
  std::vector<std::string> warnings;
};
/// Loads the configured JSONL files, or generates balanced synthetic splits.
Splits load_splits(const Config& cfg);

}  // namespace aqa
