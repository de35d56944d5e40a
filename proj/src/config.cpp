#include "aqa/config.hpp"

#include <fstream>
#include <set>

#include "aqa/error.hpp"
#include "aqa/rng.hpp"

namespace aqa {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::unknown_action: return "unknown_action";
    case ErrorKind::invalid_input: return "invalid_input";
    case ErrorKind::dataset: return "dataset";
    case ErrorKind::io: return "io";
    case ErrorKind::backend_timeout: return "backend_timeout";
    case ErrorKind::backend_unreachable: return "backend_unreachable";
    case ErrorKind::backend_protocol: return "backend_protocol";
  }
  return "unknown";
}

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::config, msg); }

const json& section(const json& doc, const char* name, std::initializer_list<const char*> keys) {
  static const json empty = json::object();
  if (!doc.contains(name)) return empty;
  const json& s = doc.at(name);
  if (!s.is_object()) fail(std::string(name) + " must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = s.begin(); it != s.end(); ++it)
    if (!allowed.count(it.key())) fail("unknown key " + std::string(name) + "." + it.key());
  return s;
}

template <class T>
void read(const json& s, const char* section_name, const char* key, T& out) {
  if (!s.contains(key)) return;
  try {
    out = s.at(key).get<T>();
  } catch (const json::exception&) {
    fail(std::string("bad value for ") + section_name + "." + key);
  }
}

template <class T>
void read(const json& s, const char* section_name, const char* key, std::optional<T>& out) {
  if (!s.contains(key) || s.at(key).is_null()) return;
  T v{};
  read(s, section_name, key, v);
  out = v;
}

void read_path(const json& s, const char* section_name, const char* key,
               std::optional<std::filesystem::path>& out) {
  std::optional<std::string> v;
  read(s, section_name, key, v);
  if (v) out = *v;
}

}  // namespace

Config parse_config(const json& doc) {
  if (!doc.is_object()) fail("config must be a JSON object");
  static const std::set<std::string> top{"action_space", "bandit",   "reward", "train",
                                         "baseline",     "backend",  "data",   "diagnostics"};
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (!top.count(it.key())) fail("unknown key " + it.key());

  Config c;
  const auto& as = section(doc, "action_space", {"mode", "max_edges", "agents"});
  read(as, "action_space", "mode", c.action_space.mode);
  read(as, "action_space", "max_edges", c.action_space.max_edges);
  read(as, "action_space", "agents", c.action_space.agents);
  if (c.action_space.mode != "individual" && c.action_space.mode != "collaborative")
    fail("action_space.mode must be individual or collaborative");
  if (c.action_space.agents.empty()) fail("action_space.agents is empty");

  const auto& bd = section(doc, "bandit", {"alpha", "d"});
  read(bd, "bandit", "alpha", c.bandit.alpha);
  read(bd, "bandit", "d", c.bandit.d);

  const auto& rw = section(doc, "reward", {"beta", "penalty_preset"});
  read(rw, "reward", "beta", c.reward.beta);
  read(rw, "reward", "penalty_preset", c.reward.penalty_preset);

  const auto& tr = section(doc, "train", {"epochs", "seed"});
  read(tr, "train", "epochs", c.train.epochs);
  read(tr, "train", "seed", c.train.seed);

  const auto& bl = section(doc, "baseline", {"epochs", "learning_rate", "window", "initial_prob"});
  read(bl, "baseline", "epochs", c.baseline.epochs);
  read(bl, "baseline", "learning_rate", c.baseline.learning_rate);
  read(bl, "baseline", "window", c.baseline.window);
  read(bl, "baseline", "initial_prob", c.baseline.initial_prob);

  if (doc.contains("backend")) {
    const auto& be = doc.at("backend");
    if (!be.is_object() || be.size() != 1 || !(be.contains("simulator") || be.contains("remote")))
      fail("backend must hold exactly one of simulator or remote");
    if (be.contains("simulator")) {
      const auto& s = section(be, "simulator", {"profile", "upstream_copy_factor"});
      read_path(s, "backend.simulator", "profile", c.backend.profile);
      read(s, "backend.simulator", "upstream_copy_factor", c.backend.upstream_copy_factor);
    } else {
      c.backend.kind = "remote";
      const auto& s = section(be, "remote", {"endpoints", "timeout_s"});
      read(s, "backend.remote", "endpoints", c.backend.endpoints);
      read(s, "backend.remote", "timeout_s", c.backend.timeout_s);
      if (c.backend.endpoints.empty()) fail("backend.remote.endpoints is empty");
      if (!(c.backend.timeout_s > 0.0)) fail("backend.remote.timeout_s must be > 0");
    }
  }

  const auto& dt = section(doc, "data", {"train", "test", "train_per_label", "test_per_label",
                                         "labels", "seed"});
  read_path(dt, "data", "train", c.data.train);
  read_path(dt, "data", "test", c.data.test);
  read(dt, "data", "train_per_label", c.data.train_per_label);
  read(dt, "data", "test_per_label", c.data.test_per_label);
  read(dt, "data", "labels", c.data.labels);
  read(dt, "data", "seed", c.data.seed);

  const auto& dg = section(doc, "diagnostics", {"stride", "selection_window"});
  read(dg, "diagnostics", "stride", c.diagnostics.stride);
  read(dg, "diagnostics", "selection_window", c.diagnostics.selection_window);

  if (c.bandit.d && *c.bandit.d != c.data.labels.size())
    throw Error(ErrorKind::dimension, "bandit.d = " + std::to_string(*c.bandit.d) +
                                          " but the label schema has " +
                                          std::to_string(c.data.labels.size()) + " labels");
  reward_config(c).validate();
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail("config " + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

nlohmann::ordered_json to_json(const Config& c) {
  nlohmann::ordered_json j;
  j["action_space"] = {{"mode", c.action_space.mode}, {"agents", c.action_space.agents}};
  if (c.action_space.max_edges) j["action_space"]["max_edges"] = *c.action_space.max_edges;
  j["bandit"] = {{"alpha", c.bandit.alpha}, {"d", label_schema(c).size()}};
  const auto rc = reward_config(c);
  j["reward"] = {{"beta", rc.beta}, {"penalty_preset", c.reward.penalty_preset.value_or(c.action_space.mode)}};
  j["train"] = {{"epochs", train_epochs(c)}, {"seed", c.train.seed}};
  j["baseline"] = {{"epochs", c.baseline.epochs},
                   {"learning_rate", c.baseline.learning_rate},
                   {"window", c.baseline.window},
                   {"initial_prob", c.baseline.initial_prob}};
  if (c.backend.kind == "simulator") {
    nlohmann::ordered_json s{{"upstream_copy_factor", c.backend.upstream_copy_factor}};
    if (c.backend.profile) s["profile"] = c.backend.profile->string();
    j["backend"] = {{"simulator", s}};
  } else {
    j["backend"] = {{"remote", {{"endpoints", c.backend.endpoints}, {"timeout_s", c.backend.timeout_s}}}};
  }
  j["data"] = {{"train_per_label", c.data.train_per_label},
               {"test_per_label", c.data.test_per_label},
               {"labels", c.data.labels},
               {"seed", c.data.seed}};
  if (c.data.train) j["data"]["train"] = c.data.train->string();
  if (c.data.test) j["data"]["test"] = c.data.test->string();
  j["diagnostics"] = {{"stride", c.diagnostics.stride},
                      {"selection_window", c.diagnostics.selection_window}};
  return j;
}

LabelSchema label_schema(const Config& cfg) { return LabelSchema(cfg.data.labels); }

ActionSpace make_action_space(const Config& cfg) {
  EnumerationOptions opts;
  opts.max_edges = cfg.action_space.max_edges;
  if (cfg.action_space.mode == "individual" && !opts.max_edges) opts.max_edges = 1;
  return enumerate_action_space(make_agents(cfg.action_space.agents), opts);
}

RewardConfig reward_config(const Config& cfg) {
  const auto preset = parse_penalty_preset(cfg.reward.penalty_preset.value_or(cfg.action_space.mode));
  const double beta = cfg.reward.beta.value_or(preset == PenaltyPreset::none ? 1.0 : 0.5);
  RewardConfig rc{beta, PenaltySchedule::preset(preset)};
  rc.validate();
  return rc;
}

std::size_t train_epochs(const Config& cfg) {
  return cfg.train.epochs.value_or(cfg.action_space.mode == "individual" ? 20 : 50);
}

TrainOptions train_options(const Config& cfg) {
  return {train_epochs(cfg), cfg.train.seed, true};
}

BaselineOptions baseline_options(const Config& cfg) {
  return {cfg.baseline.epochs, cfg.baseline.learning_rate, cfg.baseline.window,
          cfg.baseline.initial_prob, cfg.train.seed};
}

std::vector<AgentProfile> simulator_profiles(const Config& cfg) {
  auto profiles = cfg.backend.profile ? load_profiles(*cfg.backend.profile) : default_profiles();
  if (profiles.size() != cfg.action_space.agents.size())
    fail("profile has " + std::to_string(profiles.size()) + " agents but action_space.agents has " +
         std::to_string(cfg.action_space.agents.size()));
  for (std::size_t i = 0; i < profiles.size(); ++i)
    if (profiles[i].agent.name != cfg.action_space.agents[i])
      fail("profile agent " + std::to_string(i) + " is '" + profiles[i].agent.name +
           "', expected '" + cfg.action_space.agents[i] + "'");
  return profiles;
}

std::optional<SimulatorBackend> make_simulator(const Config& cfg) {
  if (cfg.backend.kind != "simulator") return std::nullopt;
  return SimulatorBackend(simulator_profiles(cfg), {cfg.backend.upstream_copy_factor});
}

std::unique_ptr<AgentBackend> make_backend(const Config& cfg) {
  if (cfg.backend.kind == "simulator")
    return std::make_unique<SimulatorBackend>(simulator_profiles(cfg),
                                              SimulatorOptions{cfg.backend.upstream_copy_factor});
  for (const auto& name : cfg.action_space.agents)
    if (!cfg.backend.endpoints.count(name)) fail("no remote endpoint for agent " + name);
  return std::make_unique<RemoteBackend>(cfg.backend.endpoints, cfg.backend.timeout_s);
}

Splits load_splits(const Config& cfg) {
  const auto schema = label_schema(cfg);
  Splits s;
  auto take = [&](const std::optional<std::filesystem::path>& path, std::size_t per_label,
                  std::uint64_t salt, const char* prefix, std::vector<QuestionRecord>& out) {
    if (path) {
      auto ds = load_dataset(*path, schema);
      for (auto& w : ds.warnings) s.warnings.push_back(path->string() + ": " + w);
      out = std::move(ds.records);
    } else {
      out = synthetic_questions(schema, per_label, derive_seed(cfg.data.seed, Stream::dataset, salt),
                                prefix);
    }
  };
  take(cfg.data.train, cfg.data.train_per_label, 0, "train", s.train);
  take(cfg.data.test, cfg.data.test_per_label, 1, "test", s.test);
  return s;
}

}  // namespace aqa
