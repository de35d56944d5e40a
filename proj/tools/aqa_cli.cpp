#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "aqa/config.hpp"
#include "aqa/diagnostics.hpp"
#include "aqa/error.hpp"
#include "aqa/harness.hpp"
#include "aqa/reference.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
};

struct CalibrationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void add_common(CLI::App* cmd, Common& c, bool with_out = true) {
  cmd->add_option("--config", c.config_path, "JSON config file");
  cmd->add_option("--seed", c.seed, "overrides train.seed");
  if (with_out) cmd->add_option("--out", c.out_dir, "output directory");
}

aqa::Config load(const Common& c) {
  aqa::Config cfg = c.config_path.empty() ? aqa::parse_config(nlohmann::json::object())
                                          : aqa::load_config(c.config_path);
  if (c.seed) cfg.train.seed = *c.seed;
  return cfg;
}

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw aqa::Error(aqa::ErrorKind::io, "cannot create " + dir);
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw aqa::Error(aqa::ErrorKind::io, "cannot write " + p.string());
  return out;
}

void write_json(const fs::path& p, const ordered_json& j) {
  auto out = open_out(p);
  out << j.dump(2) << '\n';
}

void print_warnings(const aqa::Splits& s) {
  for (const auto& w : s.warnings) std::cerr << "warning: " << w << '\n';
}

aqa::TrainResult run_training(const aqa::Config& cfg, const aqa::ActionSpace& space,
                              const aqa::RewardConfig& rc, const std::vector<aqa::QuestionRecord>& q,
                              const aqa::AgentBackend& backend) {
  const auto schema = aqa::label_schema(cfg);
  auto model = aqa::init_model(space.ids(), schema.size(), cfg.bandit.alpha);
  return aqa::train(q, schema, space, std::move(model), backend, rc, aqa::train_options(cfg));
}

int cmd_enumerate(const Common& c) {
  const auto cfg = load(c);
  const auto space = aqa::make_action_space(cfg);
  for (const auto& g : space.graphs()) {
    auto j = aqa::to_json(g);
    j["key"] = g.key();
    j["description"] = g.describe();
    std::cout << j.dump() << '\n';
  }
  std::cerr << space.size() << " actions\n";
  return 0;
}

int cmd_train(const Common& c) {
  const auto cfg = load(c);
  const auto schema = aqa::label_schema(cfg);
  const auto space = aqa::make_action_space(cfg);
  const auto rc = aqa::reward_config(cfg);
  const auto splits = aqa::load_splits(cfg);
  print_warnings(splits);
  const auto backend = aqa::make_backend(cfg);
  const auto out = prepare_dir(c.out_dir);

  const auto result = run_training(cfg, space, rc, splits.train, *backend);
  {
    auto f = open_out(out / "episodes.csv");
    aqa::write_episodes_csv(f, result.episodes);
  }
  {
    auto f = open_out(out / "model.json");
    f << result.model.to_checkpoint().dump() << '\n';
  }
  std::optional<aqa::ReferenceTable> ref;
  if (auto sim = aqa::make_simulator(cfg)) ref = aqa::reference_rewards(space, *sim, schema, rc);
  aqa::emit_diagnostics(result.episodes, space, schema, ref, out,
                        {cfg.diagnostics.stride, cfg.diagnostics.selection_window, cfg.bandit.alpha});
  write_json(out / "config.resolved.json", aqa::to_json(cfg));

  ordered_json report{{"episodes", result.episodes.size()}, {"out", out.string()}};
  for (const auto& label : schema.labels()) {
    const auto m = aqa::modal_selection(result.episodes, label, cfg.diagnostics.selection_window);
    report["modal"][label] = {{"action_id", m.action.value},
                              {"graph", space[m.action].describe()},
                              {"frequency", m.frequency}};
  }
  std::cout << report.dump(2) << '\n';
  return 0;
}

int cmd_eval(const Common& c, const std::string& model_path, std::optional<std::size_t> action_id) {
  const auto cfg = load(c);
  const auto schema = aqa::label_schema(cfg);
  const auto space = aqa::make_action_space(cfg);
  const auto rc = aqa::reward_config(cfg);
  const auto splits = aqa::load_splits(cfg);
  print_warnings(splits);
  const auto backend = aqa::make_backend(cfg);

  aqa::EvaluationReport report;
  if (action_id) {
    if (*action_id >= space.size())
      throw aqa::Error(aqa::ErrorKind::unknown_action,
                       "action id " + std::to_string(*action_id) + " not in the action space");
    const auto& g = space[aqa::ActionId{*action_id}];
    report = aqa::evaluate(splits.test, schema, g, *backend, rc, cfg.train.seed, g.describe());
  } else {
    std::ifstream in(model_path);
    if (!in) throw aqa::Error(aqa::ErrorKind::io, "cannot open model " + model_path);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw aqa::Error(aqa::ErrorKind::invalid_input, std::string("model file: ") + e.what());
    }
    const auto model = aqa::BanditModel::from_checkpoint(doc);
    report = aqa::evaluate(splits.test, schema, space, model, *backend, rc, cfg.train.seed);
  }
  const auto j = aqa::to_json(report);
  if (!c.out_dir.empty()) write_json(prepare_dir(c.out_dir) / "eval.json", j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

ordered_json baseline_json(const aqa::BaselineResult& r, const aqa::ActionSpace& space) {
  const auto& g = space[r.pruned];
  ordered_json probs = ordered_json::object();
  for (std::size_t i = 0; i < r.policy.edges().size(); ++i) {
    const auto& e = r.policy.edges()[i];
    probs[g.node_name(e.from) + "->" + g.node_name(e.to)] = r.policy.probabilities()[i];
  }
  return {{"pruned_action_id", r.pruned.value},
          {"pruned_graph", g.describe()},
          {"pruned_key", g.key()},
          {"edge_probabilities", probs}};
}

aqa::BaselineResult run_baseline(const aqa::Config& cfg, const aqa::ActionSpace& full,
                                 const std::vector<aqa::QuestionRecord>& q,
                                 const aqa::AgentBackend& backend) {
  return aqa::train_baseline(q, full, backend, aqa::RewardConfig::time_agnostic(),
                             aqa::baseline_options(cfg));
}

int cmd_baseline(const Common& c) {
  const auto cfg = load(c);
  const auto full = aqa::enumerate_action_space(aqa::make_agents(cfg.action_space.agents));
  const auto splits = aqa::load_splits(cfg);
  print_warnings(splits);
  const auto backend = aqa::make_backend(cfg);
  const auto out = prepare_dir(c.out_dir);

  const auto r = run_baseline(cfg, full, splits.train, *backend);
  {
    auto f = open_out(out / "edge_probabilities.csv");
    aqa::write_edge_probabilities_csv(f, r, full);
  }
  const auto j = baseline_json(r, full);
  write_json(out / "baseline.json", j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_compare(const Common& c) {
  const auto cfg = load(c);
  const auto schema = aqa::label_schema(cfg);
  const auto space = aqa::make_action_space(cfg);
  const auto full = aqa::enumerate_action_space(aqa::make_agents(cfg.action_space.agents));
  const auto splits = aqa::load_splits(cfg);
  print_warnings(splits);
  const auto backend = aqa::make_backend(cfg);
  const auto out = prepare_dir(c.out_dir);

  // Both AQA variants are scored on F1 and latency; the training reward differs.
  const auto nt_reward = aqa::RewardConfig::time_agnostic();
  auto t_reward = aqa::reward_config(cfg);
  if (t_reward.schedule.bands().empty())
    t_reward = aqa::RewardConfig::time_based(aqa::parse_penalty_preset(cfg.action_space.mode));

  const auto nt = run_training(cfg, space, nt_reward, splits.train, *backend);
  const auto t = run_training(cfg, space, t_reward, splits.train, *backend);
  const auto bl = run_baseline(cfg, full, splits.train, *backend);

  std::vector<aqa::EvaluationReport> reports;
  reports.push_back(aqa::evaluate(splits.test, schema, space, nt.model, *backend, nt_reward,
                                  cfg.train.seed, "AQA (NT)"));
  reports.push_back(aqa::evaluate(splits.test, schema, space, t.model, *backend, t_reward,
                                  cfg.train.seed, "AQA (T)"));
  reports.push_back(aqa::evaluate(splits.test, schema, full[bl.pruned], *backend, nt_reward,
                                  cfg.train.seed, "REINFORCE baseline"));

  auto j = aqa::comparison_table(reports, schema);
  ordered_json details = ordered_json::array();
  for (const auto& r : reports) details.push_back(aqa::to_json(r));
  j["details"] = details;
  j["baseline"] = baseline_json(bl, full);
  write_json(out / "comparison.json", j);
  std::cout << aqa::comparison_table(reports, schema).dump(2) << '\n';
  return 0;
}

int cmd_simulate_check(const Common& c, std::size_t samples, double f1_tol, double lat_tol) {
  const auto cfg = load(c);
  const auto profiles = aqa::simulator_profiles(cfg);
  const auto rows = aqa::calibration_check(profiles, samples, cfg.train.seed, f1_tol, lat_tol);
  ordered_json j = ordered_json::array();
  bool ok = true;
  for (const auto& r : rows) {
    ok = ok && r.within_tolerance;
    j.push_back({{"agent", r.agent},
                 {"context", r.label},
                 {"target_f1", r.target_f1},
                 {"observed_f1", r.observed_f1},
                 {"target_latency_s", r.target_latency_s},
                 {"observed_latency_s", r.observed_latency_s},
                 {"ok", r.within_tolerance}});
  }
  std::cout << j.dump(2) << '\n';
  if (!ok) throw CalibrationFailure("simulator means outside tolerance");
  return 0;
}

int cmd_gen_dataset(const Common& c) {
  const auto cfg = load(c);
  const auto splits = aqa::load_splits(cfg);
  const auto out = prepare_dir(c.out_dir);
  auto tr = open_out(out / "train.jsonl");
  aqa::write_dataset(tr, splits.train);
  auto te = open_out(out / "test.jsonl");
  aqa::write_dataset(te, splits.test);
  std::cout << ordered_json{{"train", splits.train.size()}, {"test", splits.test.size()}}.dump()
            << '\n';
  return 0;
}

int report_error(std::string_view kind, const std::string& message, int code) {
  std::cerr << ordered_json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive QA orchestration: LinUCB over agent strategy graphs"};
  app.require_subcommand(1);

  Common enumerate_o, train_o, eval_o, baseline_o, compare_o, check_o, gen_o;
  auto* enumerate = app.add_subcommand("enumerate", "list the action space as JSON lines");
  add_common(enumerate, enumerate_o, false);

  auto* train = app.add_subcommand("train", "train the bandit and write episodes and diagnostics");
  add_common(train, train_o);

  auto* eval = app.add_subcommand("eval", "greedy evaluation on the test split");
  add_common(eval, eval_o);
  eval_o.out_dir.clear();
  std::string model_path;
  std::optional<std::size_t> action_id;
  auto* model_opt = eval->add_option("--model", model_path, "model.json written by train");
  auto* action_opt = eval->add_option("--action-id", action_id, "evaluate one fixed graph");
  model_opt->excludes(action_opt);
  action_opt->excludes(model_opt);

  auto* baseline = app.add_subcommand("baseline-train", "train the REINFORCE edge policy");
  add_common(baseline, baseline_o);

  auto* compare = app.add_subcommand("compare", "train both AQA variants and the baseline, evaluate all");
  add_common(compare, compare_o);

  auto* check = app.add_subcommand("simulate-check", "Monte-Carlo calibration of the simulator");
  add_common(check, check_o, false);
  std::size_t samples = 20000;
  double f1_tol = 0.02, lat_tol = 0.02;
  check->add_option("--samples", samples);
  check->add_option("--f1-tolerance", f1_tol);
  check->add_option("--latency-tolerance", lat_tol, "relative");

  auto* gen = app.add_subcommand("gen-dataset", "write the synthetic train/test JSONL splits");
  add_common(gen, gen_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), 2);
  }

  try {
    if (enumerate->parsed()) return cmd_enumerate(enumerate_o);
    if (train->parsed()) return cmd_train(train_o);
    if (eval->parsed()) {
      if (model_path.empty() && !action_id)
        throw aqa::Error(aqa::ErrorKind::config, "eval needs --model or --action-id");
      return cmd_eval(eval_o, model_path, action_id);
    }
    if (baseline->parsed()) return cmd_baseline(baseline_o);
    if (compare->parsed()) return cmd_compare(compare_o);
    if (check->parsed()) return cmd_simulate_check(check_o, samples, f1_tol, lat_tol);
    if (gen->parsed()) return cmd_gen_dataset(gen_o);
  } catch (const aqa::Error& e) {
    return report_error(aqa::to_string(e.kind()), e.what(), 1);
  } catch (const CalibrationFailure& e) {
    return report_error("calibration", e.what(), 1);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), 1);
  }
  return 0;
}
