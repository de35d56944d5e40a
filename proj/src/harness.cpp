#include "aqa/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "aqa/error.hpp"
#include "aqa/rng.hpp"

namespace aqa {

namespace {

struct Outcome {
  double f1 = 0.0;
  double latency_s = 0.0;
  double reward = 0.0;
  bool failed = false;
};

Outcome run_episode(const StrategyGraph& graph, const QuestionRecord& q,
                    const AgentBackend& backend, const RewardConfig& cfg, std::uint64_t seed) {
  const auto trace =
      execute(graph, {q.question, q.gold_answers, q.complexity_label, seed}, backend);
  Outcome o;
  o.failed = trace.any_failed();
  o.f1 = max_token_f1(trace.final_answer, q.gold_answers);
  o.latency_s = trace.total_latency_s;
  o.reward = reward(o.f1, o.latency_s, cfg);
  return o;
}

void append_number(std::string& out, double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

double parse_number(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorKind::dataset, "bad number '" + std::string(s) + "' in episode CSV");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string join_numbers(std::span<const double> v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(';');
    append_number(out, v[i]);
  }
  return out;
}

std::vector<double> parse_numbers(std::string_view s) {
  std::vector<double> out;
  if (s.empty()) return out;
  for (auto part : split(s, ';')) out.push_back(parse_number(part));
  return out;
}

class Accumulator {
 public:
  void add(const Outcome& o) {
    ++n_;
    f1_ += o.f1;
    latency_ += o.latency_s;
    reward_ += o.reward;
  }
  MetricSummary summary(std::string label) const {
    const double d = n_ ? static_cast<double>(n_) : 1.0;
    return {std::move(label), n_, f1_ / d, latency_ / d, reward_ / d};
  }

 private:
  std::size_t n_ = 0;
  double f1_ = 0.0, latency_ = 0.0, reward_ = 0.0;
};

template <class Select>
EvaluationReport evaluate_with(std::span<const QuestionRecord> questions, const LabelSchema& schema,
                               Select&& select, const AgentBackend& backend,
                               const RewardConfig& cfg, std::uint64_t seed, std::string name) {
  EvaluationReport report;
  report.name = std::move(name);
  std::vector<Accumulator> per(schema.size());
  Accumulator all;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const auto& q = questions[i];
    const auto x = encode_context(q, schema);
    const StrategyGraph& g = select(x);
    report.selections.push_back(g.action_id());
    const auto o = run_episode(g, q, backend, cfg, derive_seed(seed, Stream::eval_episode, i));
    per[schema.index_of(q.complexity_label)].add(o);
    all.add(o);
  }
  for (std::size_t c = 0; c < schema.size(); ++c)
    report.per_context.push_back(per[c].summary(schema.labels()[c]));
  report.overall = all.summary("Overall");
  return report;
}

}  // namespace

TrainResult train(std::span<const QuestionRecord> questions, const LabelSchema& schema,
                  const ActionSpace& space, BanditModel model, const AgentBackend& backend,
                  const RewardConfig& reward_cfg, const TrainOptions& options) {
  if (space.size() == 0) throw Error(ErrorKind::config, "action space is empty");
  if (options.epochs == 0) throw Error(ErrorKind::config, "epochs must be >= 1");
  if (questions.empty()) throw Error(ErrorKind::dataset, "no training questions");
  if (model.dimension() != schema.size())
    throw Error(ErrorKind::dimension, "model dimension " + std::to_string(model.dimension()) +
                                          " does not match the label schema size " +
                                          std::to_string(schema.size()));
  if (model.num_arms() != space.size())
    throw Error(ErrorKind::config, "model arms do not match the action space");
  reward_cfg.validate();

  std::vector<std::size_t> order(questions.size());
  TrainResult result{std::move(model), {}};
  result.episodes.reserve(options.epochs * questions.size());
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(options.seed, Stream::shuffle, epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (auto qi : order) {
      const auto& q = questions[qi];
      EpisodeRecord ep;
      ep.timestep = t;
      ep.epoch = epoch;
      ep.question_id = q.id;
      ep.context_label = q.complexity_label;
      ep.context = encode_context(q, schema);
      if (options.record_ucb_scores) ep.ucb_scores = result.model.ucb_scores(ep.context);
      ep.action = result.model.select_action(ep.context);
      const auto o = run_episode(space[ep.action], q, backend, reward_cfg,
                                 derive_seed(options.seed, Stream::train_episode, t));
      ep.f1 = o.f1;
      ep.latency_s = o.latency_s;
      ep.reward = o.reward;
      ep.failed = o.failed;
      result.model.update(ep.action, ep.context, ep.reward);
      result.episodes.push_back(std::move(ep));
      ++t;
    }
  }
  return result;
}

EvaluationReport evaluate(std::span<const QuestionRecord> questions, const LabelSchema& schema,
                          const ActionSpace& space, const BanditModel& model,
                          const AgentBackend& backend, const RewardConfig& reward_cfg,
                          std::uint64_t seed, std::string name) {
  if (model.num_arms() != space.size())
    throw Error(ErrorKind::config, "model arms do not match the action space");
  if (model.dimension() != schema.size())
    throw Error(ErrorKind::dimension, "model dimension does not match the label schema");
  auto select = [&](const ContextVector& x) -> const StrategyGraph& {
    return space[model.select_action(x, 0.0)];
  };
  return evaluate_with(questions, schema, select, backend, reward_cfg, seed, std::move(name));
}

EvaluationReport evaluate(std::span<const QuestionRecord> questions, const LabelSchema& schema,
                          const StrategyGraph& graph, const AgentBackend& backend,
                          const RewardConfig& reward_cfg, std::uint64_t seed, std::string name) {
  auto select = [&](const ContextVector&) -> const StrategyGraph& { return graph; };
  return evaluate_with(questions, schema, select, backend, reward_cfg, seed, std::move(name));
}

nlohmann::ordered_json to_json(const EvaluationReport& report) {
  auto row = [](const MetricSummary& m) {
    return nlohmann::ordered_json{{"label", m.label},
                                  {"count", m.count},
                                  {"f1", m.mean_f1},
                                  {"time_s", m.mean_latency_s},
                                  {"reward", m.mean_reward}};
  };
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& m : report.per_context) rows.push_back(row(m));
  rows.push_back(row(report.overall));
  std::map<std::size_t, std::size_t> counts;
  for (auto a : report.selections) ++counts[a.value];
  nlohmann::ordered_json sel = nlohmann::ordered_json::object();
  for (auto [a, n] : counts) sel[std::to_string(a)] = n;
  return {{"name", report.name}, {"rows", rows}, {"selection_counts", sel}};
}

nlohmann::ordered_json comparison_table(std::span<const EvaluationReport> reports,
                                        const LabelSchema& schema) {
  nlohmann::ordered_json columns = nlohmann::ordered_json::array();
  for (const auto& r : reports) columns.push_back(r.name);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  auto add_row = [&](const std::string& label, auto&& pick) {
    nlohmann::ordered_json cells = nlohmann::ordered_json::object();
    for (const auto& r : reports) {
      const MetricSummary& m = pick(r);
      cells[r.name] = {{"f1", m.mean_f1}, {"time_s", m.mean_latency_s}};
    }
    rows.push_back({{"context", label}, {"values", cells}});
  };
  for (std::size_t c = 0; c < schema.size(); ++c)
    add_row("Context " + schema.labels()[c],
            [c](const EvaluationReport& r) -> const MetricSummary& { return r.per_context[c]; });
  add_row("Overall", [](const EvaluationReport& r) -> const MetricSummary& { return r.overall; });
  return {{"columns", columns}, {"time_unit", "s"}, {"rows", rows}};
}

BaselineResult train_baseline(std::span<const QuestionRecord> questions, const ActionSpace& space,
                              const AgentBackend& backend, const RewardConfig& reward_cfg,
                              const BaselineOptions& options) {
  if (questions.empty()) throw Error(ErrorKind::dataset, "no training questions");
  if (options.epochs == 0) throw Error(ErrorKind::config, "epochs must be >= 1");
  reward_cfg.validate();

  EdgePolicy policy(space.agents().size(), options.learning_rate, options.initial_prob);
  MovingAverageBaseline baseline(options.window);
  std::vector<std::vector<double>> history{policy.probabilities()};
  std::vector<double> epoch_reward;
  std::vector<std::size_t> order(questions.size());
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(options.seed, Stream::shuffle, epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double sum = 0.0;
    for (auto qi : order) {
      Rng sample_rng(derive_seed(options.seed, Stream::baseline_sample, t));
      const auto sampled = repair(sample_edges(policy, sample_rng), policy);
      const auto& graph = space.lookup(sampled);
      const auto o = run_episode(graph, questions[qi], backend, reward_cfg,
                                 derive_seed(options.seed, Stream::baseline_episode, t));
      policy.reinforce_step(sampled, o.reward, baseline.value());
      baseline.push(o.reward);
      sum += o.reward;
      ++t;
    }
    history.push_back(policy.probabilities());
    epoch_reward.push_back(sum / static_cast<double>(questions.size()));
  }
  const auto pruned = prune(policy, space).action_id();
  return {std::move(policy), pruned, std::move(history), std::move(epoch_reward)};
}

void write_edge_probabilities_csv(std::ostream& out, const BaselineResult& result,
                                  const ActionSpace& space) {
  const auto& g = space.graphs().front();
  out << "epoch,mean_reward";
  for (const auto& e : result.policy.edges()) out << ',' << g.node_name(e.from) << "->" << g.node_name(e.to);
  out << '\n';
  for (std::size_t k = 0; k < result.epoch_probabilities.size(); ++k) {
    std::string line = std::to_string(k) + ",";
    if (k > 0) append_number(line, result.epoch_mean_reward[k - 1]);
    for (double p : result.epoch_probabilities[k]) {
      line.push_back(',');
      append_number(line, p);
    }
    out << line << '\n';
  }
}

void write_episodes_csv(std::ostream& out, std::span<const EpisodeRecord> episodes) {
  out << "timestep,epoch,question_id,context_label,context,action_id,f1,latency_s,reward,failed,"
         "ucb_scores\n";
  for (const auto& e : episodes) {
    std::string line;
    line += std::to_string(e.timestep) + ',' + std::to_string(e.epoch) + ',' + e.question_id + ',' +
            e.context_label + ',' + join_numbers(e.context.values()) + ',' +
            std::to_string(e.action.value) + ',';
    append_number(line, e.f1);
    line.push_back(',');
    append_number(line, e.latency_s);
    line.push_back(',');
    append_number(line, e.reward);
    line += e.failed ? ",1," : ",0,";
    line += join_numbers(e.ucb_scores);
    out << line << '\n';
  }
}

std::vector<EpisodeRecord> read_episodes_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::dataset, "episode CSV is empty");
  std::vector<EpisodeRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 11) throw Error(ErrorKind::dataset, "episode CSV row has wrong column count");
    EpisodeRecord e;
    e.timestep = static_cast<std::size_t>(parse_number(f[0]));
    e.epoch = static_cast<std::size_t>(parse_number(f[1]));
    e.question_id = std::string(f[2]);
    e.context_label = std::string(f[3]);
    e.context = ContextVector(parse_numbers(f[4]));
    e.action = ActionId{static_cast<std::size_t>(parse_number(f[5]))};
    e.f1 = parse_number(f[6]);
    e.latency_s = parse_number(f[7]);
    e.reward = parse_number(f[8]);
    e.failed = f[9] == "1";
    e.ucb_scores = parse_numbers(f[10]);
    out.push_back(std::move(e));
  }
  return out;
}

ModalSelection modal_selection(std::span<const EpisodeRecord> episodes, std::string_view label,
                               std::size_t last_n) {
  std::vector<ActionId> recent;
  for (auto it = episodes.rbegin(); it != episodes.rend() && recent.size() < last_n; ++it)
    if (it->context_label == label) recent.push_back(it->action);
  if (recent.empty())
    throw Error(ErrorKind::invalid_input, "no episodes with label '" + std::string(label) + "'");
  std::map<ActionId, std::size_t> counts;
  for (auto a : recent) ++counts[a];
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it)
    if (it->second > best->second) best = it;
  return {best->first, static_cast<double>(best->second) / static_cast<double>(recent.size()),
          recent.size()};
}

std::vector<std::size_t> audit_rewards(std::span<const EpisodeRecord> episodes,
                                       const RewardConfig& reward_cfg) {
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    const double r = reward(episodes[i].f1, episodes[i].latency_s, reward_cfg);
    if (std::memcmp(&r, &episodes[i].reward, sizeof r) != 0) bad.push_back(i);
  }
  return bad;
}

}  // namespace aqa
