#include "aqa/diagnostics.hpp"

#include <charconv>
#include <deque>
#include <fstream>
#include <map>

#include "aqa/error.hpp"

namespace aqa {

namespace {

std::string num(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + p.string());
  return out;
}

}  // namespace

DiagnosticsFiles emit_diagnostics(std::span<const EpisodeRecord> episodes, const ActionSpace& space,
                                  const LabelSchema& schema,
                                  const std::optional<ReferenceTable>& reference,
                                  const std::filesystem::path& dir,
                                  const DiagnosticsOptions& options) {
  if (episodes.empty()) throw Error(ErrorKind::invalid_input, "no episodes to summarize");
  if (options.stride == 0 || options.selection_window == 0)
    throw Error(ErrorKind::config, "stride and selection window must be >= 1");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw Error(ErrorKind::io, "cannot create output directory " + dir.string());

  DiagnosticsFiles files{dir / "expected_rewards.csv", dir / "selection_dist.csv",
                         dir / "summary.json"};
  auto er = open_out(files.expected_rewards);
  auto sd = open_out(files.selection_dist);

  const auto ids = space.ids();
  BanditModel model(ids, schema.size(), options.alpha);
  std::vector<ContextVector> prototypes;
  for (std::size_t c = 0; c < schema.size(); ++c) prototypes.push_back(schema.prototype(c));

  er << "step,context,action_id,expected_reward,reference_reward,best_reference_reward\n";
  sd << "step,context,action_id,frequency\n";

  std::vector<std::deque<ActionId>> windows(schema.size());
  std::vector<std::map<ActionId, std::size_t>> counts(schema.size());
  std::map<std::string, std::map<std::size_t, std::size_t>> totals;

  for (std::size_t t = 0; t < episodes.size(); ++t) {
    const auto& ep = episodes[t];
    model.update(ep.action, ep.context, ep.reward);

    const std::size_t c = schema.index_of(ep.context_label);
    windows[c].push_back(ep.action);
    ++counts[c][ep.action];
    if (windows[c].size() > options.selection_window) {
      if (--counts[c][windows[c].front()] == 0) counts[c].erase(windows[c].front());
      windows[c].pop_front();
    }
    ++totals[ep.context_label][ep.action.value];
    const double wn = static_cast<double>(windows[c].size());
    for (auto [a, n] : counts[c])
      sd << t << ',' << ep.context_label << ',' << a.value << ',' << num(n / wn) << '\n';

    if (t % options.stride != 0 && t + 1 != episodes.size()) continue;
    for (std::size_t k = 0; k < schema.size(); ++k) {
      const auto& label = schema.labels()[k];
      for (auto id : ids) {
        er << t << ',' << label << ',' << id.value << ',' << num(model.expected_reward(id, prototypes[k]))
           << ',';
        if (reference)
          er << num(reference->expected_reward[k][id.value]) << ',' << num(reference->best_reward[k]);
        else
          er << ',';
        er << '\n';
      }
    }
  }
  if (!er || !sd) throw Error(ErrorKind::io, "write failed in " + dir.string());

  nlohmann::ordered_json summary;
  summary["episodes"] = episodes.size();
  summary["actions"] = space.size();
  double total_reward = 0.0;
  for (const auto& ep : episodes) total_reward += ep.reward;
  summary["mean_reward"] = total_reward / static_cast<double>(episodes.size());
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto& label = schema.labels()[c];
    nlohmann::ordered_json entry;
    const auto& x = prototypes[c];
    const auto greedy = model.select_action(x, 0.0);
    entry["greedy_action"] = greedy.value;
    entry["greedy_graph"] = space[greedy].describe();
    entry["greedy_expected_reward"] = model.expected_reward(greedy, x);
    if (totals.count(label)) {
      const auto modal = modal_selection(episodes, label, options.selection_window);
      entry["modal_action"] = modal.action.value;
      entry["modal_graph"] = space[modal.action].describe();
      entry["modal_frequency"] = modal.frequency;
      entry["modal_window"] = modal.window;
    }
    if (reference) {
      entry["reference_best_action"] = reference->best_action[c].value;
      entry["reference_best_graph"] = space[reference->best_action[c]].describe();
      entry["reference_best_reward"] = reference->best_reward[c];
    }
    per[label] = entry;
  }
  summary["contexts"] = per;
  auto sj = open_out(files.summary);
  sj << summary.dump(2) << '\n';
  if (!sj) throw Error(ErrorKind::io, "cannot write " + files.summary.string());
  return files;
}

}  // namespace aqa
