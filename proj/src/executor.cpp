#include "aqa/executor.hpp"

#include <algorithm>
#include <cctype>
#include <future>
#include <limits>

#include "aqa/error.hpp"
#include "aqa/rng.hpp"

namespace aqa {

bool ExecutionTrace::any_failed() const {
  return std::any_of(per_node.begin(), per_node.end(),
                     [](const auto& kv) { return kv.second.failed; });
}

std::uint64_t agent_stream_seed(std::uint64_t episode_seed, NodeIndex agent_index) {
  return derive_seed(episode_seed, {static_cast<std::uint64_t>(agent_index)});
}

std::string normalize_answer(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::string majority_vote(std::span<const std::pair<AgentId, std::string>> answers) {
  if (answers.empty()) throw Error(ErrorKind::invalid_input, "majority vote over no answers");
  struct Tally {
    std::size_t count = 0;
    std::size_t first_agent = std::numeric_limits<std::size_t>::max();
  };
  std::map<std::string, Tally> tally;
  for (const auto& [agent, text] : answers) {
    auto& t = tally[normalize_answer(text)];
    ++t.count;
    t.first_agent = std::min(t.first_agent, agent.index);
  }
  const std::string* best = nullptr;
  Tally best_tally;
  for (const auto& [text, t] : tally) {
    if (text.empty()) continue;
    if (!best || t.count > best_tally.count ||
        (t.count == best_tally.count && t.first_agent < best_tally.first_agent)) {
      best = &text;
      best_tally = t;
    }
  }
  return best ? *best : std::string();
}

namespace {

AgentResponse invoke(const StrategyGraph& graph, NodeIndex node, const ExecutionRequest& request,
                     const AgentBackend& backend, std::vector<UpstreamMessage> upstream) {
  const auto& agent = graph.agents().at(node);
  AnswerRequest ar{request.question, request.gold, request.context_label, upstream,
                   agent_stream_seed(request.episode_seed, node)};
  try {
    auto r = backend.answer(agent, ar);
    r.upstream_inputs = std::move(upstream);
    return r;
  } catch (const BackendError& e) {
    AgentResponse failed;
    failed.failed = true;
    failed.error = e.what();
    failed.latency_s = e.elapsed_s();
    failed.upstream_inputs = std::move(upstream);
    return failed;
  }
}

}  // namespace

ExecutionTrace execute(const StrategyGraph& graph, const ExecutionRequest& request,
                       const AgentBackend& backend, const ExecutionOptions& options) {
  const auto active = graph.active_agents();
  std::map<NodeIndex, std::vector<NodeIndex>> preds;
  std::map<NodeIndex, std::size_t> waiting;
  for (auto a : active) {
    preds[a] = graph.in_neighbors(a);
    waiting[a] = preds[a].size();
  }

  ExecutionTrace trace;
  std::vector<NodeIndex> ready;
  for (auto a : active)
    if (waiting[a] == 0) ready.push_back(a);

  auto upstream_of = [&](NodeIndex a) {
    std::vector<UpstreamMessage> up;
    for (auto p : preds[a]) up.push_back({graph.agents()[p], trace.per_node.at(p).text});
    return up;
  };

  // Kahn's algorithm in waves; each wave is the full ready set, in index order.
  while (!ready.empty()) {
    std::sort(ready.begin(), ready.end());
    std::vector<AgentResponse> results(ready.size());
    if (options.concurrent && ready.size() > 1) {
      std::vector<std::future<AgentResponse>> jobs;
      for (auto a : ready)
        jobs.push_back(std::async(std::launch::async, invoke, std::cref(graph), a,
                                  std::cref(request), std::cref(backend), upstream_of(a)));
      for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = jobs[i].get();
    } else {
      for (std::size_t i = 0; i < ready.size(); ++i)
        results[i] = invoke(graph, ready[i], request, backend, upstream_of(ready[i]));
    }

    std::vector<NodeIndex> next;
    for (std::size_t i = 0; i < ready.size(); ++i) {
      const auto a = ready[i];
      double start = 0.0;
      for (auto p : preds[a]) start = std::max(start, trace.finish_s.at(p));
      trace.finish_s[a] = start + results[i].latency_s;
      trace.per_node[a] = std::move(results[i]);
      trace.invocation_order.push_back(a);
      for (const auto& e : graph.edges())
        if (e.from == a && e.to != kFinalNode && --waiting[e.to] == 0) next.push_back(e.to);
    }
    ready = std::move(next);
  }

  std::vector<std::pair<AgentId, std::string>> votes;
  for (auto v : graph.in_neighbors(kFinalNode)) {
    votes.emplace_back(graph.agents()[v], trace.per_node.at(v).failed ? std::string()
                                                                      : trace.per_node.at(v).text);
    trace.total_latency_s = std::max(trace.total_latency_s, trace.finish_s.at(v));
  }
  trace.final_answer = majority_vote(votes);
  return trace;
}

}  // namespace aqa
