#include <doctest.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <set>

#include "aqa/error.hpp"
#include "aqa/executor.hpp"

using namespace aqa;

namespace {

constexpr NodeIndex F = kFinalNode;

// Fixed text and latency per agent; logs who was called with what upstream.
class ScriptedBackend final : public AgentBackend {
 public:
  std::map<std::size_t, std::string> text;
  std::map<std::size_t, double> latency;
  std::set<std::size_t> fail;
  mutable std::mutex mu;
  mutable std::vector<std::pair<std::size_t, std::vector<std::size_t>>> calls;

  AgentResponse answer(const AgentId& agent, const AnswerRequest& req) const override {
    {
      std::lock_guard lock(mu);
      std::vector<std::size_t> up;
      for (const auto& m : req.upstream) up.push_back(m.agent.index);
      calls.push_back({agent.index, up});
    }
    if (fail.count(agent.index)) throw BackendError(ErrorKind::backend_timeout, "scripted", 1.5);
    AgentResponse r;
    r.text = text.count(agent.index) ? text.at(agent.index) : "a" + std::to_string(agent.index);
    r.latency_s = latency.count(agent.index) ? latency.at(agent.index) : 1.0;
    return r;
  }
};

std::vector<AgentId> three() { return make_agents(std::vector<std::string>{"NoR", "OneR", "IRCoT"}); }

AgentProfile perfect(std::size_t i, std::string name, double latency) {
  AgentProfile p{{i, std::move(name)}, {}};
  for (auto l : {"A", "B", "C"}) p.per_context[l] = {1.0, 0.0, latency, 0.1};
  return p;
}

const std::vector<std::string> kGold{"paris"};

}  // namespace

TEST_CASE("single-node pipeline") {
  SimulatorBackend sim({perfect(0, "NoR", 0.66), perfect(1, "OneR", 6.0), perfect(2, "IRCoT", 190.0)});
  StrategyGraph g(three(), {{0, F}}, ActionId{0});
  const auto trace = execute(g, {"q", kGold, "A", 42}, sim);
  CHECK(trace.final_answer == "paris");
  const auto direct = sim.answer({0, "NoR"}, {"q", kGold, "A", {}, agent_stream_seed(42, 0)});
  CHECK(trace.total_latency_s == direct.latency_s);
  CHECK(trace.per_node.size() == 1);
}

TEST_CASE("strict majority at the final node") {
  ScriptedBackend b;
  b.text = {{0, "x"}, {1, "y"}, {2, "x"}};
  StrategyGraph g(three(), {{0, F}, {1, F}, {2, F}}, ActionId{0});
  CHECK(execute(g, {"q", kGold, "A", 0}, b).final_answer == "x");
}

TEST_CASE("chain passes upstream text and sums latency") {
  SimulatorBackend sim({perfect(0, "NoR", 0.66), perfect(1, "OneR", 6.0), perfect(2, "IRCoT", 190.0)});
  StrategyGraph g(three(), {{0, 2}, {2, F}}, ActionId{0});
  const auto trace = execute(g, {"q", kGold, "B", 7}, sim);
  REQUIRE(trace.per_node.at(2).upstream_inputs.size() == 1);
  CHECK(trace.per_node.at(2).upstream_inputs[0].agent.index == 0);
  CHECK(trace.per_node.at(2).upstream_inputs[0].text == trace.per_node.at(0).text);
  CHECK(trace.total_latency_s ==
        doctest::Approx(trace.per_node.at(0).latency_s + trace.per_node.at(2).latency_s));
  CHECK(trace.invocation_order == std::vector<NodeIndex>{0, 2});
}

TEST_CASE("fan-in latency is the maximum, chains add up") {
  ScriptedBackend b;
  b.latency = {{0, 0.5}, {1, 6.0}, {2, 190.0}};
  CHECK(execute(StrategyGraph(three(), {{0, F}, {1, F}, {2, F}}, ActionId{0}), {"q", kGold, "A", 0}, b)
            .total_latency_s == 190.0);
  CHECK(execute(StrategyGraph(three(), {{0, 1}, {1, F}}, ActionId{0}), {"q", kGold, "A", 0}, b)
            .total_latency_s == 6.5);
  // Diamond-ish: 0->1, 0->F, 1->F. Critical path is 0 then 1.
  CHECK(execute(StrategyGraph(three(), {{0, 1}, {0, F}, {1, F}}, ActionId{0}), {"q", kGold, "A", 0}, b)
            .total_latency_s == 6.5);
}

TEST_CASE("topological soundness and island exclusion on the whole space") {
  const auto space = enumerate_action_space(three());
  for (const auto& g : space.graphs()) {
    ScriptedBackend b;
    const auto trace = execute(g, {"q", kGold, "A", 0}, b);
    std::set<std::size_t> done;
    for (const auto& [agent, up] : b.calls) {
      const auto want = g.in_neighbors(agent);
      CHECK(std::vector<std::size_t>(up.begin(), up.end()) == want);
      for (auto u : up) CHECK(done.count(u));
      done.insert(agent);
    }
    const auto active = g.active_agents();
    CHECK(std::vector<std::size_t>(done.begin(), done.end()) == active);
    std::set<std::string> voters;
    for (auto v : g.in_neighbors(F)) voters.insert("a" + std::to_string(v));
    CHECK(voters.count(trace.final_answer));
  }
}

TEST_CASE("failed nodes vote empty") {
  ScriptedBackend b;
  b.text = {{0, "x"}, {1, "y"}};
  b.fail = {0};
  StrategyGraph g(three(), {{0, F}, {1, F}}, ActionId{0});
  const auto trace = execute(g, {"q", kGold, "A", 0}, b);
  CHECK(trace.final_answer == "y");
  CHECK(trace.per_node.at(0).failed);
  CHECK(trace.per_node.at(0).latency_s == 1.5);
  CHECK(trace.any_failed());

  b.fail = {0, 1};
  CHECK(execute(g, {"q", kGold, "A", 0}, b).final_answer.empty());
}

TEST_CASE("a failed upstream node still feeds its successor") {
  ScriptedBackend b;
  b.fail = {0};
  StrategyGraph g(three(), {{0, 1}, {1, F}}, ActionId{0});
  const auto trace = execute(g, {"q", kGold, "A", 0}, b);
  CHECK(trace.final_answer == "a1");
  CHECK(trace.total_latency_s == 2.5);
}

TEST_CASE("concurrent execution matches sequential") {
  SimulatorBackend sim(default_profiles());
  const auto space = enumerate_action_space(three());
  for (const auto& g : space.graphs()) {
    for (std::uint64_t seed : {1u, 99u}) {
      const auto a = execute(g, {"q", kGold, "C", seed}, sim);
      const auto c = execute(g, {"q", kGold, "C", seed}, sim, {true});
      CHECK(a.final_answer == c.final_answer);
      CHECK(a.total_latency_s == c.total_latency_s);
      CHECK(a.invocation_order == c.invocation_order);
    }
  }
}

TEST_CASE("majority_vote examples") {
  using V = std::vector<std::pair<AgentId, std::string>>;
  CHECK(majority_vote(V{{{0, "a"}, "x"}}) == "x");
  CHECK(majority_vote(V{{{0, "a"}, "X "}, {{1, "b"}, "x"}, {{2, "c"}, "y"}}) == "x");
  CHECK(majority_vote(V{{{0, "a"}, "x"}, {{1, "b"}, "y"}}) == "x");
  CHECK(majority_vote(V{{{1, "b"}, "y"}, {{0, "a"}, "x"}}) == "x");
  CHECK(majority_vote(V{{{0, "a"}, ""}, {{1, "b"}, ""}, {{2, "c"}, "z"}}) == "z");
  CHECK_THROWS_AS(majority_vote(V{}), Error);
  CHECK(normalize_answer("  Hello \t  World ") == "hello world");
}
