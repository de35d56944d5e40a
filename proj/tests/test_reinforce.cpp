#include <doctest.h>

#include <algorithm>

#include "aqa/error.hpp"
#include "aqa/reinforce.hpp"

using namespace aqa;

namespace {

constexpr NodeIndex F = kFinalNode;
const Edge kNoRF{0, F}, kOneRF{1, F}, kIRCoTF{2, F};

std::vector<AgentId> three() { return make_agents(std::vector<std::string>{"NoR", "OneR", "IRCoT"}); }

void set_all(EdgePolicy& p, double v) {
  for (const auto& e : p.edges()) p.set_probability(e, v);
}

bool same_edges(std::vector<Edge> a, std::vector<Edge> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

}  // namespace

TEST_CASE("all-one probabilities on a DAG candidate set sample the full graph") {
  const std::vector<Edge> dag{{0, 1}, {1, F}, {0, F}, {2, F}};
  EdgePolicy p(3, dag, 0.01, 1.0);
  Rng rng(1);
  const auto space = enumerate_action_space(three());
  const auto& g = sample_graph(p, space, rng);
  CHECK(same_edges(g.edges(), dag));
}

TEST_CASE("all-zero probabilities force the best agent->final edge") {
  EdgePolicy p(3, 0.01, 0.0);
  Rng rng(1);
  const auto space = enumerate_action_space(three());
  CHECK(same_edges(sample_graph(p, space, rng).edges(), {kNoRF}));
  p.set_probability(kIRCoTF, 0.3);
  CHECK(same_edges(repair({3, {}}, p).edges, {kIRCoTF}));
}

TEST_CASE("uniform sampling frequency before repair") {
  EdgePolicy p(3, 0.01, 0.5);
  Rng rng(123);
  std::vector<int> hits(p.edges().size(), 0);
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto g = sample_edges(p, rng);
    for (std::size_t k = 0; k < p.edges().size(); ++k)
      if (std::find(g.edges.begin(), g.edges.end(), p.edges()[k]) != g.edges.end()) ++hits[k];
  }
  for (int h : hits) CHECK(std::abs(h / double(n) - 0.5) <= 0.02);
}

TEST_CASE("repair yields a valid action for every edge subset") {
  EdgePolicy p(3, 0.01, 0.5);
  const auto space = enumerate_action_space(three());
  const auto& cand = p.edges();
  for (std::uint32_t mask = 0; mask < (1u << cand.size()); ++mask) {
    CandidateGraph g{3, {}};
    for (std::size_t k = 0; k < cand.size(); ++k)
      if (mask >> k & 1) g.edges.push_back(cand[k]);
    const auto fixed = repair(g, p);
    CHECK(validate_graph(fixed).valid());
    CHECK_NOTHROW(space.lookup(fixed));
    if (validate_graph(g).valid()) CHECK(same_edges(fixed.edges, g.edges));
    for (const auto& e : fixed.edges)
      CHECK((std::find(g.edges.begin(), g.edges.end(), e) != g.edges.end() || e.to == F));
  }
}

TEST_CASE("repair rules in order") {
  EdgePolicy p(3, 0.01, 0.5);
  // Cycle 0<->1 with 1->F: the first cycle edge in canonical order (0->1)
  // goes, after which 1->0 leaves NoR stranded and is dropped as well.
  CHECK(same_edges(repair({3, {{0, 1}, {1, 0}, {1, F}}}, p).edges, {{1, F}}));
  // Same cycle with 0->F too: dropping 0->1 leaves 1->0->F intact.
  CHECK(same_edges(repair({3, {{0, 1}, {1, 0}, {0, F}}}, p).edges, {{1, 0}, {0, F}}));
  // Orphan chain 0->2 without a path: dropped.
  CHECK(same_edges(repair({3, {{0, 2}, {1, F}}}, p).edges, {{1, F}}));
  // Unfed final: best agent->final edge added, 0->1 then reaches final.
  p.set_probability(kOneRF, 0.9);
  CHECK(same_edges(repair({3, {{0, 1}}}, p).edges, {{0, 1}, {1, F}}));
}

TEST_CASE("reinforce_step direction") {
  EdgePolicy p(3, 0.1, 0.5);
  const CandidateGraph sampled{3, {kNoRF}};
  auto up = p;
  up.reinforce_step(sampled, 1.0, 0.2);
  CHECK(up.probability(kNoRF) > 0.5);
  CHECK(up.probability(kOneRF) < 0.5);

  auto down = p;
  down.reinforce_step(sampled, 0.0, 0.5);
  CHECK(down.probability(kNoRF) < 0.5);
  CHECK(down.probability(kOneRF) > 0.5);

  auto same = p;
  same.reinforce_step(sampled, 0.4, 0.4);
  CHECK(same.probabilities() == p.probabilities());

  auto exact = p;
  exact.reinforce_step(sampled, 1.0, 0.0);
  CHECK(exact.probability(kNoRF) == doctest::Approx(0.5 + 0.1 * 0.5));
  CHECK(exact.probability(kOneRF) == doctest::Approx(0.5 - 0.1 * 0.5));
}

TEST_CASE("probabilities stay inside the clamp") {
  EdgePolicy p(3, 5.0, 0.5);
  Rng rng(8);
  for (int i = 0; i < 500; ++i) {
    const auto g = repair(sample_edges(p, rng), p);
    p.reinforce_step(g, (i % 3) ? 10.0 : -10.0, 0.0);
    for (double q : p.probabilities()) {
      CHECK(q >= EdgePolicy::kEpsilon);
      CHECK(q <= 1.0 - EdgePolicy::kEpsilon);
    }
  }
}

TEST_CASE("prune examples") {
  const auto space = enumerate_action_space(three());
  EdgePolicy p(3, 0.01, 0.0);
  p.set_probability(kNoRF, 0.9);
  p.set_probability(kOneRF, 0.2);
  p.set_probability(kIRCoTF, 0.8);
  CHECK(same_edges(prune(p, space).edges(), {kNoRF, kIRCoTF}));

  set_all(p, 0.3);
  p.set_probability(kOneRF, 0.4);
  CHECK(same_edges(prune(p, space).edges(), {kOneRF}));

  const std::vector<Edge> dag{{0, 1}, {1, F}, {2, F}};
  EdgePolicy q(3, dag, 0.01, 0.7);
  CHECK(same_edges(prune(q, space).edges(), dag));
}

TEST_CASE("a consistently rewarded edge rises above one half") {
  EdgePolicy p(3, 0.05, 0.5);
  MovingAverageBaseline base(50);
  Rng rng(17);
  for (int i = 0; i < 3000; ++i) {
    const auto g = repair(sample_edges(p, rng), p);
    const bool has = std::find(g.edges.begin(), g.edges.end(), kIRCoTF) != g.edges.end();
    const double r = has ? 1.0 : 0.0;
    p.reinforce_step(g, r, base.value());
    base.push(r);
  }
  CHECK(p.probability(kIRCoTF) > 0.5);
}

TEST_CASE("moving-average baseline") {
  MovingAverageBaseline b(3);
  CHECK(b.value() == 0.0);
  b.push(1.0);
  CHECK(b.value() == 1.0);
  b.push(2.0);
  b.push(3.0);
  b.push(4.0);
  CHECK(b.value() == doctest::Approx(3.0));
  CHECK_THROWS_AS(MovingAverageBaseline(0), Error);
}

TEST_CASE("policy construction errors") {
  CHECK_THROWS_AS(EdgePolicy(3, 0.0), Error);
  CHECK_THROWS_AS(EdgePolicy(3, 0.01, 1.5), Error);
  CHECK_THROWS_AS(EdgePolicy(2, std::vector<Edge>{{F, 0}}, 0.01), Error);
  EdgePolicy p(2, 0.01);
  CHECK_THROWS_AS(p.probability({0, 2}), Error);
}
