#include <doctest.h>

#include <set>

#include "aqa/action_space.hpp"
#include "aqa/error.hpp"

using namespace aqa;

namespace {

using EdgeList = std::set<std::pair<std::size_t, std::size_t>>;

// Exhaustive oracle. Node n stands for the final node. Written from the three
// constraints directly: DFS cycle check, final degree, reachability.
std::set<EdgeList> brute_force(std::size_t n, std::size_t max_edges = SIZE_MAX) {
  std::vector<std::pair<std::size_t, std::size_t>> cand;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= n; ++j)
      if (i != j) cand.push_back({i, j});
  std::set<EdgeList> out;
  for (std::uint64_t mask = 0; mask < (1ull << cand.size()); ++mask) {
    EdgeList es;
    for (std::size_t k = 0; k < cand.size(); ++k)
      if (mask >> k & 1) es.insert(cand[k]);
    if (es.size() > max_edges) continue;

    std::vector<std::vector<std::size_t>> adj(n + 1);
    std::vector<int> deg(n + 1, 0);
    for (auto [a, b] : es) {
      adj[a].push_back(b);
      ++deg[a];
      ++deg[b];
    }
    std::vector<int> color(n + 1, 0);
    bool cyclic = false;
    std::function<void(std::size_t)> dfs = [&](std::size_t u) {
      color[u] = 1;
      for (auto v : adj[u]) {
        if (color[v] == 1) cyclic = true;
        else if (color[v] == 0) dfs(v);
      }
      color[u] = 2;
    };
    for (std::size_t u = 0; u <= n; ++u)
      if (color[u] == 0) dfs(u);
    if (cyclic) continue;
    if (deg[n] == 0) continue;  // no edges leave final by construction
    bool orphan = false;
    for (std::size_t a = 0; a < n; ++a) {
      if (deg[a] == 0) continue;
      std::vector<bool> seen(n + 1, false);
      std::vector<std::size_t> stack{a};
      while (!stack.empty()) {
        auto u = stack.back();
        stack.pop_back();
        if (seen[u]) continue;
        seen[u] = true;
        for (auto v : adj[u]) stack.push_back(v);
      }
      if (!seen[n]) orphan = true;
    }
    if (orphan) continue;
    out.insert(es);
  }
  return out;
}

std::set<EdgeList> as_sets(const ActionSpace& space) {
  std::set<EdgeList> out;
  const std::size_t n = space.agents().size();
  for (const auto& g : space.graphs()) {
    EdgeList es;
    for (const auto& e : g.edges()) es.insert({e.from, e.to == kFinalNode ? n : e.to});
    out.insert(es);
  }
  return out;
}

std::vector<AgentId> agents(std::size_t n) {
  std::vector<std::string> names{"NoR", "OneR", "IRCoT", "Extra"};
  names.resize(n);
  return make_agents(names);
}

CandidateGraph cg(std::size_t n, std::vector<Edge> edges) { return {n, std::move(edges)}; }

constexpr NodeIndex F = kFinalNode;

}  // namespace

TEST_CASE("enumeration equals the brute-force oracle") {
  const std::size_t golden[] = {0, 1, 7, 97};
  for (std::size_t n = 1; n <= 3; ++n) {
    const auto space = enumerate_action_space(agents(n));
    const auto want = brute_force(n);
    CHECK(space.size() == want.size());
    CHECK(as_sets(space) == want);
    CHECK(space.size() == golden[n]);
  }
}

TEST_CASE("single-edge mode yields one graph per agent") {
  for (std::size_t n = 1; n <= 4; ++n) {
    EnumerationOptions o;
    o.max_edges = 1;
    const auto space = enumerate_action_space(agents(n), o);
    REQUIRE(space.size() == n);
    for (std::size_t i = 0; i < n; ++i) {
      REQUIRE(space.graphs()[i].edges().size() == 1);
      CHECK(space.graphs()[i].edges()[0] == Edge{i, F});
    }
  }
  EnumerationOptions o2;
  o2.max_edges = 2;
  CHECK(as_sets(enumerate_action_space(agents(3), o2)) == brute_force(3, 2));
}

TEST_CASE("every enumerated graph validates and ids follow canonical order") {
  const auto space = enumerate_action_space(agents(3));
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& g = space.graphs()[i];
    CHECK(g.action_id().value == i);
    CHECK(validate_graph(g.as_candidate()).valid());
    CHECK(space.find(g.key()) == ActionId{i});
    if (i > 0) {
      const auto& prev = space.graphs()[i - 1];
      const bool ordered = prev.edges().size() < g.edges().size() ||
                           (prev.edges().size() == g.edges().size() && prev.edges() < g.edges());
      CHECK(ordered);
    }
  }
  const auto again = enumerate_action_space(agents(3));
  for (std::size_t i = 0; i < space.size(); ++i) CHECK(again.graphs()[i].key() == space.graphs()[i].key());
}

TEST_CASE("adding an agent keeps the old strategies") {
  for (std::size_t n = 1; n < 3; ++n) {
    const auto small = enumerate_action_space(agents(n));
    const auto big = enumerate_action_space(agents(n + 1));
    for (const auto& g : small.graphs()) CHECK(big.find(g.key()).has_value());
  }
}

TEST_CASE("validate_graph examples") {
  CHECK(validate_graph(cg(2, {{0, F}, {1, 0}})).valid());

  const auto cyc = validate_graph(cg(2, {{0, 1}, {1, 0}, {0, F}}));
  CHECK(cyc.violates(Constraint::cycle));

  const auto orphan = validate_graph(cg(3, {{0, F}, {1, 2}}));
  CHECK(orphan.violates(Constraint::orphan_island));
  CHECK_FALSE(orphan.violates(Constraint::cycle));

  const auto unfed = validate_graph(cg(2, {{0, 1}}));
  CHECK(unfed.violates(Constraint::final_degree));
  CHECK(validate_graph(cg(2, {})).violates(Constraint::final_degree));
  CHECK(validate_graph(cg(2, {{F, 0}, {0, F}})).violates(Constraint::final_degree));

  CHECK(to_string(Constraint::cycle) == "cycle");
  CHECK(to_string(Constraint::final_degree) == "final-degree");
  CHECK(to_string(Constraint::orphan_island) == "orphan-island");
  CHECK_THROWS_AS(validate_graph(cg(2, {{0, 5}})), Error);
}

TEST_CASE("canonical_form examples") {
  CHECK(canonical_form(cg(2, {{1, F}, {0, F}})) == canonical_form(cg(2, {{0, F}, {1, F}})));
  CHECK(canonical_form(cg(3, {{0, F}})) == canonical_form(cg(1, {{0, F}})));
  CHECK(canonical_form(cg(2, {{0, 1}, {1, F}})) != canonical_form(cg(2, {{1, 0}, {0, F}})));
  CHECK(canonical_form(cg(2, {{0, 1}, {1, F}})) == "0>1;1>F");
}

TEST_CASE("edge masks and predicates restrict the space") {
  EnumerationOptions o;
  o.edge_allowed = [](const Edge& e) { return e.to == kFinalNode; };
  const auto fan_in = enumerate_action_space(agents(3), o);
  CHECK(fan_in.size() == 7);

  EnumerationOptions p;
  p.predicates.push_back([](const CandidateGraph& g) { return g.edges.size() <= 2; });
  CHECK(enumerate_action_space(agents(3), p).size() == brute_force(3, 2).size());
}

TEST_CASE("bad inputs") {
  CHECK_THROWS_AS(enumerate_action_space({}), Error);
  const auto space = enumerate_action_space(agents(2));
  CHECK_THROWS_AS(space.lookup(cg(2, {{0, 1}})), Error);
  CHECK_THROWS_AS(StrategyGraph(agents(2), {{0, 1}}, ActionId{0}), Error);
  CHECK(space[ActionId{0}].describe() == "NoR->final");
}
