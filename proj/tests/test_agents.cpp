#include <doctest.h>

#include <cmath>

#include "aqa/agents.hpp"
#include "aqa/error.hpp"
#include "aqa/metrics.hpp"
#include "aqa/rng.hpp"

using namespace aqa;

namespace {

AgentProfile flat(double f1, double latency = 2.0) {
  AgentProfile p{{0, "X"}, {}};
  for (auto l : {"A", "B", "C"}) p.per_context[l] = {f1, 0.0, latency, 0.1};
  return p;
}

}  // namespace

TEST_CASE("degenerate profiles") {
  Rng rng(1);
  const std::string gold = "paris";
  for (int i = 0; i < 200; ++i) {
    CHECK(token_f1(simulate_answer(flat(1.0), "A", gold, rng).text, gold) == 1.0);
    CHECK(token_f1(simulate_answer(flat(0.0), "B", gold, rng).text, gold) == 0.0);
  }
}

TEST_CASE("unknown context label is rejected") {
  Rng rng(1);
  CHECK_THROWS_AS(simulate_answer(flat(0.5), "Z", "paris", rng), Error);
}

TEST_CASE("default profiles hold the calibration table") {
  const auto p = default_profiles();
  REQUIRE(p.size() == 3);
  CHECK(p[0].agent.name == "NoR");
  CHECK(p[1].agent.name == "OneR");
  CHECK(p[2].agent.name == "IRCoT");
  CHECK(p[0].at("A").f1_mean == 0.914);
  CHECK(p[0].at("A").latency_mean_s == 0.66);
  CHECK(p[1].at("B").f1_mean == 0.518);
  CHECK(p[1].at("B").latency_mean_s == 7.34);
  CHECK(p[2].at("C").f1_mean == 0.458);
  CHECK(p[2].at("C").latency_mean_s == 184.85);
}

TEST_CASE("Monte-Carlo calibration of every cell") {
  for (const auto& p : default_profiles()) {
    std::uint64_t cell = 0;
    for (const auto& [label, stats] : p.per_context) {
      Rng rng(derive_seed(77, {p.agent.index, cell++}));
      const std::string gold = "answer 0042";
      double f1 = 0.0, lat = 0.0;
      const int n = 10000;
      for (int i = 0; i < n; ++i) {
        const auto r = simulate_answer(p, label, gold, rng);
        f1 += token_f1(r.text, gold);
        lat += r.latency_s;
        REQUIRE(r.latency_s > 0.0);
        REQUIRE(std::isfinite(r.latency_s));
      }
      CHECK(std::abs(f1 / n - stats.f1_mean) <= 0.02);
      CHECK(std::abs(lat / n - stats.latency_mean_s) <= 0.02 * stats.latency_mean_s);
    }
  }
}

TEST_CASE("dispersion keeps the mean") {
  AgentProfile p = flat(0.6);
  p.per_context["A"].f1_dispersion = 0.2;
  Rng rng(4);
  double f1 = 0.0;
  for (int i = 0; i < 20000; ++i) f1 += token_f1(simulate_answer(p, "A", "x", rng).text, "x");
  CHECK(std::abs(f1 / 20000 - 0.6) < 0.02);
}

TEST_CASE("distractors are token-disjoint from gold and distinct per agent") {
  const std::vector<std::string> gold{"wrong0nor", "answer 7"};
  const auto d0 = distractor_for({0, "NoR"}, gold);
  const auto d1 = distractor_for({1, "OneR"}, gold);
  CHECK(d0 != d1);
  for (const auto& g : gold) {
    CHECK(token_f1(d0, g) == 0.0);
    CHECK(token_f1(d1, g) == 0.0);
  }
}

TEST_CASE("seeded backend is deterministic") {
  SimulatorBackend sim(default_profiles());
  const std::vector<std::string> gold{"answer 1"};
  for (std::uint64_t s = 0; s < 50; ++s) {
    AnswerRequest req{"q", gold, "B", {}, s};
    const auto a = sim.answer({1, "OneR"}, req);
    const auto b = sim.answer({1, "OneR"}, req);
    CHECK(a.text == b.text);
    CHECK(a.latency_s == b.latency_s);
  }
}

TEST_CASE("backend checks agent identity") {
  SimulatorBackend sim(default_profiles());
  const std::vector<std::string> gold{"g"};
  AnswerRequest req{"q", gold, "A", {}, 0};
  CHECK_THROWS_AS(sim.answer({5, "Nope"}, req), Error);
  CHECK_THROWS_AS(sim.answer({0, "OneR"}, req), Error);
}

TEST_CASE("upstream copy factor") {
  const std::vector<std::string> gold{"gold"};
  const std::vector<UpstreamMessage> up{{{0, "NoR"}, "gold"}};
  SimulatorBackend off(std::vector<AgentProfile>{flat(0.0)});
  SimulatorBackend on(std::vector<AgentProfile>{flat(0.0)}, {0.9});
  double f_off = 0.0, f_on = 0.0;
  for (std::uint64_t s = 0; s < 5000; ++s) {
    AnswerRequest req{"q", gold, "A", up, s};
    f_off += token_f1(off.answer({0, "X"}, req).text, "gold");
    f_on += token_f1(on.answer({0, "X"}, req).text, "gold");
  }
  CHECK(f_off == 0.0);
  CHECK(std::abs(f_on / 5000 - 0.9) < 0.02);
}

TEST_CASE("profile JSON round-trip and validation") {
  const auto p = default_profiles();
  const auto back = parse_profiles(nlohmann::ordered_json::parse(profiles_to_json(p).dump()));
  REQUIRE(back.size() == p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(back[i].agent == p[i].agent);
    for (const auto& [l, s] : p[i].per_context) {
      CHECK(back[i].at(l).f1_mean == s.f1_mean);
      CHECK(back[i].at(l).latency_mean_s == s.latency_mean_s);
    }
  }
  auto bad = nlohmann::ordered_json::parse(R"({"X": {"A": {"f1_mean": 1.5, "latency_mean_s": 1}}})");
  CHECK_THROWS_AS(parse_profiles(bad), Error);
  auto neg = nlohmann::ordered_json::parse(R"({"X": {"A": {"f1_mean": 0.5, "latency_mean_s": -1}}})");
  CHECK_THROWS_AS(parse_profiles(neg), Error);
  CHECK_THROWS_AS(load_profiles("/nonexistent/profile.json"), Error);
}
