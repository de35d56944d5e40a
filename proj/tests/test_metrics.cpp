#include <doctest.h>

#include <cmath>
#include <random>

#include "aqa/error.hpp"
#include "aqa/metrics.hpp"

using namespace aqa;

TEST_CASE("token_f1 examples") {
  CHECK(token_f1("paris", "paris") == 1.0);
  CHECK(token_f1("london", "paris") == 0.0);
  CHECK(token_f1("the capital of france", "capital france") == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(std::abs(token_f1("the capital of france", "capital france") - 0.6667) < 1e-4);
}

TEST_CASE("token_f1 normalization and edge cases") {
  CHECK(token_f1("Paris!", "paris") == 1.0);
  CHECK(token_f1("New-York", "new york") == 1.0);
  CHECK(token_f1("", "") == 1.0);
  CHECK(token_f1("", "paris") == 0.0);
  CHECK(token_f1("a a b", "a b b") == doctest::Approx(2.0 / 3.0));
  CHECK(max_token_f1("paris", std::vector<std::string>{"london", "paris"}) == 1.0);
  CHECK(tokenize("Hello,  World 42") == std::vector<std::string>{"hello", "world", "42"});
}

TEST_CASE("token_f1 is symmetric") {
  const char* s[] = {"the cat sat", "cat", "a b c d", "sat on the mat", "", "cat cat dog"};
  for (auto a : s)
    for (auto b : s) CHECK(token_f1(a, b) == doctest::Approx(token_f1(b, a)));
}

TEST_CASE("time_penalty presets") {
  CHECK(time_penalty(0.66, PenaltyPreset::individual) == 0.0);
  CHECK(time_penalty(6.74, PenaltyPreset::collaborative) == doctest::Approx(0.000674).epsilon(1e-9));
  CHECK(std::abs(time_penalty(188.97, PenaltyPreset::collaborative) - 3.7794) < 1e-6);
  CHECK(time_penalty(1.0, PenaltyPreset::individual) == 0.0);
  CHECK(time_penalty(2.0, PenaltyPreset::individual) == doctest::Approx(0.002));
  CHECK(time_penalty(10.0, PenaltyPreset::collaborative) == doctest::Approx(0.001));
  CHECK(time_penalty(10.5, PenaltyPreset::collaborative) == doctest::Approx(0.21));
  CHECK(time_penalty(500.0, PenaltyPreset::none) == 0.0);
  CHECK_THROWS_AS(time_penalty(-1.0, PenaltyPreset::individual), Error);
  CHECK_THROWS_AS(time_penalty(std::nan(""), PenaltyPreset::individual), Error);
}

TEST_CASE("schedule validation") {
  CHECK_THROWS_AS(PenaltySchedule({{0.0, 5.0, 10.0}, {4.0, 8.0, 10.0}}), Error);
  CHECK_THROWS_AS(PenaltySchedule({{0.0, 5.0, 0.0}}), Error);
  const PenaltySchedule custom({{5.0, INFINITY, 100.0}, {0.0, 5.0, 1000.0}});
  CHECK(custom(4.0) == doctest::Approx(0.004));
  CHECK(custom(6.0) == doctest::Approx(0.06));
  CHECK(parse_penalty_preset("collaborative") == PenaltyPreset::collaborative);
  CHECK_THROWS_AS(parse_penalty_preset("bogus"), Error);
}

TEST_CASE("reward examples") {
  const auto ind = RewardConfig::time_based(PenaltyPreset::individual);
  const auto col = RewardConfig::time_based(PenaltyPreset::collaborative);
  CHECK(reward(0.914, 0.66, ind) == doctest::Approx(0.457).epsilon(1e-12));
  CHECK(reward(0.458, 184.85, col) == doctest::Approx(0.5 * 0.458 - 0.5 * 184.85 / 50).epsilon(1e-12));
  CHECK(reward(0.458, 184.85, col) == doctest::Approx(-1.6195).epsilon(1e-3));
  CHECK(reward(0.0, 0.0, col) == 0.0);
  CHECK(reward(0.0, 0.0, RewardConfig{0.2, PenaltySchedule::preset(PenaltyPreset::individual)}) == 0.0);
  for (double p : {0.0, 0.3, 0.914})
    for (double s : {0.1, 7.0, 190.0}) CHECK(reward(p, s, RewardConfig::time_agnostic()) == p);
}

TEST_CASE("collaborative schedule prefers OneR over IRCoT in context B") {
  const auto col = RewardConfig::time_based(PenaltyPreset::collaborative);
  CHECK(reward(0.518, 7.34, col) > reward(0.580, 192.30, col));
}

TEST_CASE("reward is monotone in performance and latency") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> up(0.0, 1.0), us(0.0, 300.0);
  for (auto cfg : {RewardConfig::time_based(PenaltyPreset::individual),
                   RewardConfig::time_based(PenaltyPreset::collaborative),
                   RewardConfig::time_agnostic()}) {
    for (int i = 0; i < 2000; ++i) {
      double p1 = up(rng), p2 = up(rng), s1 = us(rng), s2 = us(rng);
      if (p1 > p2) std::swap(p1, p2);
      if (s1 > s2) std::swap(s1, s2);
      CHECK(reward(p1, s1, cfg) <= reward(p2, s1, cfg));
      CHECK(reward(p1, s1, cfg) >= reward(p1, s2, cfg));
    }
  }
}

TEST_CASE("reward config validation") {
  CHECK_THROWS_AS((RewardConfig{1.5, PenaltySchedule{}}.validate()), Error);
  CHECK_THROWS_AS((RewardConfig{-0.1, PenaltySchedule{}}.validate()), Error);
}
