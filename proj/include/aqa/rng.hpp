#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace aqa {

using Rng = std::mt19937_64;

// Stream tags keep the sub-streams split from one master seed disjoint.
enum class Stream : std::uint64_t {
  shuffle = 1,
  train_episode = 2,
  eval_episode = 3,
  baseline_sample = 4,
  baseline_episode = 5,
  dataset = 6,
  calibration = 7,
  reference = 8,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = splitmix64(master);
  for (auto p : path) h = splitmix64(h ^ splitmix64(p));
  return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                                    std::uint64_t index = 0) noexcept {
  return derive_seed(master, {static_cast<std::uint64_t>(stream), index});
}

}  // namespace aqa
