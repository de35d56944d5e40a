#include "aqa/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "aqa/error.hpp"

namespace aqa {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

double token_f1(std::string_view prediction, std::string_view gold) {
  const auto pred = tokenize(prediction);
  const auto ref = tokenize(gold);
  if (pred.empty() && ref.empty()) return 1.0;
  if (pred.empty() || ref.empty()) return 0.0;

  std::map<std::string_view, int> counts;
  for (const auto& t : ref) ++counts[t];
  int overlap = 0;
  for (const auto& t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / static_cast<double>(pred.size());
  const double recall = static_cast<double>(overlap) / static_cast<double>(ref.size());
  return 2.0 * precision * recall / (precision + recall);
}

double max_token_f1(std::string_view prediction, std::span<const std::string> golds) {
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, token_f1(prediction, g));
  return best;
}

PenaltyPreset parse_penalty_preset(std::string_view name) {
  if (name == "none") return PenaltyPreset::none;
  if (name == "individual") return PenaltyPreset::individual;
  if (name == "collaborative") return PenaltyPreset::collaborative;
  throw Error(ErrorKind::config, "unknown penalty preset '" + std::string(name) + "'");
}

std::string_view to_string(PenaltyPreset p) {
  switch (p) {
    case PenaltyPreset::none: return "none";
    case PenaltyPreset::individual: return "individual";
    case PenaltyPreset::collaborative: return "collaborative";
  }
  return "none";
}

PenaltySchedule::PenaltySchedule(std::vector<PenaltyBand> bands) : bands_(std::move(bands)) {
  std::sort(bands_.begin(), bands_.end(),
            [](const auto& a, const auto& b) { return a.lower_s < b.lower_s; });
  for (std::size_t i = 0; i < bands_.size(); ++i) {
    const auto& b = bands_[i];
    if (!(b.divisor > 0.0)) throw Error(ErrorKind::config, "penalty divisor must be > 0");
    if (!(b.lower_s < b.upper_s)) throw Error(ErrorKind::config, "penalty band is empty");
    if (i > 0 && b.lower_s < bands_[i - 1].upper_s)
      throw Error(ErrorKind::config, "penalty bands overlap");
  }
}

PenaltySchedule PenaltySchedule::preset(PenaltyPreset p) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (p) {
    case PenaltyPreset::none: return PenaltySchedule{};
    case PenaltyPreset::individual: return PenaltySchedule({{1.0, inf, 1000.0}});
    case PenaltyPreset::collaborative:
      return PenaltySchedule({{1.0, 10.0, 10000.0}, {10.0, inf, 50.0}});
  }
  return PenaltySchedule{};
}

double PenaltySchedule::operator()(double seconds) const {
  if (!(seconds >= 0.0) || !std::isfinite(seconds))
    throw Error(ErrorKind::invalid_input, "execution time must be finite and >= 0");
  double t = 0.0;
  for (const auto& b : bands_)
    if (seconds > b.lower_s && seconds <= b.upper_s) t += seconds / b.divisor;
  return t;
}

double time_penalty(double seconds, PenaltyPreset mode) {
  return PenaltySchedule::preset(mode)(seconds);
}

void RewardConfig::validate() const {
  if (!(beta >= 0.0 && beta <= 1.0)) throw Error(ErrorKind::config, "beta must be in [0, 1]");
}

double reward(double performance, double seconds, const RewardConfig& cfg) {
  return cfg.beta * performance - (1.0 - cfg.beta) * cfg.schedule(seconds);
}

}  // namespace aqa
