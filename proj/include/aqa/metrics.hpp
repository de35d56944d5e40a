#pragma once

#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aqa {

/// Lowercased alphanumeric runs.
std::vector<std::string> tokenize(std::string_view text);

/// Multiset token-overlap F1. Both empty -> 1, exactly one empty -> 0.
double token_f1(std::string_view prediction, std::string_view gold);

/// Best F1 over a list of acceptable answers; 0 if the list is empty.
double max_token_f1(std::string_view prediction, std::span<const std::string> golds);

/// Adds s/divisor to the penalty when lower < s <= upper.
struct PenaltyBand {
  double lower_s = 0.0;
  double upper_s = std::numeric_limits<double>::infinity();
  double divisor = 1.0;
};

enum class PenaltyPreset { none, individual, collaborative };

PenaltyPreset parse_penalty_preset(std::string_view name);
std::string_view to_string(PenaltyPreset p);

class PenaltySchedule {
 public:
  PenaltySchedule() = default;
  explicit PenaltySchedule(std::vector<PenaltyBand> bands);

  static PenaltySchedule preset(PenaltyPreset p);

  /// Throws on negative or non-finite seconds.
  double operator()(double seconds) const;

  const std::vector<PenaltyBand>& bands() const noexcept { return bands_; }

 private:
  std::vector<PenaltyBand> bands_;
};

/// Exact preset formulas: individual T = S*1[S>1]/1000, collaborative
/// T = S*(1[1<S<=10]/10000 + 1[S>10]/50).
double time_penalty(double seconds, PenaltyPreset mode);

struct RewardConfig {
  double beta = 0.5;
  PenaltySchedule schedule = PenaltySchedule::preset(PenaltyPreset::collaborative);

  static RewardConfig time_agnostic() { return {1.0, PenaltySchedule{}}; }
  static RewardConfig time_based(PenaltyPreset p, double beta = 0.5) {
    return {beta, PenaltySchedule::preset(p)};
  }
  void validate() const;
};

/// r = beta * p - (1 - beta) * T(s).
double reward(double performance, double seconds, const RewardConfig& cfg);

}  // namespace aqa
