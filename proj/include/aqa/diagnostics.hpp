#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>

#include "aqa/dataset.hpp"
#include "aqa/harness.hpp"
#include "aqa/reference.hpp"

namespace aqa {

struct DiagnosticsOptions {
  /// Write expected-reward rows every `stride` steps (the last step always).
  std::size_t stride = 1;
  std::size_t selection_window = 100;
  double alpha = 2.0;
};

struct DiagnosticsFiles {
  std::filesystem::path expected_rewards;
  std::filesystem::path selection_dist;
  std::filesystem::path summary;
};

/// Replays the bandit updates recorded in `episodes` and writes
///   expected_rewards.csv  step,context,action_id,expected_reward,reference_reward,best_reference_reward
///   selection_dist.csv    step,context,action_id,frequency   (rolling, per context)
///   summary.json
/// into `dir`. `reference` may be absent (non-simulator backends).
DiagnosticsFiles emit_diagnostics(std::span<const EpisodeRecord> episodes, const ActionSpace& space,
                                  const LabelSchema& schema,
                                  const std::optional<ReferenceTable>& reference,
                                  const std::filesystem::path& dir,
                                  const DiagnosticsOptions& options = {});

}  // namespace aqa
