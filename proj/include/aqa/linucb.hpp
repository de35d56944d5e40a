#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace aqa {

/// Feature vector x_t observed for one question. Fixed length, finite entries.
class ContextVector {
 public:
  explicit ContextVector(std::vector<double> values);

  std::size_t dimension() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  Eigen::Map<const Eigen::VectorXd> as_eigen() const {
    return {values_.data(), static_cast<Eigen::Index>(values_.size())};
  }

  bool operator==(const ContextVector&) const = default;

 private:
  std::vector<double> values_;
};

/// Canonical index of an action in the enumerated action space.
struct ActionId {
  std::size_t value = 0;
  auto operator<=>(const ActionId&) const = default;
};

/// Ridge state of one arm. `inverse_a` is maintained incrementally.
struct ArmState {
  Eigen::MatrixXd matrix_a;
  Eigen::VectorXd vector_b;
  Eigen::MatrixXd inverse_a;
  std::size_t update_count = 0;

  explicit ArmState(std::size_t d);

  Eigen::VectorXd theta() const { return inverse_a * vector_b; }
};

/// Disjoint-arm LinUCB. Arms are keyed and iterated in canonical action order.
///
/// Not internally synchronized: `select_action` and `update` on one model must
/// be serialized by the caller. Const members may run concurrently between
/// updates.
class BanditModel {
 public:
  /// Inverse is refreshed by a direct inversion every this many updates of an
  /// arm; the other updates use Sherman-Morrison.
  static constexpr std::size_t kReinversionPeriod = 1000;

  BanditModel(std::span<const ActionId> action_ids, std::size_t dimension,
              double alpha);

  std::size_t dimension() const noexcept { return dimension_; }
  double alpha() const noexcept { return alpha_; }
  std::size_t num_arms() const noexcept { return arms_.size(); }
  std::vector<ActionId> action_ids() const;

  const ArmState& arm(ActionId action) const;
  bool contains(ActionId action) const { return arms_.contains(action); }

  Eigen::VectorXd theta(ActionId action) const;

  /// theta_a^T x, the exploitation term alone.
  double expected_reward(ActionId action, const ContextVector& x) const;

  double ucb_score(ActionId action, const ContextVector& x) const {
    return ucb_score(action, x, alpha_);
  }
  double ucb_score(ActionId action, const ContextVector& x, double alpha) const;

  /// All scores in canonical action order.
  std::vector<double> ucb_scores(const ContextVector& x) const {
    return ucb_scores(x, alpha_);
  }
  std::vector<double> ucb_scores(const ContextVector& x, double alpha) const;

  /// Argmax of ucb_score; ties go to the smallest action id.
  ActionId select_action(const ContextVector& x) const {
    return select_action(x, alpha_);
  }
  ActionId select_action(const ContextVector& x, double alpha) const;

  /// Rank-one update of the chosen arm. Throws without touching the model if
  /// x or r is not finite or the action is unknown.
  void update(ActionId action, const ContextVector& x, double reward);

  nlohmann::json to_checkpoint() const;
  static BanditModel from_checkpoint(const nlohmann::json& doc);

 private:
  const ArmState& checked_arm(ActionId action, const ContextVector& x) const;

  std::map<ActionId, ArmState> arms_;
  std::size_t dimension_;
  double alpha_;
};

inline BanditModel init_model(std::span<const ActionId> action_ids,
                              std::size_t dimension, double alpha) {
  return BanditModel(action_ids, dimension, alpha);
}

}  // namespace aqa
