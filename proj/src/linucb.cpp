#include "aqa/linucb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>

#include "aqa/error.hpp"

namespace aqa {

namespace {

constexpr std::string_view kCheckpointFormat = "aqa-linucb-checkpoint";

Eigen::MatrixXd invert_spd(const Eigen::MatrixXd& m) {
  const auto n = m.rows();
  return m.llt().solve(Eigen::MatrixXd::Identity(n, n));
}

std::vector<double> flatten_row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  return out;
}

Eigen::MatrixXd unflatten_row_major(const std::vector<double>& v, std::size_t d) {
  if (v.size() != d * d)
    throw Error(ErrorKind::config, "checkpoint matrix has " + std::to_string(v.size()) +
                                       " entries, expected " + std::to_string(d * d));
  Eigen::MatrixXd m(d, d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) m(r, c) = v[r * d + c];
  return m;
}

}  // namespace

ContextVector::ContextVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty())
    throw Error(ErrorKind::dimension, "context vector must have at least one feature");
  for (double v : values_)
    if (!std::isfinite(v))
      throw Error(ErrorKind::invalid_input, "context vector entries must be finite");
}

ArmState::ArmState(std::size_t d)
    : matrix_a(Eigen::MatrixXd::Identity(d, d)),
      vector_b(Eigen::VectorXd::Zero(d)),
      inverse_a(Eigen::MatrixXd::Identity(d, d)) {}

BanditModel::BanditModel(std::span<const ActionId> action_ids, std::size_t dimension,
                         double alpha)
    : dimension_(dimension), alpha_(alpha) {
  if (action_ids.empty()) throw Error(ErrorKind::config, "action set is empty");
  if (dimension == 0) throw Error(ErrorKind::config, "context dimension must be >= 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw Error(ErrorKind::config, "alpha must be a finite non-negative number");
  for (auto id : action_ids) {
    if (!arms_.emplace(id, ArmState(dimension)).second)
      throw Error(ErrorKind::config,
                  "duplicate action id " + std::to_string(id.value));
  }
}

std::vector<ActionId> BanditModel::action_ids() const {
  std::vector<ActionId> ids;
  ids.reserve(arms_.size());
  for (const auto& [id, _] : arms_) ids.push_back(id);
  return ids;
}

const ArmState& BanditModel::arm(ActionId action) const {
  auto it = arms_.find(action);
  if (it == arms_.end())
    throw Error(ErrorKind::unknown_action, "unknown action " + std::to_string(action.value));
  return it->second;
}

const ArmState& BanditModel::checked_arm(ActionId action, const ContextVector& x) const {
  if (x.dimension() != dimension_)
    throw Error(ErrorKind::dimension, "context has dimension " + std::to_string(x.dimension()) +
                                          ", model expects " + std::to_string(dimension_));
  return arm(action);
}

Eigen::VectorXd BanditModel::theta(ActionId action) const { return arm(action).theta(); }

double BanditModel::expected_reward(ActionId action, const ContextVector& x) const {
  const auto& s = checked_arm(action, x);
  return s.theta().dot(x.as_eigen());
}

double BanditModel::ucb_score(ActionId action, const ContextVector& x, double alpha) const {
  const auto& s = checked_arm(action, x);
  const auto xv = x.as_eigen();
  const double estimate = s.theta().dot(xv);
  // A^{-1} is SPD, so the quadratic form is non-negative up to rounding.
  const double variance = std::max(0.0, xv.dot(s.inverse_a * xv));
  return estimate + alpha * std::sqrt(variance);
}

std::vector<double> BanditModel::ucb_scores(const ContextVector& x, double alpha) const {
  std::vector<double> out;
  out.reserve(arms_.size());
  for (const auto& [id, _] : arms_) out.push_back(ucb_score(id, x, alpha));
  return out;
}

ActionId BanditModel::select_action(const ContextVector& x, double alpha) const {
  ActionId best{};
  double best_score = -std::numeric_limits<double>::infinity();
  bool first = true;
  for (const auto& [id, _] : arms_) {
    const double s = ucb_score(id, x, alpha);
    // Strict comparison keeps the earliest (smallest) id on ties.
    if (first || s > best_score) {
      best = id;
      best_score = s;
      first = false;
    }
  }
  return best;
}

void BanditModel::update(ActionId action, const ContextVector& x, double reward) {
  if (!std::isfinite(reward))
    throw Error(ErrorKind::invalid_input, "reward must be finite");
  checked_arm(action, x);
  auto& s = arms_.at(action);
  const auto xv = x.as_eigen();

  s.matrix_a.noalias() += xv * xv.transpose();
  s.vector_b.noalias() += reward * xv;
  ++s.update_count;

  if (s.update_count % kReinversionPeriod == 0) {
    s.inverse_a = invert_spd(s.matrix_a);
  } else {
    const Eigen::VectorXd ax = s.inverse_a * xv;
    const double denom = 1.0 + xv.dot(ax);
    s.inverse_a.noalias() -= (ax * ax.transpose()) / denom;
  }
}

nlohmann::json BanditModel::to_checkpoint() const {
  nlohmann::json arms = nlohmann::json::array();
  std::vector<std::size_t> order;
  for (const auto& [id, s] : arms_) {
    order.push_back(id.value);
    arms.push_back({
        {"action_id", id.value},
        {"update_count", s.update_count},
        {"a", flatten_row_major(s.matrix_a)},
        {"b", std::vector<double>(s.vector_b.data(), s.vector_b.data() + s.vector_b.size())},
        {"a_inv", flatten_row_major(s.inverse_a)},
    });
  }
  return {
      {"format", kCheckpointFormat},
      {"version", 1},
      {"dimension", dimension_},
      {"alpha", alpha_},
      {"layout", "row-major"},
      {"action_order", order},
      {"arms", arms},
  };
}

BanditModel BanditModel::from_checkpoint(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != kCheckpointFormat)
      throw Error(ErrorKind::config, "not a LinUCB checkpoint");
    const auto d = doc.at("dimension").get<std::size_t>();
    const auto alpha = doc.at("alpha").get<double>();
    std::vector<ActionId> ids;
    for (auto v : doc.at("action_order").get<std::vector<std::size_t>>())
      ids.push_back(ActionId{v});
    BanditModel model(ids, d, alpha);
    for (const auto& a : doc.at("arms")) {
      ActionId id{a.at("action_id").get<std::size_t>()};
      auto it = model.arms_.find(id);
      if (it == model.arms_.end())
        throw Error(ErrorKind::config, "checkpoint arm not in action order");
      auto& s = it->second;
      s.matrix_a = unflatten_row_major(a.at("a").get<std::vector<double>>(), d);
      const auto b = a.at("b").get<std::vector<double>>();
      if (b.size() != d) throw Error(ErrorKind::config, "checkpoint vector b has wrong size");
      s.vector_b = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(d));
      s.update_count = a.value("update_count", std::size_t{0});
      if (a.contains("a_inv"))
        s.inverse_a = unflatten_row_major(a.at("a_inv").get<std::vector<double>>(), d);
      else
        s.inverse_a = invert_spd(s.matrix_a);
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::config, std::string("malformed checkpoint: ") + e.what());
  }
}

}  // namespace aqa
