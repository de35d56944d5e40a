#include "aqa/agents.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "aqa/error.hpp"
#include "aqa/metrics.hpp"

namespace aqa {

namespace {

ContextStats cell(double f1, double seconds) { return {f1, 0.0, seconds, 0.1}; }

void validate(const ContextStats& s, const std::string& where) {
  if (!(s.f1_mean >= 0.0 && s.f1_mean <= 1.0))
    throw Error(ErrorKind::config, where + ": f1_mean must be in [0, 1]");
  if (!(s.f1_dispersion >= 0.0)) throw Error(ErrorKind::config, where + ": f1_dispersion < 0");
  if (!(s.latency_mean_s > 0.0) || !std::isfinite(s.latency_mean_s))
    throw Error(ErrorKind::config, where + ": latency_mean_s must be > 0");
  if (!(s.latency_dispersion >= 0.0))
    throw Error(ErrorKind::config, where + ": latency_dispersion < 0");
}

// Success probability for one call. With dispersion, p ~ Beta with mean
// f1_mean and the requested standard deviation (capped to what a Beta allows).
double draw_success_probability(const ContextStats& s, Rng& rng) {
  const double m = s.f1_mean;
  if (s.f1_dispersion <= 0.0 || m <= 0.0 || m >= 1.0) return m;
  const double max_var = m * (1.0 - m);
  const double var = std::min(s.f1_dispersion * s.f1_dispersion, 0.999 * max_var);
  const double k = max_var / var - 1.0;
  std::gamma_distribution<double> ga(m * k, 1.0);
  std::gamma_distribution<double> gb((1.0 - m) * k, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x + y > 0.0 ? x / (x + y) : m;
}

}  // namespace

const ContextStats& AgentProfile::at(std::string_view label) const {
  auto it = per_context.find(label);
  if (it == per_context.end())
    throw Error(ErrorKind::invalid_input,
                "agent " + agent.name + " has no profile for context '" + std::string(label) + "'");
  return it->second;
}

std::vector<AgentProfile> default_profiles() {
  return {
      {{0, "NoR"}, {{"A", cell(0.914, 0.66)}, {"B", cell(0.061, 0.66)}, {"C", cell(0.066, 0.67)}}},
      {{1, "OneR"}, {{"A", cell(0.677, 6.46)}, {"B", cell(0.518, 7.34)}, {"C", cell(0.146, 6.41)}}},
      {{2, "IRCoT"},
       {{"A", cell(0.730, 189.78)}, {"B", cell(0.580, 192.30)}, {"C", cell(0.458, 184.85)}}},
  };
}

std::vector<AgentProfile> parse_profiles(const nlohmann::ordered_json& doc) {
  if (!doc.is_object() || doc.empty())
    throw Error(ErrorKind::config, "profile document must be a non-empty object");
  std::vector<AgentProfile> out;
  try {
    for (const auto& [name, contexts] : doc.items()) {
      AgentProfile p{{out.size(), name}, {}};
      for (const auto& [label, v] : contexts.items()) {
        ContextStats s;
        s.f1_mean = v.at("f1_mean").get<double>();
        s.latency_mean_s = v.at("latency_mean_s").get<double>();
        s.f1_dispersion = v.value("f1_dispersion", 0.0);
        s.latency_dispersion = v.value("latency_dispersion", 0.1);
        validate(s, name + "/" + label);
        p.per_context.emplace(label, s);
      }
      out.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::config, std::string("malformed profile: ") + e.what());
  }
  return out;
}

std::vector<AgentProfile> load_profiles(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open profile file " + path.string());
  try {
    return parse_profiles(nlohmann::ordered_json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::config, std::string("profile file is not JSON: ") + e.what());
  }
}

nlohmann::ordered_json profiles_to_json(std::span<const AgentProfile> profiles) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& p : profiles) {
    auto& agent = doc[p.agent.name];
    for (const auto& [label, s] : p.per_context)
      agent[label] = {{"f1_mean", s.f1_mean},
                      {"f1_dispersion", s.f1_dispersion},
                      {"latency_mean_s", s.latency_mean_s},
                      {"latency_dispersion", s.latency_dispersion}};
  }
  return doc;
}

std::string distractor_for(const AgentId& agent, std::span<const std::string> gold) {
  std::set<std::string> used;
  for (const auto& g : gold)
    for (auto& t : tokenize(g)) used.insert(std::move(t));
  std::string tag;
  for (char c : agent.name)
    if (std::isalnum(static_cast<unsigned char>(c)))
      tag.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  std::string base = "wrong" + std::to_string(agent.index) + tag;
  std::string candidate = base;
  for (int k = 0; used.contains(candidate); ++k) candidate = base + "x" + std::to_string(k);
  return candidate;
}

double sample_latency(const ContextStats& stats, Rng& rng) {
  const double m = stats.latency_mean_s;
  const double cv = stats.latency_dispersion;
  if (cv <= 0.0) return m;
  const double sigma2 = std::log1p(cv * cv);
  std::lognormal_distribution<double> dist(std::log(m) - 0.5 * sigma2, std::sqrt(sigma2));
  return std::max(dist(rng), std::numeric_limits<double>::min());
}

AgentResponse simulate_answer(const AgentProfile& profile, std::string_view context_label,
                              std::span<const std::string> gold, Rng& rng,
                              std::span<const UpstreamMessage> upstream,
                              const SimulatorOptions& options) {
  const auto& stats = profile.at(context_label);
  // Fixed draw order: success probability, outcome, latency.
  double p = draw_success_probability(stats, rng);
  const std::string* copied = nullptr;
  if (options.upstream_copy_factor > 0.0) {
    double best = 0.0;
    for (const auto& m : upstream) {
      const double f = max_token_f1(m.text, gold);
      if (f > best) {
        best = f;
        copied = &m.text;
      }
    }
    if (options.upstream_copy_factor * best > p)
      p = options.upstream_copy_factor * best;
    else
      copied = nullptr;
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool success = unit(rng) < p;

  AgentResponse r;
  if (success)
    r.text = copied ? *copied : (gold.empty() ? std::string() : gold.front());
  else
    r.text = distractor_for(profile.agent, gold);
  r.latency_s = sample_latency(stats, rng);
  r.upstream_inputs.assign(upstream.begin(), upstream.end());
  return r;
}

SimulatorBackend::SimulatorBackend(std::vector<AgentProfile> profiles, SimulatorOptions options)
    : profiles_(std::move(profiles)), options_(options) {
  if (profiles_.empty()) throw Error(ErrorKind::config, "simulator needs at least one profile");
  for (std::size_t i = 0; i < profiles_.size(); ++i) {
    if (profiles_[i].agent.index != i)
      throw Error(ErrorKind::config, "profile agent indices must be contiguous from 0");
    for (const auto& [label, s] : profiles_[i].per_context)
      validate(s, profiles_[i].agent.name + "/" + label);
  }
  if (!(options_.upstream_copy_factor >= 0.0 && options_.upstream_copy_factor <= 1.0))
    throw Error(ErrorKind::config, "upstream_copy_factor must be in [0, 1]");
}

const AgentProfile& SimulatorBackend::profile(const AgentId& agent) const {
  if (agent.index >= profiles_.size() || profiles_[agent.index].agent.name != agent.name)
    throw Error(ErrorKind::config, "simulator has no profile for agent " + agent.name);
  return profiles_[agent.index];
}

std::vector<AgentId> SimulatorBackend::agents() const {
  std::vector<AgentId> out;
  for (const auto& p : profiles_) out.push_back(p.agent);
  return out;
}

AgentResponse SimulatorBackend::answer(const AgentId& agent, const AnswerRequest& request) const {
  Rng rng(request.stream_seed);
  return simulate_answer(profile(agent), request.context_label, request.gold, rng,
                         request.upstream, options_);
}

}  // namespace aqa
