// Eigen (via agents.hpp) must come before httplib: resolv.h defines _res.
#include "aqa/agents.hpp"
#include "aqa/error.hpp"

#include <chrono>
#include <cmath>
#include <regex>

#include <httplib.h>
#include <json.hpp>

namespace aqa {

namespace {

struct ParsedUrl {
  std::string origin;
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  static const std::regex re(R"(^(http://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re))
    throw Error(ErrorKind::config, "endpoint must look like http://host:port/path, got '" + url + "'");
  return {m[1].str(), m[2].matched ? m[2].str() : std::string("/")};
}

void set_timeouts(httplib::Client& cli, double timeout_s) {
  const auto total = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(timeout_s));
  const auto sec = static_cast<time_t>(total.count() / 1'000'000);
  const auto usec = static_cast<time_t>(total.count() % 1'000'000);
  cli.set_connection_timeout(sec, usec);
  cli.set_read_timeout(sec, usec);
  cli.set_write_timeout(sec, usec);
}

}  // namespace

AgentResponse remote_answer(const std::string& endpoint, std::string_view question,
                            std::span<const UpstreamMessage> upstream, double timeout_s) {
  if (!(timeout_s > 0.0) || !std::isfinite(timeout_s))
    throw Error(ErrorKind::config, "timeout_s must be > 0");
  const auto url = parse_url(endpoint);

  nlohmann::json body = {{"question", question}, {"upstream", nlohmann::json::array()}};
  for (const auto& m : upstream) body["upstream"].push_back({{"agent", m.agent.name}, {"text", m.text}});

  httplib::Client cli(url.origin);
  set_timeouts(cli, timeout_s);

  const auto start = std::chrono::steady_clock::now();
  auto res = cli.Post(url.path, body.dump(), "application/json");
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!res) {
    const auto err = res.error();
    const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                           err == httplib::Error::Read || elapsed >= timeout_s;
    throw BackendError(timed_out ? ErrorKind::backend_timeout : ErrorKind::backend_unreachable,
                       endpoint + ": " + httplib::to_string(err), elapsed);
  }
  if (res->status != 200)
    throw BackendError(ErrorKind::backend_protocol,
                       endpoint + ": HTTP status " + std::to_string(res->status), elapsed);

  AgentResponse out;
  try {
    const auto doc = nlohmann::json::parse(res->body);
    out.text = doc.at("answer").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(ErrorKind::backend_protocol,
                       endpoint + ": malformed response: " + e.what(), elapsed);
  }
  out.latency_s = elapsed;
  out.upstream_inputs.assign(upstream.begin(), upstream.end());
  return out;
}

RemoteBackend::RemoteBackend(std::map<std::string, std::string> endpoints, double timeout_s)
    : endpoints_(std::move(endpoints)), timeout_s_(timeout_s) {
  if (endpoints_.empty()) throw Error(ErrorKind::config, "remote backend has no endpoints");
  if (!(timeout_s_ > 0.0)) throw Error(ErrorKind::config, "timeout_s must be > 0");
  for (const auto& [_, url] : endpoints_) parse_url(url);
}

AgentResponse RemoteBackend::answer(const AgentId& agent, const AnswerRequest& request) const {
  auto it = endpoints_.find(agent.name);
  if (it == endpoints_.end())
    throw Error(ErrorKind::config, "no remote endpoint configured for agent " + agent.name);
  return remote_answer(it->second, request.question, request.upstream, timeout_s_);
}

}  // namespace aqa
