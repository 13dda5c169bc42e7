#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "openxor/llm.hpp"

namespace openxor::llm {

std::string_view to_string(TransportError::Kind kind) {
  switch (kind) {
    case TransportError::Kind::Network: return "network";
    case TransportError::Kind::Auth: return "auth";
    case TransportError::Kind::RateLimited: return "rate_limited";
    case TransportError::Kind::Server: return "server";
    case TransportError::Kind::Protocol: return "protocol";
  }
  return "unknown";
}

namespace {

struct Target {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Target split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ContractViolation(fmt::format("endpoint url '{}' lacks a scheme", url));
  const auto path_start = url.find('/', scheme_end + 3);
  Target t;
  t.origin = url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  constexpr std::string_view suffix = "/chat/completions";
  if (!path.ends_with(suffix)) path += suffix;
  t.path = path;
  return t;
}

std::chrono::seconds retry_delay(const httplib::Result& res, int attempt, std::chrono::seconds cap) {
  std::chrono::seconds delay{1LL << std::min(attempt, 6)};
  if (res->has_header("Retry-After")) {
    try {
      delay = std::chrono::seconds(std::stoll(res->get_header_value("Retry-After")));
    } catch (const std::exception&) {
      // HTTP-date form: keep the exponential delay
    }
  }
  return std::clamp(delay, std::chrono::seconds{0}, cap);
}

}  // namespace

Submission submit(const Instance& instance, const EndpointConfig& config) {
  if (config.url.empty() || config.model.empty()) throw ContractViolation("submit: endpoint url and model are required");
  const char* key = std::getenv(config.api_key_env.c_str());
  if (!key || !*key) {
    throw ContractViolation(fmt::format("submit: credential variable {} is not set", config.api_key_env));
  }
  const Target target = split_url(config.url);

  nlohmann::ordered_json body;
  body["model"] = config.model;
  body["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", render_prompt(instance)}}});
  body["temperature"] = config.temperature;
  if (config.max_tokens) body["max_tokens"] = *config.max_tokens;
  const std::string payload = body.dump();

  httplib::Client client(target.origin);
  client.set_connection_timeout(std::chrono::seconds{30});
  client.set_read_timeout(config.timeout);
  client.set_write_timeout(config.timeout);
  client.set_bearer_token_auth(key);

  for (int attempt = 0;; ++attempt) {
    auto res = client.Post(target.path, payload, "application/json");
    if (!res) {
      throw TransportError(TransportError::Kind::Network,
                           fmt::format("{}: {}", target.origin, httplib::to_string(res.error())));
    }
    const int status = res->status;
    if (status == 401 || status == 403) {
      throw TransportError(TransportError::Kind::Auth, fmt::format("endpoint refused credentials (HTTP {})", status));
    }
    if (status == 429 || status >= 500) {
      const auto kind = status == 429 ? TransportError::Kind::RateLimited : TransportError::Kind::Server;
      if (attempt >= config.max_retries) {
        throw TransportError(kind, fmt::format("HTTP {} after {} attempts", status, attempt + 1));
      }
      std::this_thread::sleep_for(retry_delay(res, attempt, config.max_backoff));
      continue;
    }
    if (status != 200) {
      throw TransportError(TransportError::Kind::Protocol, fmt::format("unexpected HTTP {}: {}", status, res->body));
    }

    Submission out;
    nlohmann::ordered_json meta;
    try {
      const auto j = nlohmann::json::parse(res->body);
      const auto& choice = j.at("choices").at(0);
      out.transcript.id = instance.id;
      out.transcript.text = choice.at("message").at("content").get<std::string>();
      const std::string finish = choice.value("finish_reason", std::string{});
      out.transcript.token_limit = finish == "length";
      meta["source"] = "endpoint";
      meta["endpoint"] = target.origin + target.path;
      meta["model"] = config.model;
      meta["temperature"] = config.temperature;
      meta["max_tokens"] = config.max_tokens ? nlohmann::ordered_json(*config.max_tokens) : nullptr;
      meta["finish_reason"] = finish;
      meta["token_limit"] = out.transcript.token_limit;
      meta["usage"] = j.contains("usage") ? nlohmann::ordered_json(j["usage"]) : nullptr;
      meta["attempts"] = attempt + 1;
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(TransportError::Kind::Protocol, fmt::format("malformed completion response: {}", e.what()));
    }
    out.meta_json = meta.dump(2) + "\n";
    return out;
  }
}

}  // namespace openxor::llm
