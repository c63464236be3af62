#include <httplib.h>

#include <json.hpp>

#include "rumorlab/errors.hpp"
#include "rumorlab/generator.hpp"

namespace rumorlab {

HttpGenerator::HttpGenerator(HttpGeneratorConfig config) : config_(std::move(config)) {
  if (config_.port <= 0) throw ArgumentError("generator port must be positive");
  if (!(config_.timeout_seconds > 0.0)) throw ArgumentError("generator timeout must be positive");
}

std::string HttpGenerator::request_body(const GeneratorRequest& request) {
  nlohmann::json body{{"system_prompt", request.system_prompt}, {"user_text", request.user_text()}};
  body["feedback_similarity"] =
      request.feedback_similarity ? nlohmann::json(*request.feedback_similarity) : nlohmann::json(nullptr);
  return body.dump();
}

GeneratorResponse HttpGenerator::generate(const GeneratorRequest& request) const {
  const std::string body = request_body(request);
  const auto secs = static_cast<time_t>(config_.timeout_seconds);
  const auto usecs = static_cast<time_t>((config_.timeout_seconds - static_cast<double>(secs)) * 1e6);
  std::string last_error = "no attempt made";
  for (std::size_t attempt = 0; attempt <= config_.retries; ++attempt) {
    httplib::Client client(config_.host, config_.port);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    auto res = client.Post(config_.path, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP status " + std::to_string(res->status);
      continue;
    }
    try {
      const auto reply = nlohmann::json::parse(res->body);
      return {reply.at("message").get<std::string>()};
    } catch (const nlohmann::json::exception& e) {
      // A malformed reply is a protocol error; retrying the same request will not fix it.
      throw AttackError(std::string("generator reply is not {\"message\": str}: ") + e.what() +
                        "; request: " + body);
    }
  }
  throw AttackError("generator request failed after " + std::to_string(config_.retries + 1) +
                    " attempt(s): " + last_error + "; request: " + body);
}

}  // namespace rumorlab
