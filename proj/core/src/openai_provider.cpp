#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <fstream>

#include "loopinv/llm_client.hpp"

namespace loopinv {

OpenAIConfig load_openai_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read provider config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
  OpenAIConfig cfg;
  cfg.base_url = j.value("base_url", cfg.base_url);
  cfg.path = j.value("path", cfg.path);
  cfg.model = j.value("model", cfg.model);
  cfg.api_key_env = j.value("api_key_env", cfg.api_key_env);
  cfg.timeout = std::chrono::seconds(j.value("timeout_s", static_cast<long>(cfg.timeout.count())));
  return cfg;
}

OpenAIChatProvider::OpenAIChatProvider(OpenAIConfig config) : config_(std::move(config)) {}

nlohmann::json OpenAIChatProvider::request_body(const ChatRequest& request) const {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.prompt.messages())
    messages.push_back({{"role", to_string(m.role)}, {"content", m.text}});
  return {{"model", config_.model},
          {"messages", std::move(messages)},
          {"temperature", request.temperature},
          {"n", request.num_samples},
          {"max_tokens", request.max_output_tokens}};
}

std::vector<std::string> OpenAIChatProvider::parse_response(int status, const std::string& body,
                                                            std::size_t expected) {
  using K = ProviderError::Kind;
  if (status == 401 || status == 403) throw ProviderError(K::AuthFailure, "HTTP " + std::to_string(status));
  if (status == 429 || status >= 500)
    throw ProviderError(K::Transient, "HTTP " + std::to_string(status));
  if (status == 400 && (body.find("context_length") != std::string::npos ||
                        body.find("maximum context length") != std::string::npos))
    throw ProviderError(K::TokenLimitExceeded, "provider rejected the prompt as too long");
  if (status != 200) throw ProviderError(K::ProviderUnavailable, "HTTP " + std::to_string(status) + ": " + body);

  std::vector<std::string> out;
  try {
    auto j = nlohmann::json::parse(body);
    for (const auto& choice : j.at("choices")) {
      const auto& content = choice.at("message").at("content");
      out.push_back(content.is_string() ? content.get<std::string>() : std::string());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(K::MalformedResponse, e.what());
  }
  if (out.size() != expected)
    throw ProviderError(K::MalformedResponse, "expected " + std::to_string(expected) +
                                                  " choices, got " + std::to_string(out.size()));
  return out;
}

std::vector<std::string> OpenAIChatProvider::complete(const ChatRequest& request) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0')
    throw ProviderError(ProviderError::Kind::AuthFailure, config_.api_key_env + " is not set");

  httplib::Client client(config_.base_url);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_bearer_token_auth(key);
  auto res = client.Post(config_.path, request_body(request).dump(), "application/json");
  if (!res)
    throw ProviderError(ProviderError::Kind::ProviderUnavailable,
                        "request failed: " + httplib::to_string(res.error()));
  return parse_response(res->status, res->body, request.num_samples);
}

}  // namespace loopinv
