#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "loopinv/prompts.hpp"

namespace loopinv {

struct ChatRequest {
  Prompt prompt;
  double temperature = 0.7;
  std::size_t num_samples = 1;
  std::size_t max_output_tokens = 1024;
  std::string model_id = "default";
  /// Caller-side label such as "p01/generate". Not part of the digest; only
  /// the scripted provider looks at it.
  std::string tag;
};

/// Throws Error unless num_samples >= 1 and temperature >= 0.
void validate(const ChatRequest& request);

/// The digested part of a request: messages, temperature, num_samples and
/// model_id, with sorted keys.
nlohmann::json canonical_request(const ChatRequest& request);

/// Lowercase hex SHA-256 of the canonical request serialization.
std::string request_digest(const ChatRequest& request);

class ProviderError : public Error {
 public:
  enum class Kind {
    TokenLimitExceeded,
    ProviderUnavailable,
    AuthFailure,
    ReplayMiss,
    Transient,
    CorruptRecord,
    MalformedResponse,
  };

  ProviderError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string_view to_string(ProviderError::Kind kind);
std::optional<ProviderError::Kind> parse_provider_error_kind(std::string_view name);

struct CompletionRecord {
  std::string digest;
  std::vector<std::string> responses;
  nlohmann::json metadata = nlohmann::json::object();
  std::string timestamp;
  /// Set instead of responses when the provider failed.
  std::optional<ProviderError::Kind> error;
  std::string error_message;
};

nlohmann::json to_json(const CompletionRecord& record);
/// Throws ProviderError(CorruptRecord) on missing or mistyped fields.
CompletionRecord completion_record_from_json(const nlohmann::json& j);

class Provider {
 public:
  virtual ~Provider() = default;
  /// Returns exactly request.num_samples responses or throws ProviderError.
  virtual std::vector<std::string> complete(const ChatRequest& request) = 0;
  virtual std::string name() const = 0;
};

/// Serves recorded completions by request digest. Unknown digests raise
/// ReplayMiss; recorded failures are raised again with their original kind.
class ReplayProvider : public Provider {
 public:
  explicit ReplayProvider(std::vector<CompletionRecord> records);
  /// Throws ProviderError(CorruptRecord) naming the first bad line.
  static ReplayProvider from_file(const std::filesystem::path& path);

  std::vector<std::string> complete(const ChatRequest& request) override;
  std::string name() const override { return "replay"; }
  std::size_t size() const { return records_.size(); }

 private:
  std::map<std::string, CompletionRecord> records_;
};

/// Forwards to another provider and appends every completion (or
/// non-transient failure) to a JSON Lines session file.
class RecordingProvider : public Provider {
 public:
  RecordingProvider(Provider& inner, const std::filesystem::path& path);

  std::vector<std::string> complete(const ChatRequest& request) override;
  std::string name() const override { return "record:" + inner_.name(); }

 private:
  void append(const CompletionRecord& record);

  Provider& inner_;
  std::mutex mutex_;
  std::ofstream out_;
};

/// Answers from a fixed script keyed by ChatRequest::tag. Each tag maps to a
/// list of responses; a request takes the first num_samples of them. An entry
/// may instead be {"error": KIND} to simulate a provider failure. Used to
/// author replay fixtures deterministically.
class ScriptedProvider : public Provider {
 public:
  explicit ScriptedProvider(nlohmann::json script);
  static ScriptedProvider from_file(const std::filesystem::path& path);

  std::vector<std::string> complete(const ChatRequest& request) override;
  std::string name() const override { return "scripted"; }

 private:
  nlohmann::json script_;
};

/// Settings for an OpenAI-compatible chat completions endpoint.
struct OpenAIConfig {
  std::string base_url = "https://api.openai.com";
  std::string path = "/v1/chat/completions";
  std::string model = "gpt-4";
  /// Name of the environment variable holding the API key.
  std::string api_key_env = "LOOPINV_API_KEY";
  std::chrono::seconds timeout{120};
};

/// Reads {"base_url", "path", "model", "api_key_env", "timeout_s"}; absent
/// keys keep their defaults.
OpenAIConfig load_openai_config(const std::filesystem::path& path);

class OpenAIChatProvider : public Provider {
 public:
  explicit OpenAIChatProvider(OpenAIConfig config);

  std::vector<std::string> complete(const ChatRequest& request) override;
  std::string name() const override { return "openai:" + config_.model; }

  /// Request body for the endpoint; exposed for tests.
  nlohmann::json request_body(const ChatRequest& request) const;
  /// Maps an HTTP status and body to responses or a ProviderError.
  static std::vector<std::string> parse_response(int status, const std::string& body,
                                                 std::size_t expected);

 private:
  OpenAIConfig config_;
};

struct ClientOptions {
  std::size_t token_limit = kDefaultTokenLimit;
  std::size_t max_retries = 4;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{30000};
  /// 0 disables rate limiting.
  double requests_per_minute = 0.0;
  /// Injected for tests; defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;
};

/// Front door for all model calls: validates the request, applies the token
/// gate before anything is sent, rate-limits, and retries transient failures
/// with exponential backoff. Thread-safe if the provider is.
class LlmClient {
 public:
  LlmClient(Provider& provider, ClientOptions options = {});

  /// Throws TokenLimitExceeded (prompt gate) or ProviderError.
  std::vector<std::string> complete(const ChatRequest& request);

  const ClientOptions& options() const { return options_; }
  Provider& provider() { return provider_; }

 private:
  void wait_for_slot();

  Provider& provider_;
  ClientOptions options_;
  std::mutex rate_mutex_;
  std::chrono::steady_clock::time_point next_slot_{};
};

}  // namespace loopinv
