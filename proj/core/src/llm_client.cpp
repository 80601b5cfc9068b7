#include "loopinv/llm_client.hpp"

#include <algorithm>
#include <ctime>
#include <iomanip>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

namespace loopinv {

namespace {

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 failed");
  std::ostringstream out;
  out << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) out << std::setw(2) << static_cast<int>(digest[i]);
  return out.str();
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

}  // namespace

void validate(const ChatRequest& request) {
  if (request.num_samples < 1) throw Error("num_samples must be at least 1");
  if (!(request.temperature >= 0.0)) throw Error("temperature must be non-negative");
}

nlohmann::json canonical_request(const ChatRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.prompt.messages())
    messages.push_back({{"role", to_string(m.role)}, {"text", m.text}});
  // nlohmann::json objects keep keys sorted, so dump() is canonical.
  return {{"messages", std::move(messages)},
          {"model_id", request.model_id},
          {"num_samples", request.num_samples},
          {"temperature", request.temperature}};
}

std::string request_digest(const ChatRequest& request) {
  return sha256_hex(canonical_request(request).dump());
}

std::string_view to_string(ProviderError::Kind kind) {
  switch (kind) {
    case ProviderError::Kind::TokenLimitExceeded:
      return "token_limit_exceeded";
    case ProviderError::Kind::ProviderUnavailable:
      return "provider_unavailable";
    case ProviderError::Kind::AuthFailure:
      return "auth_failure";
    case ProviderError::Kind::ReplayMiss:
      return "replay_miss";
    case ProviderError::Kind::Transient:
      return "transient";
    case ProviderError::Kind::CorruptRecord:
      return "corrupt_record";
    case ProviderError::Kind::MalformedResponse:
      return "malformed_response";
  }
  return "?";
}

std::optional<ProviderError::Kind> parse_provider_error_kind(std::string_view name) {
  using K = ProviderError::Kind;
  for (K k : {K::TokenLimitExceeded, K::ProviderUnavailable, K::AuthFailure, K::ReplayMiss,
              K::Transient, K::CorruptRecord, K::MalformedResponse})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

nlohmann::json to_json(const CompletionRecord& record) {
  nlohmann::json j = {{"digest", record.digest},
                      {"responses", record.responses},
                      {"metadata", record.metadata},
                      {"timestamp", record.timestamp}};
  if (record.error) {
    j["error"] = to_string(*record.error);
    j["error_message"] = record.error_message;
  }
  return j;
}

CompletionRecord completion_record_from_json(const nlohmann::json& j) {
  try {
    CompletionRecord r;
    r.digest = j.at("digest").get<std::string>();
    r.responses = j.at("responses").get<std::vector<std::string>>();
    r.metadata = j.value("metadata", nlohmann::json::object());
    r.timestamp = j.value("timestamp", "");
    if (j.contains("error")) {
      r.error = parse_provider_error_kind(j.at("error").get<std::string>());
      if (!r.error) throw ProviderError(ProviderError::Kind::CorruptRecord, "unknown error kind");
      r.error_message = j.value("error_message", "");
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(ProviderError::Kind::CorruptRecord, e.what());
  }
}

ReplayProvider::ReplayProvider(std::vector<CompletionRecord> records) {
  for (auto& r : records) records_.emplace(r.digest, std::move(r));
}

ReplayProvider ReplayProvider::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ProviderError(ProviderError::Kind::CorruptRecord, "cannot read " + path.string());
  std::vector<CompletionRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(completion_record_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw ProviderError(ProviderError::Kind::CorruptRecord,
                          path.string() + ":" + std::to_string(line_no) + ": corrupt record: " +
                              e.what());
    }
  }
  return ReplayProvider(std::move(records));
}

std::vector<std::string> ReplayProvider::complete(const ChatRequest& request) {
  const std::string digest = request_digest(request);
  auto it = records_.find(digest);
  if (it == records_.end())
    throw ProviderError(ProviderError::Kind::ReplayMiss,
                        "no recorded completion for request " + digest +
                            (request.tag.empty() ? "" : " (" + request.tag + ")"));
  const CompletionRecord& r = it->second;
  if (r.error) throw ProviderError(*r.error, r.error_message);
  if (r.responses.size() != request.num_samples)
    throw ProviderError(ProviderError::Kind::CorruptRecord,
                        "record " + digest + " holds " + std::to_string(r.responses.size()) +
                            " responses, request wants " + std::to_string(request.num_samples));
  return r.responses;
}

RecordingProvider::RecordingProvider(Provider& inner, const std::filesystem::path& path)
    : inner_(inner), out_(path, std::ios::app) {
  if (!out_) throw Error("cannot open session file " + path.string());
}

void RecordingProvider::append(const CompletionRecord& record) {
  std::lock_guard lock(mutex_);
  out_ << to_json(record).dump() << '\n';
  out_.flush();
}

std::vector<std::string> RecordingProvider::complete(const ChatRequest& request) {
  CompletionRecord record;
  record.digest = request_digest(request);
  record.timestamp = utc_timestamp();
  record.metadata = {{"provider", inner_.name()}};
  if (!request.tag.empty()) record.metadata["tag"] = request.tag;
  try {
    record.responses = inner_.complete(request);
  } catch (const ProviderError& e) {
    if (e.kind() != ProviderError::Kind::Transient) {
      record.error = e.kind();
      record.error_message = e.what();
      append(record);
    }
    throw;
  }
  append(record);
  return record.responses;
}

ScriptedProvider::ScriptedProvider(nlohmann::json script) : script_(std::move(script)) {
  if (!script_.is_object()) throw Error("script must be a JSON object keyed by tag");
}

ScriptedProvider ScriptedProvider::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read script " + path.string());
  try {
    return ScriptedProvider(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::vector<std::string> ScriptedProvider::complete(const ChatRequest& request) {
  auto it = script_.find(request.tag);
  if (it == script_.end())
    throw ProviderError(ProviderError::Kind::ReplayMiss, "script has no entry for " + request.tag);
  if (it->is_object() && it->contains("error")) {
    auto kind = parse_provider_error_kind(it->at("error").get<std::string>());
    throw ProviderError(kind.value_or(ProviderError::Kind::ProviderUnavailable),
                        "scripted failure for " + request.tag);
  }
  auto responses = it->get<std::vector<std::string>>();
  if (responses.size() < request.num_samples)
    throw ProviderError(ProviderError::Kind::MalformedResponse,
                        "script for " + request.tag + " has " + std::to_string(responses.size()) +
                            " responses, request wants " + std::to_string(request.num_samples));
  responses.resize(request.num_samples);
  return responses;
}

LlmClient::LlmClient(Provider& provider, ClientOptions options)
    : provider_(provider), options_(std::move(options)) {
  if (!options_.sleep)
    options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

void LlmClient::wait_for_slot() {
  if (options_.requests_per_minute <= 0.0) return;
  const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(60.0 / options_.requests_per_minute));
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(rate_mutex_);
    auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_slot_);
    next_slot_ = slot + interval;
  }
  auto wait = slot - std::chrono::steady_clock::now();
  if (wait > std::chrono::steady_clock::duration::zero())
    options_.sleep(std::chrono::ceil<std::chrono::milliseconds>(wait));
}

std::vector<std::string> LlmClient::complete(const ChatRequest& request) {
  validate(request);
  check_token_limit(request.prompt, options_.token_limit);

  auto backoff = options_.initial_backoff;
  for (std::size_t attempt = 0;; ++attempt) {
    wait_for_slot();
    try {
      auto responses = provider_.complete(request);
      if (responses.size() != request.num_samples)
        throw ProviderError(ProviderError::Kind::MalformedResponse,
                            "provider returned " + std::to_string(responses.size()) + " of " +
                                std::to_string(request.num_samples) + " samples");
      return responses;
    } catch (const ProviderError& e) {
      if (e.kind() != ProviderError::Kind::Transient || attempt >= options_.max_retries) throw;
    }
    options_.sleep(backoff);
    backoff = std::min(backoff * 2, options_.max_backoff);
  }
}

}  // namespace loopinv
