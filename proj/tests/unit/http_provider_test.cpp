#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <thread>

#include <gtest/gtest.h>

#include "loopinv/llm_client.hpp"

using namespace loopinv;

// Talks to a local stand-in for the chat endpoint over real HTTP.
TEST(OpenAIHttp, RoundTripAgainstLocalServer) {
  httplib::Server server;
  std::string seen_auth, seen_body;
  int hits = 0;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    if (hits == 1) {
      res.status = 503;
      return;
    }
    auto j = nlohmann::json::parse(req.body);
    nlohmann::json choices = nlohmann::json::array();
    for (int i = 0; i < j["n"].get<int>(); ++i)
      choices.push_back({{"message", {{"content", "answer " + std::to_string(i)}}}});
    res.set_content(nlohmann::json{{"choices", choices}}.dump(), "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ::setenv("LOOPINV_TEST_HTTP_KEY", "secret", 1);
  OpenAIConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
  cfg.api_key_env = "LOOPINV_TEST_HTTP_KEY";
  cfg.timeout = std::chrono::seconds(5);
  OpenAIChatProvider provider(cfg);
  ClientOptions opts;
  opts.sleep = [](std::chrono::milliseconds) {};
  LlmClient client(provider, opts);

  ChatRequest r{Prompt(prompt_kind::Instruction{}, {{MessageRole::User, "find it"}})};
  r.num_samples = 2;
  auto out = client.complete(r);

  server.stop();
  th.join();

  EXPECT_EQ(hits, 2);
  EXPECT_EQ(out, (std::vector<std::string>{"answer 0", "answer 1"}));
  EXPECT_EQ(seen_auth, "Bearer secret");
  EXPECT_NE(seen_body.find("find it"), std::string::npos);
}
