#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include "grit/http_backend.hpp"

using namespace grit;

namespace {

/// Local chat-completion stub; fails the first `failures` requests with 500.
class StubServer {
  public:
    explicit StubServer(int failures, int status = 500) : m_failures(failures), m_status(status)
    {
        m_server.Post("/v1/chat/completions", [this](httplib::Request const& req, httplib::Response& res) {
            ++m_hits;
            m_last_auth = req.get_header_value("Authorization");
            m_last_body = req.body;
            if (m_hits <= m_failures) {
                res.status = m_status;
                res.set_content("{\"error\": \"try later\"}", "application/json");
                return;
            }
            auto body = nlohmann::json::parse(req.body);
            auto prompt = body.at("messages").at(0).at("content").get<std::string>();
            nlohmann::json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "echo: " + prompt}}}}}}};
            res.set_content(reply.dump(), "application/json");
        });
        m_port = m_server.bind_to_any_port("127.0.0.1");
        m_thread = std::thread([this] { m_server.listen_after_bind(); });
        m_server.wait_until_ready();
    }
    ~StubServer()
    {
        m_server.stop();
        m_thread.join();
    }

    [[nodiscard]] std::string endpoint() const
    {
        return "http://127.0.0.1:" + std::to_string(m_port) + "/v1/chat/completions";
    }
    [[nodiscard]] int hits() const { return m_hits; }
    [[nodiscard]] std::string const& last_auth() const { return m_last_auth; }
    [[nodiscard]] std::string const& last_body() const { return m_last_body; }

  private:
    httplib::Server m_server;
    std::thread m_thread;
    int m_port = 0;
    int m_failures;
    int m_status;
    std::atomic<int> m_hits{0};
    std::string m_last_auth;
    std::string m_last_body;
};

HttpBackendConfig config_for(StubServer const& server)
{
    HttpBackendConfig c;
    c.endpoint = server.endpoint();
    c.model = "test-model";
    c.api_key_env = "GRIT_TEST_HTTP_KEY";
    c.timeout_seconds = 5;
    c.max_attempts = 3;
    c.initial_backoff = std::chrono::milliseconds(1);
    return c;
}

}  // namespace

TEST(HttpBackend, MissingKeyIsConfigErrorBeforeAnyRequest)
{
    StubServer server(0);
    auto c = config_for(server);
    c.api_key_env = "GRIT_TEST_HTTP_KEY_UNSET";
    ::unsetenv("GRIT_TEST_HTTP_KEY_UNSET");
    EXPECT_THROW(HttpChatBackend{c}, ConfigError);
    EXPECT_EQ(server.hits(), 0);
}

TEST(HttpBackend, PostsChatCompletion)
{
    ::setenv("GRIT_TEST_HTTP_KEY", "secret", 1);
    StubServer server(0);
    HttpChatBackend backend(config_for(server));
    EXPECT_EQ(backend.complete("hello"), "echo: hello");
    EXPECT_EQ(server.last_auth(), "Bearer secret");
    auto body = nlohmann::json::parse(server.last_body());
    EXPECT_EQ(body.at("model"), "test-model");
    EXPECT_EQ(body.at("messages").at(0).at("role"), "user");
}

TEST(HttpBackend, RetriesServerErrors)
{
    ::setenv("GRIT_TEST_HTTP_KEY", "secret", 1);
    StubServer server(2);
    HttpChatBackend backend(config_for(server));
    EXPECT_EQ(backend.complete("x"), "echo: x");
    EXPECT_EQ(server.hits(), 3);
}

TEST(HttpBackend, RetriesRateLimitThenGivesUp)
{
    ::setenv("GRIT_TEST_HTTP_KEY", "secret", 1);
    StubServer server(10, 429);
    HttpChatBackend backend(config_for(server));
    EXPECT_THROW(backend.complete("x"), BackendError);
    EXPECT_EQ(server.hits(), 3);
}

TEST(HttpBackend, ClientErrorIsNotRetried)
{
    ::setenv("GRIT_TEST_HTTP_KEY", "secret", 1);
    StubServer server(10, 400);
    HttpChatBackend backend(config_for(server));
    EXPECT_THROW(backend.complete("x"), BackendError);
    EXPECT_EQ(server.hits(), 1);
}

TEST(HttpBackend, DrivesTheGenerationLoop)
{
    ::setenv("GRIT_TEST_HTTP_KEY", "secret", 1);
    StubServer server(0);
    HttpChatBackend backend(config_for(server));
    // The echo never starts with yes/no, so every verdict is unparsable.
    auto r = generate_task_query({QueryId("q"), "red shoe", "us"}, backend, 2);
    EXPECT_FALSE(r.validated);
    EXPECT_EQ(r.attempts, 2u);
    EXPECT_EQ(server.hits(), 4);
}

TEST(HttpBackend, ConfigValidationAndParsing)
{
    auto c = HttpBackendConfig::from_json(nlohmann::json{{"endpoint", "https://example.invalid/v1/chat/completions"},
                                                          {"model", "m"},
                                                          {"max_in_flight", 2},
                                                          {"initial_backoff_ms", 10}});
    EXPECT_EQ(c.max_in_flight, 2u);
    EXPECT_EQ(c.initial_backoff.count(), 10);
    EXPECT_NO_THROW(c.validate());
    EXPECT_THROW(HttpBackendConfig{}.validate(), ConfigError);
    EXPECT_THROW(detail::parse_url("ftp://x"), ConfigError);
    auto url = detail::parse_url("https://api.example.com:8443/v1/chat/completions");
    EXPECT_EQ(url.origin, "https://api.example.com:8443");
    EXPECT_EQ(url.path, "/v1/chat/completions");
}

TEST(HttpBackend, MalformedResponseIsBackendError)
{
    EXPECT_THROW(HttpChatBackend::extract_content("{}"), BackendError);
    EXPECT_EQ(HttpChatBackend::extract_content(R"({"choices":[{"message":{"content":"hi"}}]})"), "hi");
}
