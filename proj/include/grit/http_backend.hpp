#pragma once

// Requires cpp-httplib; link OpenSSL and define CPPHTTPLIB_OPENSSL_SUPPORT
// for https endpoints (the grit::http CMake target does both).

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "grit/error.hpp"
#include "grit/io.hpp"
#include "grit/querygen.hpp"

namespace grit {

struct HttpBackendConfig {
    /// Full chat-completions URL, e.g. https://api.openai.com/v1/chat/completions
    std::string endpoint;
    std::string model;
    /// Name of the environment variable holding the bearer token.
    std::string api_key_env = "OPENAI_API_KEY";
    double timeout_seconds = 60.0;
    std::size_t max_in_flight = 4;
    std::size_t max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    double temperature = 0.0;

    static HttpBackendConfig from_json(nlohmann::json const& j)
    {
        HttpBackendConfig c;
        c.endpoint = j.value("endpoint", c.endpoint);
        c.model = j.value("model", c.model);
        c.api_key_env = j.value("api_key_env", c.api_key_env);
        c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
        c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
        c.max_attempts = j.value("max_attempts", c.max_attempts);
        c.initial_backoff = std::chrono::milliseconds(j.value("initial_backoff_ms", c.initial_backoff.count()));
        c.temperature = j.value("temperature", c.temperature);
        return c;
    }

    static HttpBackendConfig load(std::filesystem::path const& path)
    {
        auto in = detail::open_input(path);
        try {
            return from_json(nlohmann::json::parse(in));
        } catch (nlohmann::json::exception const& e) {
            throw ConfigError(path.string() + ": " + e.what());
        }
    }

    void validate() const
    {
        if (endpoint.empty() || model.empty()) {
            throw ConfigError("backend config needs both endpoint and model");
        }
        if (max_in_flight == 0 || max_attempts == 0) {
            throw ConfigError("max_in_flight and max_attempts must be positive");
        }
        if (!(timeout_seconds > 0.0)) {
            throw ConfigError("timeout_seconds must be positive");
        }
    }
};

namespace detail {

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

inline ParsedUrl parse_url(std::string const& url)
{
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("endpoint must start with http:// or https://");
    }
    auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw ConfigError("unsupported endpoint scheme '" + scheme + "'");
    }
    auto slash = url.find('/', scheme_end + 3);
    if (slash == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, slash), url.substr(slash)};
}

class InFlightLimiter {
  public:
    explicit InFlightLimiter(std::size_t limit) : m_available(limit) {}

    void acquire()
    {
        std::unique_lock lock(m_mutex);
        m_cv.wait(lock, [&] { return m_available > 0; });
        --m_available;
    }

    void release()
    {
        {
            std::lock_guard lock(m_mutex);
            ++m_available;
        }
        m_cv.notify_one();
    }

  private:
    std::mutex m_mutex;
    std::condition_variable m_cv;
    std::size_t m_available;
};

}  // namespace detail

/// Chat-completion client for any OpenAI-compatible endpoint. Retries
/// transport failures, 429 and 5xx responses with exponential backoff.
/// Thread-safe; concurrent calls beyond `max_in_flight` wait.
class HttpChatBackend : public TextGenBackend {
  public:
    /// Throws ConfigError when the config is incomplete or the API key
    /// variable is unset; no request is made in that case.
    explicit HttpChatBackend(HttpBackendConfig config)
        : m_config(std::move(config)), m_limiter(m_config.max_in_flight == 0 ? 1 : m_config.max_in_flight)
    {
        m_config.validate();
        m_url = detail::parse_url(m_config.endpoint);
        auto const* key = std::getenv(m_config.api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            throw ConfigError("environment variable " + m_config.api_key_env + " is not set");
        }
        m_api_key = key;
    }

    std::string complete(std::string const& prompt) override
    {
        nlohmann::json body = {
            {"model", m_config.model},
            {"temperature", m_config.temperature},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
        };
        auto payload = body.dump();

        m_limiter.acquire();
        struct Release {
            detail::InFlightLimiter& l;
            ~Release() { l.release(); }
        } release{m_limiter};

        auto backoff = m_config.initial_backoff;
        std::string last_error;
        for (std::size_t attempt = 1; attempt <= m_config.max_attempts; ++attempt) {
            if (attempt > 1) {
                std::this_thread::sleep_for(backoff);
                backoff *= 2;
            }
            httplib::Client client(m_url.origin);
            auto timeout = std::chrono::duration<double>(m_config.timeout_seconds);
            client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
            client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
            client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
            httplib::Headers headers{{"Authorization", "Bearer " + m_api_key}};

            auto res = client.Post(m_url.path, headers, payload, "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 429 || res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200) {
                throw BackendError("HTTP " + std::to_string(res->status) + ": " + res->body);
            }
            return extract_content(res->body);
        }
        throw BackendError(
            "giving up after " + std::to_string(m_config.max_attempts) + " attempts (" + last_error + ")");
    }

    [[nodiscard]] HttpBackendConfig const& config() const noexcept { return m_config; }

    /// choices[0].message.content of a chat-completion response.
    static std::string extract_content(std::string const& body)
    {
        try {
            auto j = nlohmann::json::parse(body);
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (nlohmann::json::exception const& e) {
            throw BackendError(std::string("malformed chat-completion response: ") + e.what());
        }
    }

  private:
    HttpBackendConfig m_config;
    detail::ParsedUrl m_url;
    std::string m_api_key;
    detail::InFlightLimiter m_limiter;
};

}  // namespace grit
