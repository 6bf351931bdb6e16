#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <thread>

#include <json.hpp>

#include "tnss/llm.hpp"

namespace tnss {
namespace {

// "https://host:port/path" -> (origin "https://host:port", path "/path").
std::pair<std::string, std::string> split_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("endpoint URL must include a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpChatClient::HttpChatClient(LLMClientConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw ConfigError("endpoint URL must not be empty");
    if (config_.temperature < 0.0) throw ConfigError("temperature must be non-negative");
    if (config_.timeout_s <= 0) throw ConfigError("timeout must be positive");
    if (config_.retries < 0) throw ConfigError("retry count must be non-negative");
    split_endpoint(config_.endpoint);
}

std::string HttpChatClient::do_complete(const std::vector<ChatMessage>& transcript) {
    nlohmann::json body;
    body["model"] = config_.model;
    body["temperature"] = config_.temperature;
    auto& messages = body["messages"] = nlohmann::json::array();
    for (const auto& m : transcript)
        messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    const std::string payload = body.dump();

    const auto [origin, path] = split_endpoint(config_.endpoint);
    httplib::Client cli(origin);
    cli.set_connection_timeout(config_.timeout_s, 0);
    cli.set_read_timeout(config_.timeout_s, 0);
    cli.set_write_timeout(config_.timeout_s, 0);

    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key)
        headers.emplace("Authorization", std::string("Bearer ") + key);

    httplib::Result res;
    for (int attempt = 0;; ++attempt) {
        res = cli.Post(path, headers, payload, "application/json");
        if (res) break;  // transport succeeded; HTTP status handled below
        if (attempt >= config_.retries)
            throw HttpError("transport failure talking to " + config_.endpoint + ": " +
                            httplib::to_string(res.error()));
        const auto delay = config_.retry_base_ms * (1 << attempt);
        std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }

    if (res->status == 401 || res->status == 403)
        throw AuthError("authentication rejected (HTTP " + std::to_string(res->status) +
                            "); check the API key in $" + config_.api_key_env,
                        res->status);
    if (res->status < 200 || res->status >= 300)
        throw HttpError("chat endpoint returned HTTP " + std::to_string(res->status),
                        res->status);

    try {
        const auto reply = nlohmann::json::parse(res->body);
        const auto& content = reply.at("choices").at(0).at("message").at("content");
        if (!content.is_string()) throw HttpError("response content is not a string");
        return content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw HttpError(std::string("malformed chat response body: ") + e.what());
    }
}

}  // namespace tnss
