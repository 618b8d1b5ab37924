#pragma once

// Chat-completion transport over HTTP(S). Provider differences are contained
// in a declarative profile, so a new endpoint is configuration, not code.

#include <httplib.h>

#include <nlohmann/json.hpp>
#include <string>

#include "proofpilot/llm/client.hpp"

namespace proofpilot::llm {

struct ProviderProfile {
    std::string name;
    std::string base_url;  // scheme://host[:port]
    std::string path = "/v1/chat/completions";
    std::string auth_header = "Authorization";
    std::string auth_prefix = "Bearer ";
    std::string model_field = "model";
    std::string temperature_field = "temperature";
    std::string messages_field = "messages";
    std::string response_content_path = "choices.0.message.content";
};

inline ProviderProfile profile_for(const LlmConfig& cfg) {
    ProviderProfile p;
    p.name = cfg.provider;
    if (cfg.provider == "openai") {
        p.base_url = "https://api.openai.com";
    } else {
        // openai-compatible endpoint, base URL from configuration
        p.base_url = cfg.base_url;
    }
    if (!cfg.base_url.empty()) p.base_url = cfg.base_url;
    if (p.base_url.empty())
        throw std::runtime_error("provider '" + cfg.provider + "' needs a base_url");
    return p;
}

namespace detail {

// "choices.0.message.content" -> value lookup over parsed JSON
inline const nlohmann::json* walk_path(const nlohmann::json& root, const std::string& path) {
    const nlohmann::json* cur = &root;
    for (const auto& step : support::split(path, '.')) {
        if (cur->is_array()) {
            size_t idx = static_cast<size_t>(std::stoul(step));
            if (idx >= cur->size()) return nullptr;
            cur = &(*cur)[idx];
        } else if (cur->is_object() && cur->contains(step)) {
            cur = &(*cur)[step];
        } else {
            return nullptr;
        }
    }
    return cur;
}

}  // namespace detail

class HttpChatClient final : public ChatClient {
public:
    HttpChatClient(LlmConfig cfg, QueryLog* log, support::Clock* clock)
        : ChatClient(log, clock), cfg_(std::move(cfg)), profile_(profile_for(cfg_)) {
        if (cfg_.api_key.empty()) cfg_.api_key = api_key_for_provider(cfg_.provider);
    }

protected:
    std::string do_complete(const ChatRequest& req) override {
        nlohmann::json body;
        body[profile_.model_field] = cfg_.model;
        body[profile_.temperature_field] = cfg_.temperature;
        nlohmann::json messages = nlohmann::json::array();
        if (!req.system.empty()) messages.push_back({{"role", "system"}, {"content", req.system}});
        messages.push_back({{"role", "user"}, {"content", req.user}});
        body[profile_.messages_field] = std::move(messages);

        httplib::Client client(profile_.base_url);
        client.set_connection_timeout(15, 0);
        client.set_read_timeout(600, 0);
        httplib::Headers headers;
        if (!cfg_.api_key.empty())
            headers.emplace(profile_.auth_header, profile_.auth_prefix + cfg_.api_key);

        auto res = client.Post(profile_.path, headers, body.dump(), "application/json");
        if (!res) throw TransportError("request to " + profile_.base_url +
                                       " failed: " + httplib::to_string(res.error()));
        if (res->status == 429) {
            double after = 1.0;
            if (res->has_header("Retry-After")) {
                try {
                    after = std::stod(res->get_header_value("Retry-After"));
                } catch (...) {
                }
            }
            throw RateLimited(after);
        }
        if (res->status < 200 || res->status >= 300)
            throw TransportError("HTTP " + std::to_string(res->status) + " from " +
                                 profile_.base_url + ": " + res->body.substr(0, 500));

        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(res->body);
        } catch (const std::exception& e) {
            throw TransportError(std::string("malformed response body: ") + e.what());
        }
        const nlohmann::json* content = detail::walk_path(parsed, profile_.response_content_path);
        if (!content || !content->is_string())
            throw TransportError("response body lacks " + profile_.response_content_path);
        return content->get<std::string>();
    }

private:
    LlmConfig cfg_;
    ProviderProfile profile_;
};

inline std::unique_ptr<ChatClient> make_chat_client(const LlmConfig& cfg, QueryLog* log,
                                                    support::Clock* clock) {
    if (cfg.provider == "mock") {
        if (cfg.mock_script.empty())
            throw std::runtime_error("provider 'mock' needs a mock_script path");
        return std::make_unique<ScriptedChatClient>(
            ScriptedChatClient::entries_from_file(cfg.mock_script), log, clock);
    }
    return std::make_unique<HttpChatClient>(cfg, log, clock);
}

}  // namespace proofpilot::llm
