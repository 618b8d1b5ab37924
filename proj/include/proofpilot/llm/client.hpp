#pragma once

#include <cstdlib>
#include <fstream>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "proofpilot/support/clock.hpp"
#include "proofpilot/support/strings.hpp"

namespace proofpilot::llm {

enum class QueryPurpose { Decompose, DlpgProve };

inline const char* purpose_name(QueryPurpose p) {
    return p == QueryPurpose::Decompose ? "decompose" : "dlpg_prove";
}

struct QueryRecord {
    QueryPurpose purpose = QueryPurpose::Decompose;
    std::string prompt;
    std::string response;
    double wall_seconds = 0;
};

// Ordered record of every model query in a run; its length is the #Q metric.
class QueryLog {
public:
    void append(QueryRecord rec) {
        std::lock_guard<std::mutex> lock(mu_);
        records_.push_back(std::move(rec));
    }

    size_t size() const {
        std::lock_guard<std::mutex> lock(mu_);
        return records_.size();
    }

    size_t count(QueryPurpose p) const {
        std::lock_guard<std::mutex> lock(mu_);
        size_t n = 0;
        for (const auto& r : records_) n += (r.purpose == p);
        return n;
    }

    std::vector<QueryRecord> snapshot() const {
        std::lock_guard<std::mutex> lock(mu_);
        return records_;
    }

    nlohmann::json to_json() const {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& r : snapshot()) {
            out.push_back({{"purpose", purpose_name(r.purpose)},
                           {"prompt", r.prompt},
                           {"response", r.response},
                           {"wall_seconds", r.wall_seconds}});
        }
        return out;
    }

private:
    mutable std::mutex mu_;
    std::vector<QueryRecord> records_;
};

struct LlmConfig {
    std::string provider = "mock";
    std::string model;
    double temperature = 0.0;
    int max_retries_decomp = 4;
    int max_retries_dlpg = 4;
    std::string api_key;          // normally resolved from the environment
    std::string base_url;         // openai-compatible endpoints
    std::string mock_script;      // provider "mock": path to the response script
};

// PROOFPILOT_API_KEY_<PROVIDER> (uppercased) carries the secret.
inline std::string api_key_for_provider(const std::string& provider) {
    std::string var = "PROOFPILOT_API_KEY_";
    for (char c : provider) var += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    const char* v = std::getenv(var.c_str());
    return v ? v : "";
}

class TransportError : public std::runtime_error {
public:
    explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

class RateLimited : public TransportError {
public:
    explicit RateLimited(double retry_after_seconds)
        : TransportError("rate limited, retry after " + std::to_string(retry_after_seconds) + "s"),
          retry_after_(retry_after_seconds) {}
    double retry_after_seconds() const { return retry_after_; }

private:
    double retry_after_;
};

struct ChatRequest {
    QueryPurpose purpose = QueryPurpose::Decompose;
    std::string system;  // empty: no system message
    std::string user;
};

// One in-flight request per client instance. Every successful completion
// appends exactly one QueryLog record; no retries happen below this layer.
class ChatClient {
public:
    ChatClient(QueryLog* log, support::Clock* clock)
        : log_(log), clock_(clock ? clock : &support::default_clock()) {}
    virtual ~ChatClient() = default;

    std::string complete(const ChatRequest& req) {
        double t0 = clock_->now_seconds();
        std::string response = do_complete(req);
        double t1 = clock_->now_seconds();
        if (log_) log_->append({req.purpose, logged_prompt(req), response, t1 - t0});
        return response;
    }

protected:
    virtual std::string do_complete(const ChatRequest& req) = 0;

    static std::string logged_prompt(const ChatRequest& req) {
        if (req.system.empty()) return req.user;
        return "[system]\n" + req.system + "\n[user]\n" + req.user;
    }

private:
    QueryLog* log_;
    support::Clock* clock_;
};

// ---------------------------------------------------------------------------
// Scripted client (first-class mock provider)
// ---------------------------------------------------------------------------

// Script entries match by ordinal position (1-based, across the run), by
// FNV-1a fingerprint of the user prompt, or unconditionally ("any"); the
// first matching entry wins.
class ScriptedChatClient final : public ChatClient {
public:
    struct Entry {
        enum class Match { Ordinal, Hash, Any };
        Match match = Match::Any;
        int ordinal = 0;
        std::string hash;
        std::string response;
    };

    ScriptedChatClient(std::vector<Entry> entries, QueryLog* log, support::Clock* clock)
        : ChatClient(log, clock), entries_(std::move(entries)) {}

    static std::vector<Entry> entries_from_json(const nlohmann::json& j) {
        std::vector<Entry> entries;
        for (const auto& e : j) {
            Entry entry;
            const auto& m = e.at("match");
            if (m.is_number_integer()) {
                entry.match = Entry::Match::Ordinal;
                entry.ordinal = m.get<int>();
            } else if (m.is_string() && m.get<std::string>() == "any") {
                entry.match = Entry::Match::Any;
            } else if (m.is_object() && m.contains("ordinal")) {
                entry.match = Entry::Match::Ordinal;
                entry.ordinal = m["ordinal"].get<int>();
            } else if (m.is_object() && m.contains("hash")) {
                entry.match = Entry::Match::Hash;
                entry.hash = m["hash"].get<std::string>();
            } else {
                throw std::runtime_error("mock script entry needs match: ordinal|hash|any");
            }
            entry.response = e.at("response").get<std::string>();
            entries.push_back(std::move(entry));
        }
        return entries;
    }

    static std::vector<Entry> entries_from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open mock LLM script: " + path);
        nlohmann::json j;
        in >> j;
        return entries_from_json(j);
    }

protected:
    std::string do_complete(const ChatRequest& req) override {
        int ordinal = ++calls_;
        std::string fingerprint = support::fnv1a64_hex(req.user);
        for (const auto& e : entries_) {
            switch (e.match) {
                case Entry::Match::Ordinal:
                    if (e.ordinal == ordinal) return e.response;
                    break;
                case Entry::Match::Hash:
                    if (e.hash == fingerprint) return e.response;
                    break;
                case Entry::Match::Any:
                    return e.response;
            }
        }
        throw std::runtime_error("mock LLM script: no scripted response for query #" +
                                 std::to_string(ordinal) + " (fingerprint " + fingerprint + ")");
    }

private:
    std::vector<Entry> entries_;
    int calls_ = 0;
};

}  // namespace proofpilot::llm
