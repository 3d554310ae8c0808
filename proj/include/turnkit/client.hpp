#pragma once

// Chat-model client abstraction shared by the simulator and the judge.

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "turnkit/errors.hpp"
#include "turnkit/jsonl.hpp"

namespace turnkit::client {

enum class Role { system, user, assistant };

inline const char* to_string(Role r) {
    switch (r) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

inline Role role_from_string(const std::string& s) {
    if (s == "system") return Role::system;
    if (s == "user") return Role::user;
    if (s == "assistant") return Role::assistant;
    throw SchemaError(0, "role", "unknown role '" + s + "'");
}

struct ChatMessage {
    Role role = Role::user;
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

using Messages = std::vector<ChatMessage>;

inline ordered_json to_json(const Messages& messages) {
    auto arr = ordered_json::array();
    for (const auto& m : messages) {
        ordered_json j;
        j["role"] = to_string(m.role);
        j["content"] = m.content;
        arr.push_back(std::move(j));
    }
    return arr;
}

inline Messages messages_from_json(const json& arr) {
    Messages out;
    for (const auto& j : arr) out.push_back({role_from_string(j.at("role").get<std::string>()), j.at("content").get<std::string>()});
    return out;
}

/// One completion call. Implementations throw ClientError on failure and
/// must be safe to call from several threads.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual std::string complete(const Messages& messages) = 0;
};

/// Replays a fixed script. Each entry is either a reply or a failure.
class MockClient : public ChatClient {
public:
    struct Reply {
        std::optional<std::string> content;
        std::string error;

        static Reply ok(std::string text) { return {std::move(text), {}}; }
        static Reply failure(std::string why) { return {std::nullopt, std::move(why)}; }
    };

    explicit MockClient(std::vector<Reply> script) : script_(script.begin(), script.end()) {
        if (script_.empty()) throw InvalidArgument("mock client needs a non-empty script");
    }

    explicit MockClient(const std::vector<std::string>& replies) {
        for (const auto& r : replies) script_.push_back(Reply::ok(r));
        if (script_.empty()) throw InvalidArgument("mock client needs a non-empty script");
    }

    std::string complete(const Messages& messages) override {
        std::lock_guard lock(mutex_);
        requests_.push_back(messages);
        if (script_.empty()) throw ClientError("mock script exhausted");
        Reply r = std::move(script_.front());
        script_.pop_front();
        if (!r.content) throw ClientError(r.error.empty() ? "scripted failure" : r.error);
        return *r.content;
    }

    std::vector<Messages> requests() const {
        std::lock_guard lock(mutex_);
        return requests_;
    }

    size_t calls() const {
        std::lock_guard lock(mutex_);
        return requests_.size();
    }

private:
    mutable std::mutex mutex_;
    std::deque<Reply> script_;
    std::vector<Messages> requests_;
};

/// Delegates to a callable; used for rule-based stand-ins.
class FunctionClient : public ChatClient {
public:
    explicit FunctionClient(std::function<std::string(const Messages&)> fn) : fn_(std::move(fn)) {}
    std::string complete(const Messages& messages) override { return fn_(messages); }

private:
    std::function<std::string(const Messages&)> fn_;
};

struct RetryPolicy {
    int max_attempts = 3;
    int initial_backoff_ms = 500;
    double backoff_multiplier = 2.0;
};

struct ModelClientSpec {
    std::string kind = "http";  ///< "http" or "mock"
    std::string endpoint = "http://localhost:8000";
    std::string path = "/v1/chat/completions";
    std::string model;
    double temperature = 0.0;
    std::optional<double> top_p;
    std::optional<int> max_tokens;
    std::optional<uint64_t> seed;
    int timeout_ms = 60000;
    RetryPolicy retry;
    std::string credential_env;       ///< environment variable holding the API key
    std::vector<std::string> script;  ///< replies for kind == "mock"

    void validate() const {
        if (kind != "http" && kind != "mock") throw ConfigError("client kind must be 'http' or 'mock'");
        if (retry.max_attempts < 1) throw ConfigError("retry.max_attempts must be >= 1");
        if (retry.initial_backoff_ms < 0 || retry.backoff_multiplier < 1.0)
            throw ConfigError("retry backoff must be non-negative with multiplier >= 1");
        if (timeout_ms <= 0) throw ConfigError("timeout_ms must be > 0");
        if (kind == "mock" && script.empty()) throw ConfigError("mock client needs a non-empty script");
    }
};

inline ModelClientSpec client_spec_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("client spec must be an object");
    ModelClientSpec s;
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "kind") s.kind = v.get<std::string>();
            else if (key == "endpoint") s.endpoint = v.get<std::string>();
            else if (key == "path") s.path = v.get<std::string>();
            else if (key == "model") s.model = v.get<std::string>();
            else if (key == "temperature") s.temperature = v.get<double>();
            else if (key == "top_p") s.top_p = v.is_null() ? std::nullopt : std::optional(v.get<double>());
            else if (key == "max_tokens") s.max_tokens = v.is_null() ? std::nullopt : std::optional(v.get<int>());
            else if (key == "seed") s.seed = v.is_null() ? std::nullopt : std::optional(v.get<uint64_t>());
            else if (key == "timeout_ms") s.timeout_ms = v.get<int>();
            else if (key == "credential_env") s.credential_env = v.get<std::string>();
            else if (key == "script") s.script = v.get<std::vector<std::string>>();
            else if (key == "retry") {
                for (const auto& [rk, rv] : v.items()) {
                    if (rk == "max_attempts") s.retry.max_attempts = rv.get<int>();
                    else if (rk == "initial_backoff_ms") s.retry.initial_backoff_ms = rv.get<int>();
                    else if (rk == "backoff_multiplier") s.retry.backoff_multiplier = rv.get<double>();
                    else throw ConfigError("unknown retry field '" + rk + "'");
                }
            } else throw ConfigError("unknown client field '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("client spec: ") + e.what());
    }
    s.validate();
    return s;
}

struct AttemptRecord {
    int attempt = 1;
    bool ok = false;
    std::string error;
    double elapsed_ms = 0;
};

struct CallResult {
    std::optional<std::string> content;
    std::vector<AttemptRecord> attempts;

    bool ok() const { return content.has_value(); }
    std::string last_error() const { return attempts.empty() ? std::string() : attempts.back().error; }
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
using Clock = std::function<double()>;  ///< milliseconds on any fixed origin

inline Sleeper real_sleeper() {
    return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

inline Clock steady_clock_ms() {
    return [] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now().time_since_epoch()).count();
    };
}

/// Calls the client up to policy.max_attempts times with exponential backoff
/// between attempts. Never throws for client failures; every attempt is
/// recorded.
inline CallResult call_with_retry(ChatClient& client, const Messages& messages, const RetryPolicy& policy,
                                  const Sleeper& sleep = real_sleeper(), const Clock& clock = steady_clock_ms()) {
    CallResult result;
    double backoff = policy.initial_backoff_ms;
    for (int attempt = 1; attempt <= std::max(1, policy.max_attempts); ++attempt) {
        AttemptRecord rec;
        rec.attempt = attempt;
        const double start = clock();
        try {
            result.content = client.complete(messages);
            rec.ok = true;
        } catch (const std::exception& e) {
            rec.error = e.what();
        }
        rec.elapsed_ms = clock() - start;
        result.attempts.push_back(std::move(rec));
        if (result.content) break;
        if (attempt < policy.max_attempts && backoff > 0) {
            sleep(std::chrono::milliseconds(static_cast<long>(backoff)));
            backoff *= policy.backoff_multiplier;
        }
    }
    return result;
}

}  // namespace turnkit::client
