#pragma once

// HTTP backends speaking the chat-completion JSON protocol.
//
// Chat request   POST {endpoint}{path}
//   {"model": str, "messages": [{"role": "system|user|assistant", "content": str}],
//    "temperature": num, "top_p"?: num, "max_tokens"?: int, "seed"?: int}
// Chat response  200 {"choices": [{"message": {"role": "assistant", "content": str}}]}
//
// Embedding request   POST {endpoint}{path}   {"model": str, "input": [str]}
// Embedding response  200 {"data": [{"index": int, "embedding": [num]}]}
//
// When credential_env is set, "Authorization: Bearer <value of that variable>"
// is sent; a missing variable fails at construction.

#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include <httplib.h>

#include "turnkit/client.hpp"
#include "turnkit/inertia.hpp"

namespace turnkit::client {

namespace detail {

inline std::string resolve_credential(const std::string& env_name) {
    if (env_name.empty()) return {};
    const char* value = std::getenv(env_name.c_str());
    if (!value || !*value) throw ConfigError("credential variable " + env_name + " is not set");
    return value;
}

class HttpTransport {
public:
    explicit HttpTransport(const ModelClientSpec& spec)
        : spec_(spec), token_(resolve_credential(spec.credential_env)) {
        if (spec_.endpoint.empty()) throw ConfigError("client endpoint is empty");
    }

    json post(const json& body) const {
        httplib::Client http(spec_.endpoint);
        const auto ms = std::chrono::milliseconds(spec_.timeout_ms);
        http.set_connection_timeout(ms);
        http.set_read_timeout(ms);
        http.set_write_timeout(ms);
        httplib::Headers headers;
        if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
        auto res = http.Post(spec_.path, headers, body.dump(), "application/json");
        if (!res) throw ClientError("request to " + spec_.endpoint + spec_.path + " failed: " + httplib::to_string(res.error()));
        if (res->status < 200 || res->status >= 300)
            throw ClientError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300));
        try {
            return json::parse(res->body);
        } catch (const json::parse_error&) {
            throw ClientError("response is not JSON: " + res->body.substr(0, 300));
        }
    }

    const ModelClientSpec& spec() const { return spec_; }

private:
    ModelClientSpec spec_;
    std::string token_;
};

}  // namespace detail

class HttpChatClient : public ChatClient {
public:
    explicit HttpChatClient(const ModelClientSpec& spec) : transport_(spec) {}

    static json request_body(const ModelClientSpec& spec, const Messages& messages) {
        json body;
        body["model"] = spec.model;
        json msgs = json::array();
        for (const auto& m : messages) msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
        body["messages"] = std::move(msgs);
        body["temperature"] = spec.temperature;
        if (spec.top_p) body["top_p"] = *spec.top_p;
        if (spec.max_tokens) body["max_tokens"] = *spec.max_tokens;
        if (spec.seed) body["seed"] = *spec.seed;
        return body;
    }

    std::string complete(const Messages& messages) override {
        const json res = transport_.post(request_body(transport_.spec(), messages));
        try {
            const auto& content = res.at("choices").at(0).at("message").at("content");
            if (!content.is_string()) throw ClientError("message content is not a string");
            return content.get<std::string>();
        } catch (const json::exception& e) {
            throw ClientError(std::string("malformed chat response: ") + e.what());
        }
    }

private:
    detail::HttpTransport transport_;
};

class HttpEmbeddingProvider : public inertia::EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(ModelClientSpec spec) : transport_([&] {
        if (spec.path == "/v1/chat/completions") spec.path = "/v1/embeddings";
        return spec;
    }()) {}

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override {
        json body;
        body["model"] = transport_.spec().model;
        body["input"] = texts;
        json res;
        try {
            res = transport_.post(body);
        } catch (const ClientError& e) {
            throw inertia::EmbeddingError(e.what());
        }
        try {
            std::vector<std::vector<double>> out(texts.size());
            const auto& data = res.at("data");
            if (data.size() != texts.size()) throw inertia::EmbeddingError("embedding count mismatch");
            for (size_t i = 0; i < data.size(); ++i) {
                const size_t idx = data[i].contains("index") ? data[i]["index"].get<size_t>() : i;
                if (idx >= out.size()) throw inertia::EmbeddingError("embedding index out of range");
                out[idx] = data[i].at("embedding").get<std::vector<double>>();
            }
            return out;
        } catch (const json::exception& e) {
            throw inertia::EmbeddingError(std::string("malformed embedding response: ") + e.what());
        }
    }

private:
    detail::HttpTransport transport_;
};

/// Builds a client from its spec. HTTP clients resolve their credential here,
/// so a missing variable surfaces before any dialogue starts.
inline std::unique_ptr<ChatClient> make_client(const ModelClientSpec& spec) {
    spec.validate();
    if (spec.kind == "mock") return std::make_unique<MockClient>(spec.script);
    return std::make_unique<HttpChatClient>(spec);
}

}  // namespace turnkit::client
