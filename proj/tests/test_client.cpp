#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include "turnkit/http_client.hpp"

using namespace turnkit;
using namespace turnkit::client;

namespace {

// Local chat/embedding server on an ephemeral port.
class FakeServer {
public:
    FakeServer() {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            ++hits;
            last_body = json::parse(req.body);
            last_auth = req.get_header_value("Authorization");
            if (fail_first > 0) {
                --fail_first;
                res.status = 503;
                res.set_content("busy", "text/plain");
                return;
            }
            if (malformed) {
                res.set_content(R"({"choices": []})", "application/json");
                return;
            }
            const auto& msgs = last_body["messages"];
            json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "echo: " + msgs.back()["content"].get<std::string>()}}}}}}};
            res.set_content(reply.dump(), "application/json");
        });
        server_.Post("/v1/embeddings", [this](const httplib::Request& req, httplib::Response& res) {
            last_body = json::parse(req.body);
            json data = json::array();
            const auto& input = last_body["input"];
            // reversed order with explicit indices
            for (size_t i = input.size(); i-- > 0;)
                data.push_back({{"index", i}, {"embedding", {static_cast<double>(input[i].get<std::string>().size()), 1.0}}});
            res.set_content(json{{"data", data}}.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeServer() {
        server_.stop();
        thread_.join();
    }

    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

    std::atomic<int> hits{0};
    std::atomic<int> fail_first{0};
    bool malformed = false;
    json last_body;
    std::string last_auth;

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

ModelClientSpec http_spec(const FakeServer& s) {
    ModelClientSpec spec;
    spec.endpoint = s.endpoint();
    spec.model = "test-model";
    spec.timeout_ms = 5000;
    return spec;
}

const Messages kHello = {{Role::system, "sys"}, {Role::user, "hello"}};

}  // namespace

TEST(Mock, ScriptOfTwoFailsOnThirdCall) {
    MockClient m(std::vector<std::string>{"one", "two"});
    EXPECT_EQ(m.complete(kHello), "one");
    EXPECT_EQ(m.complete(kHello), "two");
    EXPECT_THROW(m.complete(kHello), ClientError);
    EXPECT_EQ(m.calls(), 3u);
    EXPECT_EQ(m.requests()[0], kHello);
}

TEST(Mock, EmptyScriptRejected) {
    EXPECT_THROW(MockClient(std::vector<std::string>{}), InvalidArgument);
    ModelClientSpec spec;
    spec.kind = "mock";
    EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(Retry, FailTwiceThenSucceed) {
    MockClient m({MockClient::Reply::failure("a"), MockClient::Reply::failure("b"), MockClient::Reply::ok("fine")});
    std::vector<long> sleeps;
    auto result = call_with_retry(m, kHello, {3, 500, 2.0}, [&](std::chrono::milliseconds d) { sleeps.push_back(d.count()); });
    ASSERT_TRUE(result.ok());
    EXPECT_EQ(*result.content, "fine");
    ASSERT_EQ(result.attempts.size(), 3u);
    EXPECT_FALSE(result.attempts[0].ok);
    EXPECT_EQ(result.attempts[1].error, "b");
    EXPECT_TRUE(result.attempts[2].ok);
    EXPECT_EQ(sleeps, (std::vector<long>{500, 1000}));
}

TEST(Retry, ExhaustedAttemptsReportLastError) {
    MockClient m({MockClient::Reply::failure("x"), MockClient::Reply::failure("y")});
    int slept = 0;
    auto result = call_with_retry(m, kHello, {2, 10, 2.0}, [&](std::chrono::milliseconds) { ++slept; });
    EXPECT_FALSE(result.ok());
    EXPECT_EQ(result.last_error(), "y");
    EXPECT_EQ(slept, 1);  // no sleep after the final attempt
}

TEST(Spec, FromJson) {
    auto s = client_spec_from_json(json::parse(
        R"({"kind":"mock","script":["a"],"seed":7,"retry":{"max_attempts":5},"temperature":0.3})"));
    EXPECT_EQ(s.kind, "mock");
    EXPECT_EQ(s.seed, 7u);
    EXPECT_EQ(s.retry.max_attempts, 5);
    EXPECT_THROW(client_spec_from_json(json::parse(R"({"api_key":"secret"})")), ConfigError);
    EXPECT_THROW(client_spec_from_json(json::parse(R"({"kind":"carrier-pigeon"})")), ConfigError);
    EXPECT_THROW(client_spec_from_json(json::parse(R"({"retry":{"max_attempts":0}})")), ConfigError);
    EXPECT_THROW(client_spec_from_json(json::parse(R"({"temperature":"hot"})")), ConfigError);
}

TEST(Http, WireFormatAndBearerToken) {
    FakeServer server;
    ::setenv("TURNKIT_TEST_KEY", "sekrit", 1);
    auto spec = http_spec(server);
    spec.credential_env = "TURNKIT_TEST_KEY";
    spec.seed = 42;
    spec.max_tokens = 64;
    HttpChatClient c(spec);
    EXPECT_EQ(c.complete(kHello), "echo: hello");
    EXPECT_EQ(server.last_auth, "Bearer sekrit");
    EXPECT_EQ(server.last_body["model"], "test-model");
    EXPECT_EQ(server.last_body["messages"][0]["role"], "system");
    EXPECT_EQ(server.last_body["messages"][1]["content"], "hello");
    EXPECT_EQ(server.last_body["seed"], 42);
    EXPECT_EQ(server.last_body["max_tokens"], 64);
    EXPECT_FALSE(server.last_body.contains("top_p"));
    ::unsetenv("TURNKIT_TEST_KEY");
}

TEST(Http, NoCredentialMeansNoHeader) {
    FakeServer server;
    HttpChatClient c(http_spec(server));
    c.complete(kHello);
    EXPECT_EQ(server.last_auth, "");
}

TEST(Http, MissingCredentialFailsAtConstruction) {
    ::unsetenv("TURNKIT_SURELY_UNSET");
    auto spec = http_spec(FakeServer{});
    spec.credential_env = "TURNKIT_SURELY_UNSET";
    EXPECT_THROW(make_client(spec), ConfigError);
}

TEST(Http, ServerErrorsAreRetried) {
    FakeServer server;
    server.fail_first = 2;
    HttpChatClient c(http_spec(server));
    auto result = call_with_retry(c, kHello, {3, 1, 1.0}, [](std::chrono::milliseconds) {});
    ASSERT_TRUE(result.ok());
    EXPECT_EQ(result.attempts.size(), 3u);
    EXPECT_NE(result.attempts[0].error.find("503"), std::string::npos) << result.attempts[0].error;
}

TEST(Http, MalformedResponseIsClientError) {
    FakeServer server;
    server.malformed = true;
    HttpChatClient c(http_spec(server));
    EXPECT_THROW(c.complete(kHello), ClientError);
}

TEST(Http, ConnectionRefusedIsClientError) {
    ModelClientSpec spec;
    spec.endpoint = "http://127.0.0.1:1";
    spec.timeout_ms = 500;
    HttpChatClient c(spec);
    EXPECT_THROW(c.complete(kHello), ClientError);
}

TEST(Http, Embeddings) {
    FakeServer server;
    HttpEmbeddingProvider p(http_spec(server));
    auto v = p.embed({"a", "bbb"});
    EXPECT_EQ(server.last_body["input"], json::array({"a", "bbb"}));
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v[0], (std::vector<double>{1.0, 1.0}));
    EXPECT_EQ(v[1], (std::vector<double>{3.0, 1.0}));
}

TEST(Http, ConcurrentCalls) {
    FakeServer server;
    HttpChatClient c(http_spec(server));
    std::vector<std::thread> threads;
    std::atomic<int> ok{0};
    for (int i = 0; i < 8; ++i)
        threads.emplace_back([&, i] {
            if (c.complete({{Role::user, "m" + std::to_string(i)}}) == "echo: m" + std::to_string(i)) ++ok;
        });
    for (auto& t : threads) t.join();
    EXPECT_EQ(ok, 8);
}
