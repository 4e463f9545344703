#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "opo/errors.hpp"
#include "opo/llmclient.hpp"

using namespace opo;

namespace {

ChatRequest make_request(const std::string& content) {
    ChatRequest req;
    req.model_id = "m";
    req.messages = {{"user", content}};
    return req;
}

struct TempPath {
    std::string path;
    TempPath() : path(std::tmpnam(nullptr)) {}
    ~TempPath() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("scripted mock") {
    SUBCASE("constant script") {
        auto mock = ScriptedMockBackend::constant("B");
        CHECK(mock->complete(make_request("anything")).content == "B");
        CHECK(mock->complete(make_request("else")).content == "B");
        CHECK(mock->call_count() == 2);
    }
    SUBCASE("identical requests give identical responses") {
        ScriptedMockBackend mock(
            [](const ChatRequest& req) { return req.digest().substr(0, 6); });
        auto a = mock.complete(make_request("x")).content;
        auto b = mock.complete(make_request("x")).content;
        CHECK(a == b);
        CHECK(a != mock.complete(make_request("y")).content);
    }
}

TEST_CASE("request digest is stable and canonical") {
    auto a = make_request("hello");
    auto b = make_request("hello");
    CHECK(a.digest() == b.digest());
    b.temperature = 0.5;
    CHECK(a.digest() != b.digest());
}

TEST_CASE("record then replay is byte-identical") {
    TempPath cassette;
    {
        auto inner = ScriptedMockBackend::constant("recorded answer");
        RecordingBackend rec(std::move(inner), cassette.path);
        CHECK(rec.complete(make_request("q1")).content == "recorded answer");
        CHECK(rec.complete(make_request("q2")).content == "recorded answer");
    }
    ReplayBackend replay(cassette.path);
    CHECK(replay.complete(make_request("q1")).content == "recorded answer");
    CHECK(replay.complete(make_request("q2")).content == "recorded answer");
    CHECK_THROWS_AS(replay.complete(make_request("never recorded")), ProviderError);
}

TEST_CASE("http backend against a stub server") {
    httplib::Server server;
    int failures_left = 0;
    bool garbage_payload = false;
    double seen_temperature = -1.0;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        auto body = nlohmann::json::parse(req.body);
        seen_temperature = body.at("temperature").get<double>();
        if (failures_left > 0) {
            --failures_left;
            res.status = 500;
            return;
        }
        if (garbage_payload) {
            res.set_content("not json", "text/plain");
            return;
        }
        res.set_content(R"({"content":"stub reply"})", "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpBackendConfig cfg;
    cfg.host = "127.0.0.1";
    cfg.port = port;
    cfg.backoff_initial_ms = 1;

    SUBCASE("500 twice then 200 succeeds with retry counter 2") {
        failures_left = 2;
        HttpChatBackend backend(cfg);
        CHECK(backend.complete(make_request("hello")).content == "stub reply");
        CHECK(backend.retry_count() == 2);
    }
    SUBCASE("temperature 0 is passed through on the wire") {
        HttpChatBackend backend(cfg);
        backend.complete(make_request("hello"));
        CHECK(seen_temperature == 0.0);
    }
    SUBCASE("exhausted retries raise a transport error") {
        failures_left = 100;
        cfg.max_retries = 2;
        HttpChatBackend backend(cfg);
        CHECK_THROWS_AS(backend.complete(make_request("hello")), ProviderError);
    }
    SUBCASE("non-parseable payload is a protocol error") {
        garbage_payload = true;
        HttpChatBackend backend(cfg);
        CHECK_THROWS_AS(backend.complete(make_request("hello")), ProviderError);
    }

    server.stop();
    t.join();
}
