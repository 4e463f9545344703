#include "opo/llmclient.hpp"

#include <chrono>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "opo/digest.hpp"
#include "opo/errors.hpp"

#define CPPHTTPLIB_NO_EXCEPTIONS 0
#include "httplib.h"

namespace opo {

using nlohmann::json;

std::string ChatRequest::canonical() const {
    json msgs = json::array();
    for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    json j{{"model_id", model_id},
           {"messages", msgs},
           {"temperature", temperature},
           {"max_output_tokens", max_output_tokens}};
    return j.dump();
}

std::string ChatRequest::digest() const { return sha256_hex(canonical()); }

std::string ChatRequest::joined_content() const {
    std::string out;
    for (const auto& m : messages) {
        if (!out.empty()) out += '\n';
        out += m.content;
    }
    return out;
}

std::unique_ptr<ScriptedMockBackend> ScriptedMockBackend::constant(std::string reply) {
    return std::make_unique<ScriptedMockBackend>(
        [reply = std::move(reply)](const ChatRequest&) { return reply; });
}

ChatResponse ScriptedMockBackend::complete(const ChatRequest& req) {
    {
        std::lock_guard lock(mu_);
        ++calls_;
    }
    return ChatResponse{script_(req), {{"backend", "mock"}}};
}

RecordingBackend::RecordingBackend(std::shared_ptr<ChatBackend> inner, std::string cassette_path)
    : inner_(std::move(inner)), path_(std::move(cassette_path)) {}

ChatResponse RecordingBackend::complete(const ChatRequest& req) {
    ChatResponse resp = inner_->complete(req);
    json rec{{"digest", req.digest()}, {"response", resp.content}};
    std::lock_guard lock(mu_);
    std::ofstream out(path_, std::ios::app);
    if (!out) throw ProviderError("cannot open cassette for append: " + path_);
    out << rec.dump() << '\n';
    return resp;
}

ReplayBackend::ReplayBackend(const std::string& cassette_path) {
    std::ifstream in(cassette_path);
    if (!in) throw ProviderError("cannot open cassette: " + cassette_path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json rec = json::parse(line);
        responses_[rec.at("digest").get<std::string>()] = rec.at("response").get<std::string>();
    }
}

ChatResponse ReplayBackend::complete(const ChatRequest& req) {
    auto it = responses_.find(req.digest());
    if (it == responses_.end())
        throw ProviderError("cassette miss for request digest " + req.digest());
    return ChatResponse{it->second, {{"backend", "replay"}}};
}

ChatResponse HttpChatBackend::complete(const ChatRequest& req) {
    json msgs = json::array();
    for (const auto& m : req.messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    json body{{"model_id", req.model_id},
              {"messages", msgs},
              {"temperature", req.temperature},
              {"max_output_tokens", req.max_output_tokens}};

    httplib::Client client(cfg_.host, cfg_.port);
    httplib::Headers headers;
    if (const char* token = std::getenv(cfg_.auth_env_var.c_str()))
        headers.emplace("Authorization", std::string("Bearer ") + token);

    int backoff = cfg_.backoff_initial_ms;
    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        if (attempt > 0) {
            ++retries_;
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            backoff *= 2;
        }
        auto res = client.Post(cfg_.path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "transport failure";
            continue;
        }
        if (res->status >= 500) {
            last_error = "server status " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw ProviderError("chat backend rejected request: status " +
                                std::to_string(res->status));
        try {
            json reply = json::parse(res->body);
            ChatResponse out;
            out.content = reply.at("content").get<std::string>();
            out.backend_meta["status"] = "200";
            return out;
        } catch (const json::exception& e) {
            throw ProviderError(std::string("non-parseable chat payload: ") + e.what());
        }
    }
    throw ProviderError("chat backend failed after " + std::to_string(cfg_.max_retries) +
                        " retries: " + last_error);
}

}  // namespace opo
