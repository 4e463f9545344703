#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace opo {

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string content;
};

struct ChatRequest {
    std::string model_id;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_output_tokens = 1024;

    // Canonical serialization; used for cassette keys and mock scripting.
    std::string canonical() const;
    std::string digest() const;
    // Concatenated message contents, for mocks that only look at the prompt.
    std::string joined_content() const;
};

struct ChatResponse {
    std::string content;
    std::map<std::string, std::string> backend_meta;
};

class ChatBackend {
  public:
    virtual ~ChatBackend() = default;
    virtual ChatResponse complete(const ChatRequest& req) = 0;
    virtual int max_in_flight() const { return 8; }
};

// Deterministic scripted backend: the response is a pure function of the
// request. Thread-safe as long as the script function is.
class ScriptedMockBackend : public ChatBackend {
  public:
    using Script = std::function<std::string(const ChatRequest&)>;
    explicit ScriptedMockBackend(Script script) : script_(std::move(script)) {}
    static std::unique_ptr<ScriptedMockBackend> constant(std::string reply);

    ChatResponse complete(const ChatRequest& req) override;
    std::uint64_t call_count() const { return calls_; }

  private:
    Script script_;
    std::mutex mu_;
    std::uint64_t calls_ = 0;
};

// Wraps a backend and appends {digest -> response} records to a cassette
// file, one JSON record per line.
class RecordingBackend : public ChatBackend {
  public:
    RecordingBackend(std::shared_ptr<ChatBackend> inner, std::string cassette_path);
    ChatResponse complete(const ChatRequest& req) override;
    int max_in_flight() const override { return inner_->max_in_flight(); }

  private:
    std::shared_ptr<ChatBackend> inner_;
    std::string path_;
    std::mutex mu_;
};

// Serves responses from a recorded cassette; a request whose digest is not
// in the cassette is an error.
class ReplayBackend : public ChatBackend {
  public:
    explicit ReplayBackend(const std::string& cassette_path);
    ChatResponse complete(const ChatRequest& req) override;

  private:
    std::map<std::string, std::string> responses_;
};

struct HttpBackendConfig {
    std::string host;          // e.g. "127.0.0.1"
    int port = 443;
    std::string path = "/v1/chat/completions";
    std::string auth_env_var = "OPO_CHAT_TOKEN";
    int max_retries = 3;
    int backoff_initial_ms = 100;
    int max_in_flight = 8;
};

// JSON-over-HTTP chat backend with bounded retries and exponential backoff.
class HttpChatBackend : public ChatBackend {
  public:
    explicit HttpChatBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {}
    ChatResponse complete(const ChatRequest& req) override;
    int max_in_flight() const override { return cfg_.max_in_flight; }
    std::uint64_t retry_count() const { return retries_; }

  private:
    HttpBackendConfig cfg_;
    std::uint64_t retries_ = 0;
};

}  // namespace opo
