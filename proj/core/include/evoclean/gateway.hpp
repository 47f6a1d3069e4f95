#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "evoclean/jsonio.hpp"

namespace evoclean {

struct BackoffPolicy {
    int initial_ms = 200;
    double multiplier = 2.0;
};

// One chat endpoint. The API key is read from the named environment
// variable, never stored in config files.
struct EndpointConfig {
    std::string backend = "mock";  // http | mock | replay
    std::string base_url;
    std::string model_name = "mock-model";
    std::string api_key_env;
    double timeout_s = 60.0;
    int max_attempts = 3;
    BackoffPolicy backoff;
    int max_in_flight = 4;
    std::optional<double> temperature;  // pass-through; endpoint default when unset
    std::filesystem::path fixture_path;     // mock backend
    std::filesystem::path transcript_path;  // replay backend
};

enum class Role { system, user, assistant, tool };

const char* to_string(Role r);
std::optional<Role> role_from_string(const std::string& s);

struct ToolCall {
    std::string id;
    std::string name;
    std::string arguments;  // JSON text, as carried on the wire
};

struct ChatMessage {
    Role role = Role::user;
    std::optional<std::string> content;
    std::vector<ToolCall> tool_calls;
    std::string tool_call_id;  // role == tool only

    static ChatMessage system_msg(std::string text);
    static ChatMessage user_msg(std::string text);
    static ChatMessage assistant_msg(std::string text);
    static ChatMessage tool_result(std::string call_id, std::string text);

    json to_json() const;
    static ChatMessage from_json(const json& j);
};

struct ToolSpec {
    std::string name;
    std::string description;
    json parameters;  // JSON-schema object

    json to_json() const;
};

// Request/response pair plus retry metadata. latency is excluded from the
// digest so mock-backend runs stay reproducible.
struct ChatExchange {
    json request;
    json response;
    int attempts = 1;
    double latency_ms = 0.0;
};

struct Transcript {
    std::vector<ChatExchange> exchanges;

    std::uint64_t digest() const;
    void save_jsonl(const std::filesystem::path& path) const;
    static Transcript load_jsonl(const std::filesystem::path& path);
};

// What a backend returns before protocol parsing. transport_error set means
// the request never produced an HTTP response.
struct RawResponse {
    int status = 0;
    std::string body;
    std::string transport_error;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual RawResponse post_chat(const json& request_body) = 0;
    virtual std::string name() const = 0;
};

// Scripted backend. Steps are consumed in order; a step with
// match_user_contains that does not match the latest user message fails
// loudly. Step fields:
//   match_user_contains: substring matcher (optional)
//   times: serve this step N times (default 1)
//   status: simulate this HTTP status instead of a message (e.g. 503)
//   content: assistant text (content_mode literal)
//   content_mode: literal | echo_user | strip_tagged
//   strip_start / strip_end: tags for strip_tagged (spans removed inclusive)
//   tool_calls: [{"name": ..., "arguments": {...}}]
class MockBackend final : public ChatBackend {
public:
    explicit MockBackend(json fixture);
    static std::shared_ptr<MockBackend> from_file(const std::filesystem::path& path);

    RawResponse post_chat(const json& request_body) override;
    std::string name() const override { return "mock"; }

    std::size_t steps_consumed() const;

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

// Serves the responses of a recorded transcript in order, verifying that
// each request's latest user message matches the recording.
class ReplayBackend final : public ChatBackend {
public:
    explicit ReplayBackend(Transcript transcript);
    static std::shared_ptr<ReplayBackend> from_file(const std::filesystem::path& path);

    RawResponse post_chat(const json& request_body) override;
    std::string name() const override { return "replay"; }

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

std::shared_ptr<ChatBackend> make_http_backend(const EndpointConfig& config);
std::shared_ptr<ChatBackend> make_backend(const EndpointConfig& config);

struct CompletionResult {
    ChatMessage message;
    int attempts = 1;
};

using ToolDispatcher = std::function<std::string(const std::string& name, const json& args)>;

struct ToolLoopResult {
    ChatMessage final_message;
    std::vector<ChatMessage> messages;  // full conversation including tool results
    Transcript transcript;
};

// Retry/backoff wrapper plus the tool-calling loop over one endpoint.
// complete() is safe for concurrent use; in-flight requests are capped at
// config.max_in_flight.
class ChatClient {
public:
    explicit ChatClient(EndpointConfig config);
    ChatClient(EndpointConfig config, std::shared_ptr<ChatBackend> backend);
    ~ChatClient();

    // Sends messages, retrying transport errors and HTTP 429/5xx with
    // exponential backoff. 4xx validation failures are never retried.
    CompletionResult complete(const std::vector<ChatMessage>& messages,
                              const std::vector<ToolSpec>& tools = {},
                              Transcript* transcript = nullptr);

    // Executes tool calls in message order until the assistant stops calling
    // tools or max_rounds completions have been made.
    ToolLoopResult run_tool_loop(std::vector<ChatMessage> messages,
                                 const std::vector<ToolSpec>& tools,
                                 const ToolDispatcher& dispatcher, int max_rounds = 16);

    const EndpointConfig& config() const { return config_; }
    ChatBackend& backend() { return *backend_; }

private:
    json build_request(const std::vector<ChatMessage>& messages,
                       const std::vector<ToolSpec>& tools) const;

    EndpointConfig config_;
    std::shared_ptr<ChatBackend> backend_;
    struct Gate;
    std::unique_ptr<Gate> gate_;
};

// Returns the last parseable JSON object in text: fenced ```json blocks are
// preferred, then the rightmost maximal balanced-brace object. Strict parse;
// on failure raises ValidationError carrying the trailing 200 characters.
json extract_json(const std::string& text);

}  // namespace evoclean
