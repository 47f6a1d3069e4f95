#include "evoclean/gateway.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <mutex>
#include <semaphore>
#include <thread>

#include "evoclean/errors.hpp"
#include "evoclean/hash.hpp"

namespace evoclean {

namespace {

std::string latest_user_content(const json& request) {
    if (!request.contains("messages")) return {};
    const auto& msgs = request.at("messages");
    for (auto it = msgs.rbegin(); it != msgs.rend(); ++it) {
        if (it->value("role", "") == "user" && it->contains("content") &&
            it->at("content").is_string()) {
            return it->at("content").get<std::string>();
        }
    }
    return {};
}

std::string strip_tagged_spans(std::string text, const std::string& start_tag,
                               const std::string& end_tag) {
    if (start_tag.empty() || end_tag.empty()) return text;
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto s = text.find(start_tag, pos);
        if (s == std::string::npos) {
            out.append(text, pos, text.size() - pos);
            break;
        }
        out.append(text, pos, s - pos);
        auto e = text.find(end_tag, s + start_tag.size());
        if (e == std::string::npos) {
            // unterminated span: drop the rest
            break;
        }
        pos = e + end_tag.size();
    }
    return out;
}

}  // namespace

const char* to_string(Role r) {
    switch (r) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
        case Role::tool: return "tool";
    }
    return "?";
}

std::optional<Role> role_from_string(const std::string& s) {
    if (s == "system") return Role::system;
    if (s == "user") return Role::user;
    if (s == "assistant") return Role::assistant;
    if (s == "tool") return Role::tool;
    return std::nullopt;
}

ChatMessage ChatMessage::system_msg(std::string text) {
    ChatMessage m;
    m.role = Role::system;
    m.content = std::move(text);
    return m;
}

ChatMessage ChatMessage::user_msg(std::string text) {
    ChatMessage m;
    m.role = Role::user;
    m.content = std::move(text);
    return m;
}

ChatMessage ChatMessage::assistant_msg(std::string text) {
    ChatMessage m;
    m.role = Role::assistant;
    m.content = std::move(text);
    return m;
}

ChatMessage ChatMessage::tool_result(std::string call_id, std::string text) {
    ChatMessage m;
    m.role = Role::tool;
    m.tool_call_id = std::move(call_id);
    m.content = std::move(text);
    return m;
}

json ChatMessage::to_json() const {
    json j;
    j["role"] = to_string(role);
    j["content"] = content ? json(*content) : json(nullptr);
    if (!tool_calls.empty()) {
        json calls = json::array();
        for (const auto& tc : tool_calls) {
            calls.push_back(json{{"id", tc.id},
                                 {"type", "function"},
                                 {"function", json{{"name", tc.name}, {"arguments", tc.arguments}}}});
        }
        j["tool_calls"] = std::move(calls);
    }
    if (role == Role::tool) j["tool_call_id"] = tool_call_id;
    return j;
}

ChatMessage ChatMessage::from_json(const json& j) {
    ChatMessage m;
    auto role = role_from_string(j.value("role", ""));
    if (!role) throw ProtocolError("message with unknown role: " + j.value("role", "<none>"));
    m.role = *role;
    if (j.contains("content") && j.at("content").is_string()) {
        m.content = j.at("content").get<std::string>();
    }
    if (j.contains("tool_calls")) {
        for (const auto& cj : j.at("tool_calls")) {
            ToolCall tc;
            tc.id = cj.value("id", "");
            const auto& fn = cj.at("function");
            tc.name = fn.value("name", "");
            const auto& args = fn.at("arguments");
            tc.arguments = args.is_string() ? args.get<std::string>() : args.dump();
            m.tool_calls.push_back(std::move(tc));
        }
    }
    m.tool_call_id = j.value("tool_call_id", "");
    if (m.role == Role::tool && m.tool_call_id.empty()) {
        throw ProtocolError("tool message without tool_call_id");
    }
    return m;
}

json ToolSpec::to_json() const {
    return json{{"type", "function"},
                {"function",
                 json{{"name", name}, {"description", description}, {"parameters", parameters}}}};
}

std::uint64_t Transcript::digest() const {
    std::uint64_t h = kFnvOffset;
    for (const auto& ex : exchanges) {
        h = fnv1a64(ex.request.dump(), h);
        h = fnv1a64(ex.response.dump(), h);
        h = fnv1a64_u64(static_cast<std::uint64_t>(ex.attempts), h);
    }
    return h;
}

void Transcript::save_jsonl(const std::filesystem::path& path) const {
    std::string out;
    for (const auto& ex : exchanges) {
        json line{{"request", ex.request},
                  {"response", ex.response},
                  {"attempts", ex.attempts},
                  {"latency_ms", round4(ex.latency_ms)}};
        out += line.dump();
        out += '\n';
    }
    atomic_write_file(path, out);
}

Transcript Transcript::load_jsonl(const std::filesystem::path& path) {
    Transcript t;
    for_each_jsonl(path, [&](std::size_t, const json& line) {
        ChatExchange ex;
        ex.request = line.at("request");
        ex.response = line.at("response");
        ex.attempts = line.value("attempts", 1);
        ex.latency_ms = line.value("latency_ms", 0.0);
        t.exchanges.push_back(std::move(ex));
    });
    return t;
}

// ---------------------------------------------------------------------------
// Mock backend
// ---------------------------------------------------------------------------

struct MockBackend::Impl {
    struct Step {
        std::string match_user_contains;
        int times = 1;
        int status = 200;
        std::optional<std::string> content;
        std::string content_mode = "literal";
        std::string strip_start;
        std::string strip_end;
        json tool_calls = json::array();
    };

    std::vector<Step> steps;
    std::size_t cursor = 0;
    int uses_of_current = 0;
    std::size_t served = 0;
    std::mutex mu;
};

MockBackend::MockBackend(json fixture) : impl_(std::make_shared<Impl>()) {
    if (!fixture.contains("steps") || !fixture.at("steps").is_array()) {
        throw FixtureError("mock fixture must contain a \"steps\" array");
    }
    for (const auto& sj : fixture.at("steps")) {
        Impl::Step s;
        s.match_user_contains = sj.value("match_user_contains", "");
        s.times = sj.value("times", 1);
        s.status = sj.value("status", 200);
        if (sj.contains("content") && sj.at("content").is_string()) {
            s.content = sj.at("content").get<std::string>();
        }
        s.content_mode = sj.value("content_mode", "literal");
        s.strip_start = sj.value("strip_start", "");
        s.strip_end = sj.value("strip_end", "");
        if (sj.contains("tool_calls")) s.tool_calls = sj.at("tool_calls");
        if (s.times < 1) throw FixtureError("mock fixture step with times < 1");
        impl_->steps.push_back(std::move(s));
    }
}

std::shared_ptr<MockBackend> MockBackend::from_file(const std::filesystem::path& path) {
    json fixture = json::parse(read_file(path));
    return std::make_shared<MockBackend>(std::move(fixture));
}

std::size_t MockBackend::steps_consumed() const {
    std::lock_guard lock(impl_->mu);
    return impl_->served;
}

RawResponse MockBackend::post_chat(const json& request_body) {
    std::lock_guard lock(impl_->mu);
    if (impl_->cursor >= impl_->steps.size()) {
        throw FixtureError("mock fixture exhausted after " + std::to_string(impl_->served) +
                           " responses");
    }
    auto& step = impl_->steps[impl_->cursor];
    std::string user = latest_user_content(request_body);
    if (!step.match_user_contains.empty() &&
        user.find(step.match_user_contains) == std::string::npos) {
        throw FixtureError("mock fixture step " + std::to_string(impl_->cursor) +
                           " expected user message containing \"" + step.match_user_contains +
                           "\" but got: " + user.substr(0, 160));
    }
    ++impl_->served;
    if (++impl_->uses_of_current >= step.times) {
        ++impl_->cursor;
        impl_->uses_of_current = 0;
    }

    if (step.status != 200) {
        return RawResponse{step.status, R"({"error":{"message":"scripted error"}})", ""};
    }

    json message;
    message["role"] = "assistant";
    if (step.content_mode == "echo_user") {
        message["content"] = user;
    } else if (step.content_mode == "strip_tagged") {
        message["content"] = strip_tagged_spans(user, step.strip_start, step.strip_end);
    } else if (step.content) {
        message["content"] = *step.content;
    } else {
        message["content"] = nullptr;
    }
    if (!step.tool_calls.empty()) {
        // ids are unique within the message and independent of history, so
        // resumed runs replay to identical transcripts
        json calls = json::array();
        std::size_t k = 0;
        for (const auto& tc : step.tool_calls) {
            const auto& args = tc.at("arguments");
            calls.push_back(
                json{{"id", "call_" + std::to_string(++k)},
                     {"type", "function"},
                     {"function", json{{"name", tc.at("name").get<std::string>()},
                                       {"arguments", args.is_string() ? args.get<std::string>()
                                                                      : args.dump()}}}});
        }
        message["tool_calls"] = std::move(calls);
    }

    json body{{"id", "mock"},
              {"object", "chat.completion"},
              {"model", request_body.value("model", "mock-model")},
              {"choices", json::array({json{{"index", 0},
                                            {"message", message},
                                            {"finish_reason",
                                             step.tool_calls.empty() ? "stop" : "tool_calls"}}})}};
    return RawResponse{200, body.dump(), ""};
}

// ---------------------------------------------------------------------------
// Replay backend
// ---------------------------------------------------------------------------

struct ReplayBackend::Impl {
    Transcript transcript;
    std::size_t cursor = 0;
    std::mutex mu;
};

ReplayBackend::ReplayBackend(Transcript transcript) : impl_(std::make_shared<Impl>()) {
    impl_->transcript = std::move(transcript);
}

std::shared_ptr<ReplayBackend> ReplayBackend::from_file(const std::filesystem::path& path) {
    return std::make_shared<ReplayBackend>(Transcript::load_jsonl(path));
}

RawResponse ReplayBackend::post_chat(const json& request_body) {
    std::lock_guard lock(impl_->mu);
    if (impl_->cursor >= impl_->transcript.exchanges.size()) {
        throw FixtureError("replay transcript exhausted after " + std::to_string(impl_->cursor) +
                           " exchanges");
    }
    const auto& ex = impl_->transcript.exchanges[impl_->cursor++];
    std::string recorded = latest_user_content(ex.request);
    std::string incoming = latest_user_content(request_body);
    if (!recorded.empty() && recorded != incoming) {
        throw FixtureError("replay divergence at exchange " + std::to_string(impl_->cursor - 1) +
                           ": user message differs from recording");
    }
    return RawResponse{200, ex.response.dump(), ""};
}

// ---------------------------------------------------------------------------
// Client
// ---------------------------------------------------------------------------

struct ChatClient::Gate {
    explicit Gate(int n) : sem(n) {}
    std::counting_semaphore<4096> sem;
};

ChatClient::ChatClient(EndpointConfig config) : ChatClient(config, make_backend(config)) {}

ChatClient::ChatClient(EndpointConfig config, std::shared_ptr<ChatBackend> backend)
    : config_(std::move(config)), backend_(std::move(backend)) {
    if (config_.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
    if (config_.timeout_s <= 0) throw ConfigError("timeout must be > 0");
    gate_ = std::make_unique<Gate>(std::max(1, config_.max_in_flight));
}

ChatClient::~ChatClient() = default;

json ChatClient::build_request(const std::vector<ChatMessage>& messages,
                               const std::vector<ToolSpec>& tools) const {
    json msgs = json::array();
    for (const auto& m : messages) msgs.push_back(m.to_json());
    json req{{"model", config_.model_name}, {"messages", std::move(msgs)}};
    if (!tools.empty()) {
        json tj = json::array();
        for (const auto& t : tools) tj.push_back(t.to_json());
        req["tools"] = std::move(tj);
    }
    if (config_.temperature) req["temperature"] = *config_.temperature;
    return req;
}

CompletionResult ChatClient::complete(const std::vector<ChatMessage>& messages,
                                      const std::vector<ToolSpec>& tools, Transcript* transcript) {
    if (messages.empty()) throw ValidationError("complete() requires at least one message");
    if (messages.front().role != Role::system && messages.front().role != Role::user) {
        throw ValidationError("first message must have role system or user");
    }
    json request = build_request(messages, tools);

    auto t0 = std::chrono::steady_clock::now();
    RawResponse rr;
    int attempt = 0;
    double delay_ms = static_cast<double>(config_.backoff.initial_ms);
    double multiplier = std::max(1.0, config_.backoff.multiplier);
    for (attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        gate_->sem.acquire();
        try {
            rr = backend_->post_chat(request);
        } catch (...) {
            gate_->sem.release();
            throw;
        }
        gate_->sem.release();
        bool retryable = !rr.transport_error.empty() || rr.status == 429 || rr.status >= 500;
        if (!retryable) break;
        if (attempt < config_.max_attempts) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(static_cast<long>(delay_ms)));
            delay_ms *= multiplier;
        }
    }
    if (attempt > config_.max_attempts) attempt = config_.max_attempts;

    if (!rr.transport_error.empty() || rr.status == 429 || rr.status >= 500) {
        throw TransportError("endpoint failed after " + std::to_string(attempt) + " attempts" +
                                 (rr.transport_error.empty()
                                      ? " (last status " + std::to_string(rr.status) + ")"
                                      : " (" + rr.transport_error + ")"),
                             rr.status);
    }
    if (rr.status >= 400) {
        throw RequestError("endpoint rejected request with status " + std::to_string(rr.status) +
                               ": " + rr.body.substr(0, 200),
                           rr.status);
    }

    json body = json::parse(rr.body, nullptr, false);
    if (body.is_discarded()) throw ProtocolError("response body is not JSON");
    if (!body.contains("choices") || body.at("choices").empty()) {
        throw ProtocolError("response missing choices");
    }
    const auto& mj = body.at("choices").at(0).at("message");
    ChatMessage msg = ChatMessage::from_json(mj);
    if (msg.role != Role::assistant) throw ProtocolError("response missing assistant message");
    if (!msg.content && msg.tool_calls.empty()) {
        throw ProtocolError("assistant message carries neither content nor tool calls");
    }

    double latency = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                         .count();
    if (transcript) {
        transcript->exchanges.push_back(ChatExchange{request, body, attempt, latency});
    }
    return CompletionResult{std::move(msg), attempt};
}

ToolLoopResult ChatClient::run_tool_loop(std::vector<ChatMessage> messages,
                                         const std::vector<ToolSpec>& tools,
                                         const ToolDispatcher& dispatcher, int max_rounds) {
    Transcript transcript;
    bool unknown_tool_seen = false;
    for (int round = 1; round <= max_rounds; ++round) {
        CompletionResult res = complete(messages, tools, &transcript);
        messages.push_back(res.message);
        if (res.message.tool_calls.empty()) {
            return ToolLoopResult{res.message, std::move(messages), std::move(transcript)};
        }
        if (round == max_rounds) {
            throw ProtocolError("tool loop reached max_rounds=" + std::to_string(max_rounds) +
                                " with pending tool calls");
        }
        for (const auto& tc : res.message.tool_calls) {
            bool known = std::any_of(tools.begin(), tools.end(),
                                     [&](const ToolSpec& t) { return t.name == tc.name; });
            std::string result;
            if (!known) {
                if (unknown_tool_seen) {
                    throw ProtocolError("unknown tool repeated: " + tc.name);
                }
                unknown_tool_seen = true;
                result = "error: unknown tool '" + tc.name + "'";
            } else {
                json args = tc.arguments.empty() ? json::object()
                                                 : json::parse(tc.arguments, nullptr, false);
                if (args.is_discarded()) {
                    result = "error: tool arguments were not valid JSON";
                } else {
                    result = dispatcher(tc.name, args);
                }
            }
            messages.push_back(ChatMessage::tool_result(tc.id, result));
        }
    }
    throw ProtocolError("tool loop reached max_rounds=" + std::to_string(max_rounds) +
                        " with pending tool calls");
}

// ---------------------------------------------------------------------------
// JSON extraction
// ---------------------------------------------------------------------------

namespace {

std::optional<json> strict_parse_object(std::string_view sv) {
    // trim
    std::size_t b = sv.find_first_not_of(" \t\r\n");
    std::size_t e = sv.find_last_not_of(" \t\r\n");
    if (b == std::string_view::npos) return std::nullopt;
    sv = sv.substr(b, e - b + 1);
    if (sv.empty() || sv.front() != '{') return std::nullopt;
    json j = json::parse(sv, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    return j;
}

// [start, end] spans of balanced top-level-or-nested brace pairs.
std::vector<std::pair<std::size_t, std::size_t>> brace_spans(const std::string& text,
                                                             bool string_aware) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::vector<std::size_t> stack;
    bool in_str = false, esc = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (string_aware && in_str) {
            if (esc) {
                esc = false;
            } else if (c == '\\') {
                esc = true;
            } else if (c == '"') {
                in_str = false;
            }
            continue;
        }
        if (string_aware && c == '"' && !stack.empty()) {
            in_str = true;
        } else if (c == '{') {
            stack.push_back(i);
        } else if (c == '}') {
            if (!stack.empty()) {
                spans.emplace_back(stack.back(), i);
                stack.pop_back();
            }
        }
    }
    return spans;
}

}  // namespace

json extract_json(const std::string& text) {
    // Fenced blocks first; the last parseable one wins.
    std::optional<json> fenced;
    std::size_t pos = 0;
    while ((pos = text.find("```json", pos)) != std::string::npos) {
        std::size_t content_start = text.find('\n', pos);
        if (content_start == std::string::npos) break;
        ++content_start;
        std::size_t fence_close = text.find("```", content_start);
        if (fence_close == std::string::npos) break;
        auto candidate = std::string_view(text).substr(content_start, fence_close - content_start);
        if (auto j = strict_parse_object(candidate)) fenced = std::move(j);
        pos = fence_close + 3;
    }
    if (fenced) return *fenced;

    // Balanced-brace fallback: rightmost maximal parseable object.
    auto spans = brace_spans(text, true);
    {
        auto naive = brace_spans(text, false);
        spans.insert(spans.end(), naive.begin(), naive.end());
        std::sort(spans.begin(), spans.end());
        spans.erase(std::unique(spans.begin(), spans.end()), spans.end());
    }
    std::vector<std::pair<std::size_t, std::size_t>> parseable;
    std::vector<json> parsed;
    for (const auto& [s, e] : spans) {
        auto j = strict_parse_object(std::string_view(text).substr(s, e - s + 1));
        if (j) {
            parseable.emplace_back(s, e);
            parsed.push_back(std::move(*j));
        }
    }
    const json* best = nullptr;
    std::size_t best_start = 0;
    for (std::size_t i = 0; i < parseable.size(); ++i) {
        bool contained = false;
        for (std::size_t k = 0; k < parseable.size(); ++k) {
            if (k == i) continue;
            if (parseable[k].first <= parseable[i].first &&
                parseable[i].second <= parseable[k].second) {
                contained = true;
                break;
            }
        }
        if (contained) continue;
        if (!best || parseable[i].first >= best_start) {
            best = &parsed[i];
            best_start = parseable[i].first;
        }
    }
    if (best) return *best;

    std::string tail = text.size() > 200 ? text.substr(text.size() - 200) : text;
    throw ValidationError("no parseable JSON object in model output; trailing text: " + tail);
}

}  // namespace evoclean
