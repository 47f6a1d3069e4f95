#include <cstdlib>
#include <memory>
#include <string>

#include <httplib.h>

#include "evoclean/errors.hpp"
#include "evoclean/gateway.hpp"

namespace evoclean {

namespace {

struct ParsedUrl {
    std::string scheme_host_port;  // what httplib::Client wants
    std::string path_prefix;       // e.g. "/v1", may be empty
};

ParsedUrl parse_base_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("base_url must start with http:// or https://: " + url);
    }
    auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl out;
    if (path_start == std::string::npos) {
        out.scheme_host_port = url;
    } else {
        out.scheme_host_port = url.substr(0, path_start);
        out.path_prefix = url.substr(path_start);
        while (!out.path_prefix.empty() && out.path_prefix.back() == '/') {
            out.path_prefix.pop_back();
        }
    }
    return out;
}

class HttpBackend final : public ChatBackend {
public:
    explicit HttpBackend(const EndpointConfig& config)
        : url_(parse_base_url(config.base_url)), timeout_s_(config.timeout_s) {
        if (!config.api_key_env.empty()) {
            const char* key = std::getenv(config.api_key_env.c_str());
            if (!key || !*key) {
                throw ConfigError("environment variable " + config.api_key_env +
                                  " is not set (required for endpoint " + config.base_url + ")");
            }
            bearer_ = key;
        }
    }

    RawResponse post_chat(const json& request_body) override {
        httplib::Client client(url_.scheme_host_port);
        auto secs = static_cast<time_t>(timeout_s_);
        auto usecs = static_cast<time_t>((timeout_s_ - static_cast<double>(secs)) * 1e6);
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);

        httplib::Headers headers;
        if (!bearer_.empty()) headers.emplace("Authorization", "Bearer " + bearer_);

        auto res = client.Post(url_.path_prefix + "/chat/completions", headers,
                               request_body.dump(), "application/json");
        if (!res) {
            return RawResponse{0, "", httplib::to_string(res.error())};
        }
        return RawResponse{res->status, res->body, ""};
    }

    std::string name() const override { return "http"; }

private:
    ParsedUrl url_;
    double timeout_s_;
    std::string bearer_;
};

}  // namespace

std::shared_ptr<ChatBackend> make_http_backend(const EndpointConfig& config) {
    return std::make_shared<HttpBackend>(config);
}

std::shared_ptr<ChatBackend> make_backend(const EndpointConfig& config) {
    if (config.backend == "http") return make_http_backend(config);
    if (config.backend == "mock") {
        if (config.fixture_path.empty()) {
            throw ConfigError("mock backend requires a fixture path");
        }
        return MockBackend::from_file(config.fixture_path);
    }
    if (config.backend == "replay") {
        if (config.transcript_path.empty()) {
            throw ConfigError("replay backend requires a transcript path");
        }
        return ReplayBackend::from_file(config.transcript_path);
    }
    throw ConfigError("unknown backend \"" + config.backend + "\" (expected http|mock|replay)");
}

}  // namespace evoclean
