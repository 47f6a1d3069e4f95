#include "evoclean/config.hpp"

#include <set>

#include "evoclean/errors.hpp"

namespace evoclean {

namespace {

// Allowed keys per config section; anything else is rejected with its path.
const std::map<std::string, std::set<std::string>>& config_schema() {
    static const std::map<std::string, std::set<std::string>> schema = {
        {"", {"corpus", "maps", "run", "category", "descriptor", "endpoints", "deploy", "metrics",
              "artificial_markers"}},
        {"corpus", {"input", "tokenizer"}},
        {"maps", {"quality", "doc_type"}},
        {"run",
         {"id", "iterations", "observe_docs", "clean_docs", "judge_pairs", "seed", "runs_root",
          "max_tool_rounds", "stop_after"}},
        {"descriptor", {"domain", "content"}},
        {"endpoints", {"observer", "designer", "cleaner", "judge"}},
        {"endpoints.*",
         {"backend", "base_url", "model", "api_key_env", "timeout_s", "max_attempts",
          "backoff_initial_ms", "backoff_multiplier", "max_in_flight", "temperature", "fixture",
          "transcript"}},
        {"deploy", {"parallelism", "checkpoint_interval", "out", "stop_after_docs"}},
        {"metrics", {"embed_dimension", "rouge_refs", "seed", "report", "histogram_csv"}},
    };
    return schema;
}

void check_keys(const json& obj, const std::string& path) {
    if (!obj.is_object()) return;
    const auto& schema = config_schema();
    std::string lookup = path;
    if (path.rfind("endpoints.", 0) == 0) lookup = "endpoints.*";
    auto it = schema.find(lookup);
    if (it == schema.end()) return;  // free-form section (maps.quality etc.)
    for (const auto& [key, value] : obj.items()) {
        if (!it->second.count(key)) {
            throw ConfigError("unknown config key: " + (path.empty() ? key : path + "." + key));
        }
        std::string child = path.empty() ? key : path + "." + key;
        // maps.quality / maps.doc_type hold arbitrary labels
        if (child == "maps.quality" || child == "maps.doc_type") continue;
        check_keys(value, child);
    }
}

json parse_override_value(const std::string& raw) {
    json v = json::parse(raw, nullptr, false);
    if (v.is_discarded()) return json(raw);  // bare strings stay strings
    return v;
}

void apply_override(json& root, const std::string& spec) {
    auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override must look like section.key=value: " + spec);
    }
    std::string path = spec.substr(0, eq);
    json value = parse_override_value(spec.substr(eq + 1));

    json* node = &root;
    std::size_t pos = 0;
    while (true) {
        auto dot = path.find('.', pos);
        std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (key.empty()) throw ConfigError("bad override path: " + path);
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        pos = dot + 1;
    }
}

const json& require(const json& root, const std::string& section, const std::string& key) {
    if (!root.contains(section) || !root.at(section).contains(key)) {
        throw ConfigError("config is missing " + section + "." + key);
    }
    return root.at(section).at(key);
}

}  // namespace

FileConfig FileConfig::load(const std::filesystem::path& path,
                            const std::vector<std::string>& overrides) {
    json root = json::parse(read_file(path), nullptr, false);
    if (root.is_discarded()) throw ConfigError("config file is not valid JSON: " + path.string());
    return from_json(std::move(root), overrides);
}

FileConfig FileConfig::from_json(json effective, const std::vector<std::string>& overrides) {
    for (const auto& o : overrides) apply_override(effective, o);
    check_keys(effective, "");
    FileConfig c;
    c.effective_ = std::move(effective);
    return c;
}

std::filesystem::path FileConfig::corpus_input() const {
    return require(effective_, "corpus", "input").get<std::string>();
}

std::shared_ptr<Tokenizer> FileConfig::tokenizer() const {
    std::string name = "whitespace";
    if (effective_.contains("corpus") && effective_.at("corpus").contains("tokenizer")) {
        name = effective_.at("corpus").at("tokenizer").get<std::string>();
    }
    return make_tokenizer(name);
}

LabelMap FileConfig::quality_map() const {
    LabelMap map;
    if (effective_.contains("maps") && effective_.at("maps").contains("quality")) {
        for (const auto& [k, v] : effective_.at("maps").at("quality").items()) {
            map[k] = v.get<std::string>();
        }
    }
    return map;
}

LabelMap FileConfig::doc_type_map() const {
    LabelMap map;
    if (effective_.contains("maps") && effective_.at("maps").contains("doc_type")) {
        for (const auto& [k, v] : effective_.at("maps").at("doc_type").items()) {
            map[k] = v.get<std::string>();
        }
    }
    return map;
}

bool FileConfig::has_category() const { return effective_.contains("category"); }

CategoryKey FileConfig::category() const {
    if (!effective_.contains("category")) throw ConfigError("config is missing category");
    auto slug = effective_.at("category").get<std::string>();
    auto key = category_from_slug(slug);
    if (!key) {
        throw ConfigError("bad category \"" + slug +
                          "\" (expected <content_type>-<quality>-<domain>)");
    }
    return *key;
}

CategoryDescriptor FileConfig::descriptor() const {
    if (effective_.contains("descriptor")) {
        const auto& d = effective_.at("descriptor");
        CategoryDescriptor out{d.value("domain", ""), d.value("content", "")};
        if (out.domain_text.empty() || out.content_text.empty()) {
            throw ConfigError("descriptor.domain and descriptor.content must be non-empty");
        }
        return out;
    }
    return default_descriptor(category());
}

EndpointConfig FileConfig::endpoint(const std::string& role) const {
    EndpointConfig cfg;
    if (!effective_.contains("endpoints") || !effective_.at("endpoints").contains(role)) {
        throw ConfigError("config is missing endpoints." + role);
    }
    const auto& e = effective_.at("endpoints").at(role);
    cfg.backend = e.value("backend", "http");
    cfg.base_url = e.value("base_url", "");
    cfg.model_name = e.value("model", "unnamed-model");
    cfg.api_key_env = e.value("api_key_env", "");
    cfg.timeout_s = e.value("timeout_s", 60.0);
    cfg.max_attempts = e.value("max_attempts", 3);
    cfg.backoff.initial_ms = e.value("backoff_initial_ms", 200);
    cfg.backoff.multiplier = e.value("backoff_multiplier", 2.0);
    cfg.max_in_flight = e.value("max_in_flight", 4);
    if (e.contains("temperature") && !e.at("temperature").is_null()) {
        cfg.temperature = e.at("temperature").get<double>();
    }
    cfg.fixture_path = e.value("fixture", "");
    cfg.transcript_path = e.value("transcript", "");
    if (cfg.backend == "http" && cfg.base_url.empty()) {
        throw ConfigError("endpoints." + role + ".base_url required for http backend");
    }
    return cfg;
}

RunConfig FileConfig::run_config() const {
    RunConfig rc;
    rc.category = category();
    rc.descriptor = descriptor();
    const json run = effective_.value("run", json::object());
    rc.run_id = run.value("id", "");
    rc.iterations = run.value("iterations", 30ULL);
    rc.observe_docs = run.value("observe_docs", std::size_t{100});
    rc.clean_docs = run.value("clean_docs", std::size_t{500});
    rc.judge_pairs = run.value("judge_pairs", std::size_t{50});
    rc.seed = run.value("seed", 0ULL);
    rc.runs_root = run.value("runs_root", "runs");
    rc.max_tool_rounds = run.value("max_tool_rounds", 16);
    rc.stop_after = run.value("stop_after", 0ULL);
    rc.observer = AgentProfile::make(AgentRole::observer, endpoint("observer"));
    rc.designer = AgentProfile::make(AgentRole::designer, endpoint("designer"));
    rc.cleaner = AgentProfile::make(AgentRole::cleaner, endpoint("cleaner"));
    rc.judge = AgentProfile::make(AgentRole::judge, endpoint("judge"));
    rc.validate();
    return rc;
}

DeployOptions FileConfig::deploy_options() const {
    DeployOptions opt;
    const json dep = effective_.value("deploy", json::object());
    opt.parallelism = dep.value("parallelism", 4);
    opt.checkpoint_interval = dep.value("checkpoint_interval", 1000ULL);
    opt.stop_after_docs = dep.value("stop_after_docs", 0ULL);
    opt.extra_artificial_markers = artificial_markers();
    return opt;
}

std::filesystem::path FileConfig::deploy_out() const {
    return require(effective_, "deploy", "out").get<std::string>();
}

std::size_t FileConfig::metrics_embed_dimension() const {
    return effective_.value("metrics", json::object()).value("embed_dimension", std::size_t{4096});
}

std::size_t FileConfig::metrics_rouge_refs() const {
    return effective_.value("metrics", json::object()).value("rouge_refs", std::size_t{10});
}

std::uint64_t FileConfig::metrics_seed() const {
    return effective_.value("metrics", json::object()).value("seed", 0ULL);
}

std::filesystem::path FileConfig::metrics_report_path() const {
    return effective_.value("metrics", json::object())
        .value("report", std::string("metrics_report.txt"));
}

std::filesystem::path FileConfig::metrics_histogram_path() const {
    return effective_.value("metrics", json::object())
        .value("histogram_csv", std::string("similarity_hist.csv"));
}

std::vector<std::string> FileConfig::artificial_markers() const {
    std::vector<std::string> out;
    if (effective_.contains("artificial_markers")) {
        for (const auto& m : effective_.at("artificial_markers")) {
            out.push_back(m.get<std::string>());
        }
    }
    return out;
}

json example_config() {
    return json{
        {"corpus", {{"input", "corpus.jsonl"}, {"tokenizer", "whitespace"}}},
        {"maps",
         {{"quality", {{"High", "high"}, {"Medium-High", "not_high"}, {"Medium", "not_high"},
                       {"Medium-Low", "not_high"}, {"Low", "not_high"}}},
          {"doc_type",
           {{"Academic Writing", "academic"}, {"Code", "code"}, {"Fragment", "fragment"},
            {"Social Media", "social_media"}, {"Text", "text"}}}}},
        {"run",
         {{"id", "run1"}, {"iterations", 30}, {"observe_docs", 100}, {"clean_docs", 500},
          {"judge_pairs", 50}, {"seed", 42}, {"runs_root", "runs"}, {"max_tool_rounds", 16}}},
        {"category", "academic-high-medicine"},
        {"descriptor", {{"domain", "medicine"}, {"content", "academic"}}},
        {"endpoints",
         {{"observer",
           {{"backend", "http"}, {"base_url", "http://localhost:8000/v1"},
            {"model", "observer-model"}, {"api_key_env", "EVOCLEAN_API_KEY"},
            {"timeout_s", 120.0}, {"max_attempts", 3}, {"backoff_initial_ms", 200},
            {"backoff_multiplier", 2.0}, {"max_in_flight", 4}}},
          {"designer",
           {{"backend", "http"}, {"base_url", "http://localhost:8000/v1"},
            {"model", "designer-model"}, {"api_key_env", "EVOCLEAN_API_KEY"}}},
          {"cleaner",
           {{"backend", "http"}, {"base_url", "http://localhost:8000/v1"},
            {"model", "cleaner-model"}, {"api_key_env", "EVOCLEAN_API_KEY"},
            {"max_in_flight", 8}}},
          {"judge",
           {{"backend", "http"}, {"base_url", "http://localhost:8000/v1"},
            {"model", "judge-model"}, {"api_key_env", "EVOCLEAN_API_KEY"}}}}},
        {"deploy", {{"parallelism", 4}, {"checkpoint_interval", 1000}, {"out", "cleaned.jsonl"}}},
        {"metrics",
         {{"embed_dimension", 4096}, {"rouge_refs", 10}, {"seed", 42},
          {"report", "metrics_report.txt"}, {"histogram_csv", "similarity_hist.csv"}}},
        {"artificial_markers", json::array()}};
}

}  // namespace evoclean
