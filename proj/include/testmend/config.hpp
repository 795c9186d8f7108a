#pragma once

// Single config file (JSON) wiring the whole pipeline: session limits,
// gateway endpoint/credentials, adapter selection {maven, replay} and
// embedder selection {hash, http}. Relative paths resolve against the config
// file's directory; secrets are env-var indirected.

#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "testmend/build_adapter.hpp"
#include "testmend/coordinator.hpp"
#include "testmend/error_agent.hpp"
#include "testmend/gateway.hpp"
#include "testmend/retriever.hpp"
#include "testmend/util.hpp"

namespace testmend {

class ConfigError : public Error {
public:
    using Error::Error;
};

struct AppConfig {
    SessionConfig session;
    std::string gateway_backend = "replay"; // replay | http
    ChatConfig chat;
    std::filesystem::path transcript;
    bool strict_bytes = false;
    std::string adapter_backend = "replay"; // replay | maven
    std::filesystem::path replay_bundle;
    MavenCommands maven;
    PhaseTimeouts timeouts;
    std::string embedder_backend = "hash"; // hash | http
    int embedder_dimension = 256;
    std::string embedder_endpoint;
    std::string embedder_model;
    std::string embedder_credential_env;
    int retrieval_top_k = 5;
    std::filesystem::path templates_dir = "templates";
    std::filesystem::path symbol_catalog; // optional extension file
    std::filesystem::path base_dir;       // directory of the config file
};

inline AppConfig load_config(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    AppConfig config;
    config.base_dir = path.has_parent_path() ? path.parent_path() : ".";

    auto fail = [&](const std::string& key, const std::string& what) {
        throw ConfigError(path.string() + ": key '" + key + "': " + what);
    };
    auto resolve = [&](const std::string& p) -> std::filesystem::path {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : config.base_dir / fp;
    };

    try {
        if (j.contains("session")) {
            const auto& s = j["session"];
            config.session.max_iterations = s.value("max_iterations", 4);
            config.session.line_threshold = s.value("line_threshold", 100.0);
            config.session.branch_threshold = s.value("branch_threshold", 100.0);
            config.session.mutation_threshold = s.value("mutation_threshold", 100.0);
            config.session.max_retrieval_iterations = s.value("max_retrieval_iterations", 3);
            config.session.top_k_hunks = s.value("top_k_hunks", 10);
            if (config.session.max_iterations < 1) fail("session.max_iterations", "must be >= 1");
            for (double t : {config.session.line_threshold, config.session.branch_threshold,
                             config.session.mutation_threshold})
                if (t < 0 || t > 100) fail("session thresholds", "must be in [0,100]");
        }
        if (j.contains("gateway")) {
            const auto& g = j["gateway"];
            config.gateway_backend = g.value("backend", "replay");
            config.chat.model_id = g.value("model", config.chat.model_id);
            config.chat.temperature = g.value("temperature", 0.0);
            config.chat.max_output_tokens = g.value("max_output_tokens", 4096);
            config.chat.endpoint = g.value("endpoint", "");
            config.chat.credential_env = g.value("credential_env", "");
            config.chat.retry_attempts = g.value("retry_attempts", 3);
            config.chat.retry_backoff_ms = g.value("retry_backoff_ms", 1000);
            if (g.contains("transcript"))
                config.transcript = resolve(g["transcript"].get<std::string>());
            config.strict_bytes = g.value("strict_bytes", false);
            if (config.gateway_backend != "replay" && config.gateway_backend != "http")
                fail("gateway.backend", "must be 'replay' or 'http'");
        }
        if (j.contains("adapter")) {
            const auto& a = j["adapter"];
            config.adapter_backend = a.value("backend", "replay");
            if (a.contains("bundle")) config.replay_bundle = resolve(a["bundle"].get<std::string>());
            if (a.contains("commands")) {
                const auto& c = a["commands"];
                config.maven.compile = c.value("compile", config.maven.compile);
                config.maven.tests = c.value("tests", config.maven.tests);
                config.maven.coverage = c.value("coverage", config.maven.coverage);
                config.maven.mutation = c.value("mutation", config.maven.mutation);
                config.maven.coverage_report =
                    c.value("coverage_report", config.maven.coverage_report);
                config.maven.mutation_report_dir =
                    c.value("mutation_report_dir", config.maven.mutation_report_dir);
            }
            if (a.contains("timeouts")) {
                const auto& t = a["timeouts"];
                config.timeouts.compile_s = t.value("compile_s", 300);
                config.timeouts.tests_s = t.value("tests_s", 300);
                config.timeouts.coverage_s = t.value("coverage_s", 300);
                config.timeouts.mutation_s = t.value("mutation_s", 900);
            }
            if (config.adapter_backend != "replay" && config.adapter_backend != "maven")
                fail("adapter.backend", "must be 'replay' or 'maven'");
        }
        if (j.contains("embedder")) {
            const auto& e = j["embedder"];
            config.embedder_backend = e.value("backend", "hash");
            config.embedder_dimension = e.value("dimension", 256);
            config.embedder_endpoint = e.value("endpoint", "");
            config.embedder_model = e.value("model", "");
            config.embedder_credential_env = e.value("credential_env", "");
            if (config.embedder_backend != "hash" && config.embedder_backend != "http")
                fail("embedder.backend", "must be 'hash' or 'http'");
        }
        config.retrieval_top_k = j.value("retrieval_top_k", 5);
        if (j.contains("templates_dir"))
            config.templates_dir = resolve(j["templates_dir"].get<std::string>());
        if (j.contains("symbol_catalog"))
            config.symbol_catalog = resolve(j["symbol_catalog"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return config;
}

inline std::shared_ptr<ChatBackend> make_chat_backend(const AppConfig& config) {
    if (config.gateway_backend == "replay") {
        if (config.transcript.empty())
            throw ConfigError("gateway.backend is 'replay' but no transcript is configured");
        return load_transcript(config.transcript, config.strict_bytes);
    }
    return std::make_shared<HttpBackend>(config.chat);
}

inline std::unique_ptr<BuildAdapter> make_adapter(const AppConfig& config) {
    if (config.adapter_backend == "replay") {
        if (config.replay_bundle.empty())
            throw ConfigError("adapter.backend is 'replay' but no bundle is configured");
        return std::make_unique<ReplayAdapter>(config.replay_bundle);
    }
    return std::make_unique<MavenAdapter>(config.maven);
}

inline std::shared_ptr<Embedder> make_embedder(const AppConfig& config) {
    if (config.embedder_backend == "hash")
        return std::make_shared<HashEmbedder>(config.embedder_dimension);
    return std::make_shared<HttpEmbedder>(config.embedder_endpoint, config.embedder_model,
                                          config.embedder_dimension,
                                          config.embedder_credential_env);
}

inline KnownSymbolCatalog make_catalog(const AppConfig& config) {
    auto catalog = KnownSymbolCatalog::bundled();
    if (!config.symbol_catalog.empty()) catalog.load(config.symbol_catalog);
    return catalog;
}

} // namespace testmend
