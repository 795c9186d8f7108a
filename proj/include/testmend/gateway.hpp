#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "testmend/http.hpp"
#include "testmend/prompt.hpp"
#include "testmend/util.hpp"

namespace testmend {

struct ChatConfig {
    std::string model_id = "gpt-4.1";
    double temperature = 0.0;
    int max_output_tokens = 4096;
    std::string endpoint;        // base URL of an OpenAI-compatible server
    std::string credential_env;  // env var holding the API key
    int retry_attempts = 3;
    int retry_backoff_ms = 1000; // doubled per retry, transport/5xx only
};

class GatewayError : public Error {
public:
    using Error::Error;
};

class ReplayMiss : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class TransportExhausted : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class ProviderRejected : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string complete(const RenderedPrompt& prompt) = 0;
};

// Deterministic backend answering from a recorded transcript. Entries match
// on (template_id, binding_digest); entries with digest "*" match any prompt
// of that template, consumed in file order. Repeated keys form an ordered
// multi-turn queue; an exhausted queue is a replay miss.
class ReplayBackend : public ChatBackend {
public:
    struct Entry {
        std::string template_id;
        std::string binding_digest;
        std::string response_text;
    };

    explicit ReplayBackend(bool strict_bytes = false) : strict_bytes_(strict_bytes) {}

    void add(Entry entry) {
        queues_[key(entry.template_id, entry.binding_digest)].push_back(entry.response_text);
    }

    std::string complete(const RenderedPrompt& prompt) override {
        std::lock_guard<std::mutex> lock(mutex_);
        std::string digest =
            strict_bytes_ ? to_hex(fnv1a64(prompt.text)) : prompt.binding_digest;
        auto it = queues_.find(key(prompt.template_id, digest));
        if (it == queues_.end() || it->second.empty())
            it = queues_.find(key(prompt.template_id, "*"));
        if (it == queues_.end() || it->second.empty())
            throw ReplayMiss("no transcript entry for template '" + prompt.template_id +
                             "' digest " + digest);
        std::string response = it->second.front();
        it->second.pop_front();
        return response;
    }

private:
    static std::string key(const std::string& id, const std::string& digest) {
        return id + "\x1f" + digest;
    }

    bool strict_bytes_;
    std::mutex mutex_;
    std::map<std::string, std::deque<std::string>> queues_;
};

// Transcript files are newline-delimited JSON records:
//   {"template_id": ..., "binding_digest": ..., "response_text": ...}
inline std::shared_ptr<ReplayBackend> load_transcript(const std::filesystem::path& path,
                                                      bool strict_bytes = false) {
    auto backend = std::make_shared<ReplayBackend>(strict_bytes);
    std::string content = read_file(path);
    int line_no = 0;
    for (const auto& line : split_lines(content)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw GatewayError("malformed transcript at " + path.string() + ":" +
                               std::to_string(line_no) + ": " + e.what());
        }
        if (!record.contains("template_id") || !record.contains("binding_digest") ||
            !record.contains("response_text"))
            throw GatewayError("malformed transcript at " + path.string() + ":" +
                               std::to_string(line_no) + ": missing field");
        backend->add({record["template_id"].get<std::string>(),
                      record["binding_digest"].get<std::string>(),
                      record["response_text"].get<std::string>()});
    }
    return backend;
}

// Transport hook so retry behavior is testable without a live server.
// Returns (status_code, body); status 0 means transport failure.
using HttpPostFn = std::function<std::pair<int, std::string>(
    const std::string& url, const std::string& body, const std::string& bearer)>;

// Live backend speaking the OpenAI chat-completions shape. Retries transport
// failures and 5xx with exponential backoff; 4xx is terminal.
class HttpBackend : public ChatBackend {
public:
    explicit HttpBackend(ChatConfig config, HttpPostFn post = {})
        : config_(std::move(config)), post_(std::move(post)) {
        if (!post_) post_ = http_post_json;
    }

    std::string complete(const RenderedPrompt& prompt) override {
        nlohmann::json payload = {
            {"model", config_.model_id},
            {"temperature", config_.temperature},
            {"max_tokens", config_.max_output_tokens},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt.text}}})}};
        std::string bearer;
        if (!config_.credential_env.empty()) {
            if (const char* v = std::getenv(config_.credential_env.c_str())) bearer = v;
        }
        std::string url = config_.endpoint + "/chat/completions";
        int backoff_ms = config_.retry_backoff_ms;
        std::string last_error;
        for (int attempt = 1; attempt <= config_.retry_attempts; ++attempt) {
            auto [status, body] = post_(url, payload.dump(), bearer);
            if (status >= 200 && status < 300) {
                nlohmann::json reply = nlohmann::json::parse(body);
                if (reply.contains("usage"))
                    last_usage_ = reply["usage"].dump();
                return reply.at("choices").at(0).at("message").at("content").get<std::string>();
            }
            if (status >= 400 && status < 500)
                throw ProviderRejected("provider rejected request with status " +
                                       std::to_string(status) + ": " + body);
            last_error = status == 0 ? "transport failure" : "status " + std::to_string(status);
            if (attempt < config_.retry_attempts) {
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
                backoff_ms *= 2;
            }
        }
        throw TransportExhausted("gave up after " + std::to_string(config_.retry_attempts) +
                                 " attempts: " + last_error);
    }

    // Token usage as reported by the provider on the last call, if any.
    const std::string& last_usage() const { return last_usage_; }

private:
    ChatConfig config_;
    HttpPostFn post_;
    std::string last_usage_;
};

// Convenience facade bundling the catalog and backend used by all agents.
struct Gateway {
    TemplateCatalog catalog;
    std::shared_ptr<ChatBackend> backend;

    std::string ask(const std::string& template_id,
                    const std::map<std::string, std::string>& bindings) const {
        return backend->complete(render(catalog, template_id, bindings));
    }
};

} // namespace testmend
