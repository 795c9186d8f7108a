#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "paths.hpp"
#include "testmend/gateway.hpp"

namespace testsupport {

// Scriptable backend: answers from per-template queues, or a catch-all queue,
// or a handler function. Records every prompt it saw.
class StubBackend : public testmend::ChatBackend {
public:
    std::string complete(const testmend::RenderedPrompt& prompt) override {
        prompts.push_back(prompt);
        if (handler) return handler(prompt);
        auto it = by_template.find(prompt.template_id);
        if (it != by_template.end() && !it->second.empty()) {
            std::string r = it->second.front();
            it->second.pop_front();
            return r;
        }
        if (!any.empty()) {
            std::string r = any.front();
            any.pop_front();
            return r;
        }
        throw testmend::ReplayMiss("stub has no reply for " + prompt.template_id);
    }

    void script(const std::string& template_id, const std::string& reply) {
        by_template[template_id].push_back(reply);
    }
    void script_any(const std::string& reply) { any.push_back(reply); }

    std::function<std::string(const testmend::RenderedPrompt&)> handler;
    std::map<std::string, std::deque<std::string>> by_template;
    std::deque<std::string> any;
    std::vector<testmend::RenderedPrompt> prompts;
};

struct StubGateway {
    std::shared_ptr<StubBackend> backend = std::make_shared<StubBackend>();
    testmend::Gateway gateway{testmend::load_templates(templates_dir()), backend};
};

} // namespace testsupport
