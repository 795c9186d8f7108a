#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "testmend/util.hpp"

namespace testmend {

// One prompt template per agent task. Bodies ship as external files so the
// wording can be swapped without rebuilding; placeholders are {{name}}.
struct PromptTemplate {
    std::string id;
    std::string body;
    std::set<std::string> required_placeholders;
};

inline const std::vector<std::string>& template_ids() {
    static const std::vector<std::string> ids = {
        "input_filter",   "test_update",     "error_analyze",   "coverage_analyze",
        "mutation_analyze", "retrieval_query", "retrieval_filter", "module_select"};
    return ids;
}

inline std::set<std::string> scan_placeholders(const std::string& body) {
    std::set<std::string> names;
    size_t pos = 0;
    while ((pos = body.find("{{", pos)) != std::string::npos) {
        size_t end = body.find("}}", pos + 2);
        if (end == std::string::npos) break;
        names.insert(body.substr(pos + 2, end - pos - 2));
        pos = end + 2;
    }
    return names;
}

class TemplateCatalog {
public:
    void add(PromptTemplate tpl) {
        if (tpl.required_placeholders.empty())
            tpl.required_placeholders = scan_placeholders(tpl.body);
        templates_[tpl.id] = std::move(tpl);
    }

    const PromptTemplate& get(const std::string& id) const {
        auto it = templates_.find(id);
        if (it == templates_.end()) throw Error("unknown prompt template: " + id);
        return it->second;
    }

    bool has(const std::string& id) const { return templates_.count(id) > 0; }

private:
    std::map<std::string, PromptTemplate> templates_;
};

// Loads <id>.txt for every known template id from a directory.
inline TemplateCatalog load_templates(const std::filesystem::path& dir) {
    TemplateCatalog catalog;
    for (const auto& id : template_ids()) {
        auto path = dir / (id + ".txt");
        if (!std::filesystem::exists(path))
            throw Error("missing prompt template file: " + path.string());
        catalog.add({id, read_file(path), {}});
    }
    return catalog;
}

// A rendered prompt keeps the template id and a digest of its bindings so
// replay transcripts survive cosmetic template edits.
struct RenderedPrompt {
    std::string template_id;
    std::string binding_digest;
    std::string text;
};

inline std::string digest_bindings(const std::map<std::string, std::string>& bindings) {
    std::string buf;
    for (const auto& [key, value] : bindings) {
        buf += key;
        buf += '\x1f';
        buf += value;
        buf += '\x1e';
    }
    return to_hex(fnv1a64(buf));
}

// Pure substitution: every required placeholder must be bound, extra bindings
// are ignored, and the result carries no unresolved markers.
inline RenderedPrompt render(const TemplateCatalog& catalog, const std::string& template_id,
                             const std::map<std::string, std::string>& bindings) {
    const PromptTemplate& tpl = catalog.get(template_id);
    for (const auto& name : tpl.required_placeholders) {
        if (!bindings.count(name))
            throw Error("missing placeholder binding: " + name + " (template " + template_id + ")");
    }
    std::string out = tpl.body;
    for (const auto& name : tpl.required_placeholders) {
        std::string marker = "{{" + name + "}}";
        size_t pos = 0;
        const std::string& value = bindings.at(name);
        while ((pos = out.find(marker, pos)) != std::string::npos) {
            out.replace(pos, marker.size(), value);
            pos += value.size();
        }
    }
    return RenderedPrompt{template_id, digest_bindings(bindings), std::move(out)};
}

} // namespace testmend
