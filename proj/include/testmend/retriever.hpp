#pragma once

// Semantic symbol resolution over module-scoped embeddings. A module at a
// time is embedded (never the whole repository); unknown symbols are resolved
// by exact name where possible and by cosine similarity plus an LLM relevance
// filter otherwise, expanding to further modules or rewritten queries within
// an iteration budget.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "testmend/gateway.hpp"
#include "testmend/java_source.hpp"
#include "testmend/types.hpp"
#include "testmend/util.hpp"

namespace testmend {

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<double> embed(const std::string& text) = 0;
    virtual int dimension() const = 0;
    virtual std::string id() const = 0;
};

// Deterministic feature-hash embedder: tokens hashed into a fixed-dimension
// signed accumulator, L2-normalized. Same text, same vector bytes.
class HashEmbedder : public Embedder {
public:
    explicit HashEmbedder(int dimension = 256) : dimension_(dimension) {}

    std::vector<double> embed(const std::string& text) override {
        std::vector<double> vec(static_cast<size_t>(dimension_), 0.0);
        for (const auto& token : tokenize(text)) {
            uint64_t h = fnv1a64(token);
            size_t slot = h % static_cast<uint64_t>(dimension_);
            double sign = ((h >> 32) & 1) ? 1.0 : -1.0;
            vec[slot] += sign;
        }
        double norm = 0;
        for (double v : vec) norm += v * v;
        norm = std::sqrt(norm);
        if (norm > 0)
            for (double& v : vec) v /= norm;
        return vec;
    }

    int dimension() const override { return dimension_; }
    std::string id() const override { return "hash-" + std::to_string(dimension_); }

private:
    int dimension_;
};

// OpenAI-compatible embeddings endpoint (text in, float vector out).
class HttpEmbedder : public Embedder {
public:
    HttpEmbedder(std::string endpoint, std::string model, int dimension,
                 std::string credential_env = {}, HttpPostFn post = {})
        : endpoint_(std::move(endpoint)), model_(std::move(model)), dimension_(dimension),
          credential_env_(std::move(credential_env)), post_(std::move(post)) {
        if (!post_) post_ = http_post_json;
    }

    std::vector<double> embed(const std::string& text) override {
        nlohmann::json payload = {{"model", model_}, {"input", text}};
        std::string bearer;
        if (!credential_env_.empty())
            if (const char* v = std::getenv(credential_env_.c_str())) bearer = v;
        auto [status, body] = post_(endpoint_ + "/embeddings", payload.dump(), bearer);
        if (status < 200 || status >= 300)
            throw Error("embedding endpoint returned status " + std::to_string(status));
        auto reply = nlohmann::json::parse(body);
        return reply.at("data").at(0).at("embedding").get<std::vector<double>>();
    }

    int dimension() const override { return dimension_; }
    std::string id() const override { return "http:" + model_; }

private:
    std::string endpoint_;
    std::string model_;
    int dimension_;
    std::string credential_env_;
    HttpPostFn post_;
};

struct IndexEntry {
    std::string symbol;
    std::string kind; // method | field
    std::string doc;  // javadoc or synthesized "name + signature" text
    std::string file_path;
    std::string import_path;
    std::string signature;
    std::vector<double> vector;
};

struct EmbeddingIndex {
    std::string module_root;
    std::vector<IndexEntry> entries;
    int dimension = 0;
    std::string embedder_id;
    bool empty_module = false;
};

inline void to_json(nlohmann::json& j, const IndexEntry& e) {
    j = nlohmann::json{{"symbol", e.symbol},   {"kind", e.kind},
                       {"doc", e.doc},         {"file_path", e.file_path},
                       {"import_path", e.import_path}, {"signature", e.signature},
                       {"vector", e.vector}};
}
inline void from_json(const nlohmann::json& j, IndexEntry& e) {
    j.at("symbol").get_to(e.symbol);
    j.at("kind").get_to(e.kind);
    j.at("doc").get_to(e.doc);
    j.at("file_path").get_to(e.file_path);
    j.at("import_path").get_to(e.import_path);
    j.at("signature").get_to(e.signature);
    j.at("vector").get_to(e.vector);
}
inline void to_json(nlohmann::json& j, const EmbeddingIndex& idx) {
    j = nlohmann::json{{"module_root", idx.module_root},
                       {"entries", idx.entries},
                       {"dimension", idx.dimension},
                       {"embedder_id", idx.embedder_id},
                       {"empty_module", idx.empty_module}};
}
inline void from_json(const nlohmann::json& j, EmbeddingIndex& idx) {
    j.at("module_root").get_to(idx.module_root);
    j.at("entries").get_to(idx.entries);
    j.at("dimension").get_to(idx.dimension);
    j.at("embedder_id").get_to(idx.embedder_id);
    j.at("empty_module").get_to(idx.empty_module);
}

// Scans production sources under the module for method/field declarations and
// embeds their natural-language descriptions (javadoc, else synthesized from
// name and signature).
inline EmbeddingIndex build_index(const std::filesystem::path& module_root, Embedder& embedder) {
    if (!std::filesystem::exists(module_root))
        throw Error("module root does not exist: " + module_root.string());
    EmbeddingIndex index;
    index.module_root = module_root.string();
    index.dimension = embedder.dimension();
    index.embedder_id = embedder.id();

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(module_root))
        if (entry.is_regular_file() && entry.path().extension() == ".java")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    for (const auto& file : files) {
        std::string src = read_file(file);
        std::string pkg = java::package_of(src);
        std::string cls = java::top_level_class_name(src);
        std::string import_path = pkg.empty() ? cls : pkg + "." + cls;
        for (const auto& member : java::extract_members(src)) {
            IndexEntry e;
            e.symbol = member.name;
            e.kind = member.kind;
            e.signature = member.signature;
            e.doc = member.doc.empty() ? member.name + " " + member.signature : member.doc;
            e.file_path = file.string();
            e.import_path = import_path;
            e.vector = embedder.embed(e.doc);
            index.entries.push_back(std::move(e));
        }
    }
    index.empty_module = index.entries.empty();
    return index;
}

inline void save_index(const EmbeddingIndex& index, const std::filesystem::path& path) {
    nlohmann::json j = index;
    write_file(path, j.dump());
}

inline EmbeddingIndex load_index(const std::filesystem::path& path) {
    return nlohmann::json::parse(read_file(path)).get<EmbeddingIndex>();
}

inline double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0 || nb == 0) return 0.0; // zero-norm vectors score 0
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct QueryHit {
    const IndexEntry* entry;
    double score;
};

// Top-k by cosine, descending; ties keep entry insertion order.
inline std::vector<QueryHit> query(const EmbeddingIndex& index,
                                   const std::vector<double>& query_vector, int k) {
    if (static_cast<int>(query_vector.size()) != index.dimension)
        throw Error("query dimension " + std::to_string(query_vector.size()) +
                    " does not match index dimension " + std::to_string(index.dimension));
    std::vector<QueryHit> hits;
    hits.reserve(index.entries.size());
    for (const auto& e : index.entries) hits.push_back({&e, cosine_similarity(query_vector, e.vector)});
    std::stable_sort(hits.begin(), hits.end(),
                     [](const QueryHit& a, const QueryHit& b) { return a.score > b.score; });
    if (static_cast<int>(hits.size()) > k) hits.resize(static_cast<size_t>(k));
    return hits;
}

struct RetrievalBudget {
    int max_iterations = 3;
    std::set<std::string> embedded_modules;
};

struct RetrievalResult {
    std::vector<std::pair<std::string, ResolvedSymbol>> resolved; // query symbol -> resolution
    std::vector<std::string> unresolved;
};

// Module discovery: nested Maven module directories when present, otherwise
// the leaf package directories under the source root.
inline std::vector<std::string> discover_modules(const std::filesystem::path& repo_root) {
    std::vector<std::string> modules;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(repo_root)) {
        if (entry.is_regular_file() && entry.path().filename() == "pom.xml" &&
            entry.path().parent_path() != repo_root)
            modules.push_back(entry.path().parent_path().string());
    }
    if (modules.empty()) {
        std::set<std::string> leaf_dirs;
        for (const auto& entry : std::filesystem::recursive_directory_iterator(repo_root)) {
            if (entry.is_regular_file() && entry.path().extension() == ".java" &&
                entry.path().string().find("/main/") != std::string::npos)
                leaf_dirs.insert(entry.path().parent_path().string());
        }
        modules.assign(leaf_dirs.begin(), leaf_dirs.end());
    }
    std::sort(modules.begin(), modules.end());
    return modules;
}

class Retriever {
public:
    Retriever(std::filesystem::path repo_root, std::shared_ptr<Embedder> embedder, int top_k = 5)
        : repo_root_(std::move(repo_root)), embedder_(std::move(embedder)), top_k_(top_k) {}

    // Iterates module selection, per-symbol query writing, top-k retrieval and
    // LLM relevance filtering until every symbol resolves or the budget is
    // spent. Exact name matches bypass the filter. Budget exhaustion is not an
    // error; leftover symbols come back as unresolved.
    RetrievalResult resolve_symbols(const std::vector<std::string>& symbols,
                                    const UpdateTask& task, RetrievalBudget& budget,
                                    const Gateway& gateway) {
        RetrievalResult result;
        std::vector<std::string> pending = symbols;
        if (pending.empty()) return result;
        auto modules = discover_modules(repo_root_);

        std::string next_module;
        for (int iteration = 1; iteration <= budget.max_iterations && !pending.empty();
             ++iteration) {
            if (budget.embedded_modules.empty())
                next_module = select_module(pending, modules, budget, gateway);
            if (!next_module.empty()) {
                indices_.push_back(build_index(next_module, *embedder_));
                budget.embedded_modules.insert(next_module);
                next_module.clear();
            }

            std::vector<std::string> still_pending;
            for (const auto& symbol : pending) {
                auto resolved = resolve_one(symbol, task, gateway);
                if (resolved) result.resolved.emplace_back(symbol, *resolved);
                else still_pending.push_back(symbol);
            }
            pending = std::move(still_pending);

            if (!pending.empty() && iteration < budget.max_iterations) {
                // one decision call: embed another module next round, or
                // rewrite the per-symbol queries with the same indices
                next_module = select_module_or_rewrite(pending, modules, budget, gateway);
            }
        }
        result.unresolved = std::move(pending);
        return result;
    }

private:
    std::optional<ResolvedSymbol> resolve_one(const std::string& symbol, const UpdateTask& task,
                                              const Gateway& gateway) {
        // exact name match resolves directly, bypassing the relevance filter
        for (const auto& index : indices_) {
            for (const auto& entry : index.entries) {
                if (entry.symbol == symbol) return to_resolved(entry);
            }
        }
        if (indices_.empty()) return std::nullopt;

        std::string query_text = gateway.ask("retrieval_query",
                                             {{"symbol", symbol},
                                              {"test_code", task.test_before},
                                              {"focal_after", task.focal_after.source}});
        auto qvec = embedder_->embed(trim(query_text));

        std::vector<QueryHit> hits;
        for (const auto& index : indices_) {
            auto top = query(index, qvec, top_k_);
            hits.insert(hits.end(), top.begin(), top.end());
        }
        std::stable_sort(hits.begin(), hits.end(),
                         [](const QueryHit& a, const QueryHit& b) { return a.score > b.score; });
        if (static_cast<int>(hits.size()) > top_k_) hits.resize(static_cast<size_t>(top_k_));
        if (hits.empty()) return std::nullopt;

        std::string candidates;
        for (size_t i = 0; i < hits.size(); ++i)
            candidates += std::to_string(i + 1) + ". " + hits[i].entry->kind + " " +
                          hits[i].entry->symbol + " — " + hits[i].entry->signature + " (" +
                          hits[i].entry->import_path + ")\n";
        std::string reply = gateway.ask("retrieval_filter",
                                        {{"symbol", symbol}, {"candidates", candidates}});
        for (const auto& line : split_lines(reply)) {
            std::string t = trim(line);
            if (starts_with(t, "ACCEPT")) {
                int pick = std::atoi(trim(t.substr(6)).c_str());
                if (pick >= 1 && pick <= static_cast<int>(hits.size()))
                    return to_resolved(*hits[static_cast<size_t>(pick - 1)].entry);
            }
        }
        return std::nullopt;
    }

    std::string select_module(const std::vector<std::string>& symbols,
                              const std::vector<std::string>& modules, RetrievalBudget& budget,
                              const Gateway& gateway) {
        std::vector<std::string> available;
        for (const auto& m : modules)
            if (!budget.embedded_modules.count(m)) available.push_back(m);
        if (available.empty()) return "";
        std::string listing, symbol_list;
        for (const auto& m : available) listing += m + "\n";
        for (const auto& s : symbols) symbol_list += s + "\n";
        std::string reply = gateway.ask("module_select",
                                        {{"symbols", symbol_list},
                                         {"modules", listing},
                                         {"embedded", joined(budget.embedded_modules)}});
        for (const auto& line : split_lines(reply)) {
            std::string t = trim(line);
            if (starts_with(t, "MODULE")) t = trim(t.substr(6));
            for (const auto& m : available)
                if (t == m) return m;
        }
        return available.front(); // unusable reply: take the first unembedded module
    }

    // Same template mediates the expansion decision: "MODULE <path>" embeds
    // that module next round, "REWRITE" retries with rewritten queries.
    // Returns the module path to embed, or empty for rewrite.
    std::string select_module_or_rewrite(const std::vector<std::string>& symbols,
                                         const std::vector<std::string>& modules,
                                         RetrievalBudget& budget, const Gateway& gateway) {
        std::vector<std::string> available;
        for (const auto& m : modules)
            if (!budget.embedded_modules.count(m)) available.push_back(m);
        if (available.empty()) return "";
        std::string listing, symbol_list;
        for (const auto& m : available) listing += m + "\n";
        for (const auto& s : symbols) symbol_list += s + "\n";
        std::string reply = gateway.ask("module_select",
                                        {{"symbols", symbol_list},
                                         {"modules", listing},
                                         {"embedded", joined(budget.embedded_modules)}});
        for (const auto& line : split_lines(reply)) {
            std::string t = trim(line);
            if (t == "REWRITE") return "";
            if (starts_with(t, "MODULE")) {
                std::string named = trim(t.substr(6));
                for (const auto& m : available)
                    if (named == m) return m;
                return available.front();
            }
        }
        return "";
    }

    ResolvedSymbol to_resolved(const IndexEntry& entry) const {
        ResolvedSymbol r;
        r.name = entry.symbol;
        r.kind = entry.kind;
        r.signature_or_definition = entry.signature;
        r.file_path = entry.file_path;
        r.import_path = entry.import_path;
        return r;
    }

    static std::string joined(const std::set<std::string>& items) {
        std::string out;
        for (const auto& item : items) out += item + "\n";
        return out;
    }

    std::filesystem::path repo_root_;
    std::shared_ptr<Embedder> embedder_;
    int top_k_;
    std::vector<EmbeddingIndex> indices_;
};

} // namespace testmend
