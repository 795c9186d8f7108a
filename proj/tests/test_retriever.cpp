#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support/paths.hpp"
#include "support/stub_gateway.hpp"
#include "testmend/retriever.hpp"

using namespace testmend;
using testsupport::StubGateway;
using testsupport::testdata;

namespace {

TEST(HashEmbedder, DeterministicSameTextSameBytes) {
    HashEmbedder embedder(256);
    auto a = embedder.embed("Enables or disables HTML injection");
    auto b = embedder.embed("Enables or disables HTML injection");
    ASSERT_EQ(a.size(), 256u);
    EXPECT_EQ(a, b); // exact byte equality, not approximate
    auto c = embedder.embed("something else entirely");
    EXPECT_NE(a, c);
}

TEST(HashEmbedder, VectorsAreUnitNorm) {
    HashEmbedder embedder(64);
    auto v = embedder.embed("a few tokens to hash");
    double norm = 0;
    for (double x : v) norm += x * x;
    EXPECT_NEAR(norm, 1.0, 1e-12);
}

TEST(Cosine, IdentityOrthogonalityAndZeroNorm) {
    EXPECT_DOUBLE_EQ(cosine_similarity({1, 0, 0, 0}, {1, 0, 0, 0}), 1.0);
    EXPECT_DOUBLE_EQ(cosine_similarity({1, 0, 0, 0}, {0, 1, 0, 0}), 0.0);
    EXPECT_DOUBLE_EQ(cosine_similarity({0, 0, 0, 0}, {1, 2, 3, 4}), 0.0);
    EXPECT_DOUBLE_EQ(cosine_similarity({2, 0}, {1, 0}), 1.0);
    EXPECT_NEAR(cosine_similarity({1, 1}, {-1, -1}), -1.0, 1e-12);
}

EmbeddingIndex toy_index(const std::vector<std::vector<double>>& vectors) {
    EmbeddingIndex index;
    index.dimension = static_cast<int>(vectors.empty() ? 0 : vectors[0].size());
    index.embedder_id = "toy";
    index.module_root = "toy";
    for (size_t i = 0; i < vectors.size(); ++i) {
        IndexEntry e;
        e.symbol = "s" + std::to_string(i);
        e.kind = "method";
        e.doc = "doc";
        e.vector = vectors[i];
        index.entries.push_back(std::move(e));
    }
    return index;
}

TEST(Query, ExactVectorScoresOneAndRanksFirst) {
    auto index = toy_index({{0, 1, 0, 0}, {1, 0, 0, 0}, {0.5, 0.5, 0, 0}});
    auto hits = query(index, {1, 0, 0, 0}, 3);
    ASSERT_EQ(hits.size(), 3u);
    EXPECT_EQ(hits[0].entry->symbol, "s1");
    EXPECT_DOUBLE_EQ(hits[0].score, 1.0);
}

TEST(Query, DimensionMismatchThrows) {
    auto index = toy_index({{1, 0, 0, 0}});
    EXPECT_THROW(query(index, {1, 0}, 1), Error);
}

TEST(Query, TopKOrderMatchesBruteForceOracleOnRandomIndices) {
    std::mt19937 rng(314159);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        int dim = std::uniform_int_distribution<int>(2, 6)(rng);
        int n = std::uniform_int_distribution<int>(1, 12)(rng);
        std::vector<std::vector<double>> vectors;
        for (int i = 0; i < n; ++i) {
            std::vector<double> v(static_cast<size_t>(dim));
            for (auto& x : v) x = coord(rng);
            if (std::uniform_int_distribution<int>(0, 9)(rng) == 0)
                std::fill(v.begin(), v.end(), 0.0); // occasional zero-norm entry
            vectors.push_back(std::move(v));
        }
        std::vector<double> q(static_cast<size_t>(dim));
        for (auto& x : q) x = coord(rng);

        int k = std::uniform_int_distribution<int>(1, n)(rng);
        auto index = toy_index(vectors);
        auto hits = query(index, q, k);

        // brute-force oracle: explicit loops, stable argsort on score
        std::vector<double> scores(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            double dot = 0, nq = 0, nv = 0;
            for (int d = 0; d < dim; ++d) {
                dot += q[(size_t)d] * vectors[(size_t)i][(size_t)d];
                nq += q[(size_t)d] * q[(size_t)d];
                nv += vectors[(size_t)i][(size_t)d] * vectors[(size_t)i][(size_t)d];
            }
            scores[(size_t)i] = (nq == 0 || nv == 0) ? 0.0 : dot / std::sqrt(nq * nv);
        }
        std::vector<int> order(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) order[(size_t)i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return scores[(size_t)a] > scores[(size_t)b]; });

        ASSERT_EQ(hits.size(), static_cast<size_t>(k));
        for (int i = 0; i < k; ++i) {
            ASSERT_EQ(hits[(size_t)i].entry->symbol, "s" + std::to_string(order[(size_t)i]))
                << "trial " << trial << " position " << i;
            ASSERT_NEAR(hits[(size_t)i].score, scores[(size_t)order[(size_t)i]], 1e-12);
        }
    }
}

TEST(Query, OrderInvariantUnderUniformPositiveScaling) {
    std::mt19937 rng(8888);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    std::vector<std::vector<double>> vectors;
    for (int i = 0; i < 8; ++i) {
        std::vector<double> v(4);
        for (auto& x : v) x = coord(rng);
        vectors.push_back(v);
    }
    std::vector<double> q = {0.3, -0.2, 0.9, 0.1};
    auto base_index = toy_index(vectors);
    auto base_hits = query(base_index, q, 8);
    for (double scale : {3.0, 0.25}) {
        auto scaled = vectors;
        for (auto& v : scaled)
            for (auto& x : v) x *= scale;
        auto scaled_index = toy_index(scaled);
        auto hits = query(scaled_index, q, 8);
        for (size_t i = 0; i < hits.size(); ++i)
            EXPECT_EQ(hits[i].entry->symbol, base_hits[i].entry->symbol) << "scale " << scale;
    }
}

TEST(BuildIndex, FixtureModuleEntriesWithDocsAndSynthesis) {
    HashEmbedder embedder;
    auto module = testdata() / "fixture_repo/post/src/main/java/com/acme/config";
    auto index = build_index(module, embedder);
    ASSERT_EQ(index.entries.size(), 4u); // 1 field + 3 methods
    EXPECT_FALSE(index.empty_module);
    EXPECT_EQ(index.dimension, 256);

    const IndexEntry* field = nullptr;
    const IndexEntry* setter = nullptr;
    for (const auto& e : index.entries) {
        if (e.symbol == "injectHtml") field = &e;
        if (e.symbol == "setInjectHtmlEnabled") setter = &e;
    }
    ASSERT_NE(field, nullptr);
    ASSERT_NE(setter, nullptr);
    // undocumented field falls back to a synthesized name+signature description
    EXPECT_NE(field->doc.find("injectHtml"), std::string::npos);
    EXPECT_EQ(setter->doc, "Enables or disables HTML injection for the current run.");
    EXPECT_EQ(setter->import_path, "com.acme.config.SniffyConfig");
    EXPECT_EQ(setter->kind, "method");
}

TEST(BuildIndex, MissingPathIsAnError) {
    HashEmbedder embedder;
    EXPECT_THROW(build_index("/nonexistent/module/root", embedder), Error);
}

TEST(BuildIndex, PersistedIndexReloadsIdentically) {
    testsupport::TempDir tmp;
    HashEmbedder embedder;
    auto module = testdata() / "fixture_repo/post/src/main/java/com/acme/config";
    auto index = build_index(module, embedder);
    save_index(index, tmp.path() / "index.json");
    auto loaded = load_index(tmp.path() / "index.json");
    ASSERT_EQ(loaded.entries.size(), index.entries.size());
    for (size_t i = 0; i < index.entries.size(); ++i) {
        EXPECT_EQ(loaded.entries[i].symbol, index.entries[i].symbol);
        EXPECT_EQ(loaded.entries[i].vector, index.entries[i].vector);
    }
}

TEST(DiscoverModules, LeafPackagesWhenNoNestedPoms) {
    auto modules = discover_modules(testdata() / "fixture_repo/post");
    ASSERT_EQ(modules.size(), 2u);
    EXPECT_NE(modules[0].find("com/acme/config"), std::string::npos);
    EXPECT_NE(modules[1].find("com/acme/registry"), std::string::npos);
}

UpdateTask retrieval_task() {
    UpdateTask task;
    task.test_before = "public void testInjectHtml() { config.setInjectHtml(false); }";
    task.focal_after.source = "public void setInjectHtmlEnabled(boolean enabled) { }";
    return task;
}

TEST(ResolveSymbols, ExactNameMatchBypassesFilter) {
    StubGateway stub;
    // module selection happens once; no retrieval_query/filter calls expected
    stub.backend->handler = [&](const RenderedPrompt& prompt) -> std::string {
        if (prompt.template_id == "module_select")
            return "MODULE " +
                   (testdata() / "fixture_repo/post/src/main/java/com/acme/config").string();
        ADD_FAILURE() << "unexpected LLM call: " << prompt.template_id;
        return "";
    };
    Retriever retriever(testdata() / "fixture_repo/post", std::make_shared<HashEmbedder>());
    RetrievalBudget budget;
    auto result = retriever.resolve_symbols({"setInjectHtmlEnabled"}, retrieval_task(), budget,
                                            stub.gateway);
    ASSERT_EQ(result.resolved.size(), 1u);
    EXPECT_TRUE(result.unresolved.empty());
    EXPECT_EQ(result.resolved[0].first, "setInjectHtmlEnabled");
    EXPECT_EQ(result.resolved[0].second.import_path, "com.acme.config.SniffyConfig");
    EXPECT_NE(result.resolved[0].second.signature_or_definition.find("boolean"),
              std::string::npos);
}

TEST(ResolveSymbols, HallucinatedSymbolResolvedViaScriptedFilter) {
    StubGateway stub;
    auto module = (testdata() / "fixture_repo/post/src/main/java/com/acme/config").string();
    stub.backend->script("module_select", "MODULE " + module);
    stub.backend->script("retrieval_query",
                         "Enables or disables HTML injection for the current run.");
    stub.backend->handler = nullptr;
    // the filter must name the setter's candidate number; find it from the prompt
    std::string filter_reply;
    stub.backend->handler = [&](const RenderedPrompt& prompt) -> std::string {
        if (prompt.template_id == "module_select") return "MODULE " + module;
        if (prompt.template_id == "retrieval_query")
            return "Enables or disables HTML injection for the current run.";
        if (prompt.template_id == "retrieval_filter") {
            for (const auto& line : split_lines(prompt.text)) {
                if (contains(line, "setInjectHtmlEnabled")) {
                    return "ACCEPT " + std::string(1, trim(line)[0]);
                }
            }
            return "NONE";
        }
        return "";
    };
    Retriever retriever(testdata() / "fixture_repo/post", std::make_shared<HashEmbedder>());
    RetrievalBudget budget;
    auto result =
        retriever.resolve_symbols({"setInjectHtml"}, retrieval_task(), budget, stub.gateway);
    ASSERT_EQ(result.resolved.size(), 1u);
    EXPECT_EQ(result.resolved[0].first, "setInjectHtml"); // queried name
    EXPECT_EQ(result.resolved[0].second.name, "setInjectHtmlEnabled"); // neighbor
}

TEST(ResolveSymbols, AbsentSymbolExhaustsBudgetInThreeIterations) {
    StubGateway stub;
    int module_selects = 0, queries = 0;
    auto config_module =
        (testdata() / "fixture_repo/post/src/main/java/com/acme/config").string();
    auto registry_module =
        (testdata() / "fixture_repo/post/src/main/java/com/acme/registry").string();
    stub.backend->handler = [&](const RenderedPrompt& prompt) -> std::string {
        if (prompt.template_id == "module_select") {
            ++module_selects;
            return module_selects == 1 ? "MODULE " + config_module
                                       : "MODULE " + registry_module;
        }
        if (prompt.template_id == "retrieval_query") {
            ++queries;
            return "completely unrelated concept";
        }
        if (prompt.template_id == "retrieval_filter") return "NONE";
        return "";
    };
    Retriever retriever(testdata() / "fixture_repo/post", std::make_shared<HashEmbedder>());
    RetrievalBudget budget; // max 3 iterations
    auto result =
        retriever.resolve_symbols({"ghostMethod"}, retrieval_task(), budget, stub.gateway);
    EXPECT_TRUE(result.resolved.empty());
    ASSERT_EQ(result.unresolved.size(), 1u);
    EXPECT_EQ(result.unresolved[0], "ghostMethod");
    EXPECT_EQ(queries, 3); // one per iteration, exactly 3 iterations
    EXPECT_LE(static_cast<int>(budget.embedded_modules.size()), 2);
}

TEST(ResolveSymbols, PartitionIsExactOverMixedInput) {
    StubGateway stub;
    auto module = (testdata() / "fixture_repo/post/src/main/java/com/acme/config").string();
    stub.backend->handler = [&](const RenderedPrompt& prompt) -> std::string {
        if (prompt.template_id == "module_select") return "MODULE " + module;
        if (prompt.template_id == "retrieval_query") return "no such thing";
        if (prompt.template_id == "retrieval_filter") return "NONE";
        return "";
    };
    Retriever retriever(testdata() / "fixture_repo/post", std::make_shared<HashEmbedder>());
    RetrievalBudget budget;
    std::vector<std::string> symbols = {"isInjectHtml", "ghostA", "loadSniffyConfiguration",
                                        "ghostB"};
    auto result = retriever.resolve_symbols(symbols, retrieval_task(), budget, stub.gateway);
    std::set<std::string> covered;
    for (const auto& [queried, resolved] : result.resolved) covered.insert(queried);
    for (const auto& u : result.unresolved) {
        EXPECT_FALSE(covered.count(u)) << "symbol in both partitions: " << u;
        covered.insert(u);
    }
    std::set<std::string> input(symbols.begin(), symbols.end());
    EXPECT_EQ(covered, input);
    EXPECT_EQ(result.resolved.size(), 2u);
    EXPECT_EQ(result.unresolved.size(), 2u);
}

} // namespace
