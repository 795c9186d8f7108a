#include <gtest/gtest.h>

#include "support/paths.hpp"
#include "testmend/gateway.hpp"
#include "testmend/prompt.hpp"

using namespace testmend;
using testsupport::TempDir;

namespace {

TemplateCatalog tiny_catalog() {
    TemplateCatalog catalog;
    catalog.add({"test_update",
                 "Update this test:\n{{test_code}}\nInstructions:{{instructions}}\n", {}});
    catalog.add({"error_analyze", "Failures in:\n{{annotated_test}}\n", {}});
    return catalog;
}

TEST(Render, SubstitutesVerbatim) {
    auto catalog = tiny_catalog();
    auto prompt = render(catalog, "test_update",
                         {{"test_code", "public void t() {}"}, {"instructions", ""}});
    EXPECT_NE(prompt.text.find("public void t() {}"), std::string::npos);
    EXPECT_EQ(prompt.text.find("{{"), std::string::npos);
    EXPECT_EQ(prompt.template_id, "test_update");
}

TEST(Render, MissingPlaceholderNamesTheKey) {
    auto catalog = tiny_catalog();
    try {
        render(catalog, "test_update", {{"test_code", "x"}});
        FAIL() << "expected missing-placeholder error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("instructions"), std::string::npos);
    }
}

TEST(Render, PureSameInputsSameBytes) {
    auto catalog = tiny_catalog();
    std::map<std::string, std::string> bindings = {{"test_code", "abc"}, {"instructions", "i"}};
    auto a = render(catalog, "test_update", bindings);
    auto b = render(catalog, "test_update", bindings);
    EXPECT_EQ(a.text, b.text);
    EXPECT_EQ(a.binding_digest, b.binding_digest);
}

TEST(Render, ExtraBindingsIgnored) {
    auto catalog = tiny_catalog();
    auto prompt = render(catalog, "error_analyze",
                         {{"annotated_test", "code"}, {"unused", "zzz"}});
    EXPECT_EQ(prompt.text.find("zzz"), std::string::npos);
}

// Golden rendering of the shipped error_analyze template with an annotated test.
TEST(Render, ShippedTemplatesRenderCleanly) {
    auto catalog = load_templates(testsupport::templates_dir());
    std::string annotated =
        "public void t() {\n    // ERROR: cannot find method: setInjectHtml()\n"
        "    config.setInjectHtml(false);\n}";
    auto prompt = render(catalog, "error_analyze",
                         {{"annotated_test", annotated}, {"failures", "compile_error"}});
    EXPECT_NE(prompt.text.find("// ERROR: cannot find method: setInjectHtml()"),
              std::string::npos);
    EXPECT_EQ(prompt.text.find("{{"), std::string::npos);
}

TEST(Replay, AnswersByDigestThenWildcard) {
    ReplayBackend backend;
    backend.add({"test_update", "digest-a", "exact"});
    backend.add({"test_update", "*", "fallback"});
    EXPECT_EQ(backend.complete({"test_update", "digest-a", "irrelevant"}), "exact");
    EXPECT_EQ(backend.complete({"test_update", "digest-a", "irrelevant"}), "fallback");
}

TEST(Replay, UnknownPromptMisses) {
    ReplayBackend backend;
    backend.add({"test_update", "digest-a", "one"});
    EXPECT_THROW(backend.complete({"error_analyze", "digest-a", "x"}), ReplayMiss);
}

TEST(Replay, DuplicateDigestsServeInOrderThenMiss) {
    ReplayBackend backend;
    backend.add({"test_update", "d", "first"});
    backend.add({"test_update", "d", "second"});
    RenderedPrompt prompt{"test_update", "d", "p"};
    EXPECT_EQ(backend.complete(prompt), "first");
    EXPECT_EQ(backend.complete(prompt), "second");
    EXPECT_THROW(backend.complete(prompt), ReplayMiss);
}

TEST(Transcript, LoadsThreeEntries) {
    TempDir tmp;
    auto path = tmp.path() / "transcript.jsonl";
    write_file(path,
               R"({"template_id":"test_update","binding_digest":"a","response_text":"r1"})"
               "\n"
               R"({"template_id":"test_update","binding_digest":"b","response_text":"r2"})"
               "\n"
               R"({"template_id":"error_analyze","binding_digest":"c","response_text":"r3"})"
               "\n");
    auto backend = load_transcript(path);
    EXPECT_EQ(backend->complete({"test_update", "a", ""}), "r1");
    EXPECT_EQ(backend->complete({"test_update", "b", ""}), "r2");
    EXPECT_EQ(backend->complete({"error_analyze", "c", ""}), "r3");
}

TEST(Transcript, EmptyFileAlwaysMisses) {
    TempDir tmp;
    auto path = tmp.path() / "empty.jsonl";
    write_file(path, "");
    auto backend = load_transcript(path);
    EXPECT_THROW(backend->complete({"test_update", "a", ""}), ReplayMiss);
}

TEST(Transcript, MalformedLineReportsLineNumber) {
    TempDir tmp;
    auto path = tmp.path() / "bad.jsonl";
    write_file(path,
               R"({"template_id":"t","binding_digest":"a","response_text":"ok"})"
               "\nnot json\n");
    try {
        load_transcript(path);
        FAIL() << "expected malformed-transcript error";
    } catch (const GatewayError& e) {
        EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos);
    }
}

TEST(Transcript, StrictBytesModeMatchesPromptBytes) {
    ReplayBackend backend(/*strict_bytes=*/true);
    std::string prompt_text = "exact prompt bytes";
    backend.add({"test_update", to_hex(fnv1a64(prompt_text)), "hit"});
    EXPECT_EQ(backend.complete({"test_update", "ignored-digest", prompt_text}), "hit");
    EXPECT_THROW(backend.complete({"test_update", "ignored-digest", "other bytes"}), ReplayMiss);
}

TEST(HttpBackend, RetriesTransientFailuresThenSucceeds) {
    int attempts = 0;
    HttpPostFn post = [&](const std::string&, const std::string&,
                          const std::string&) -> std::pair<int, std::string> {
        ++attempts;
        if (attempts <= 2) return {500, "server error"};
        return {200, R"({"choices":[{"message":{"content":"OK"}}]})"};
    };
    ChatConfig config;
    config.retry_attempts = 3;
    config.retry_backoff_ms = 1;
    HttpBackend backend(config, post);
    EXPECT_EQ(backend.complete({"test_update", "d", "prompt"}), "OK");
    EXPECT_EQ(attempts, 3);
}

TEST(HttpBackend, ExhaustsRetriesOnPersistentTransportFailure) {
    int attempts = 0;
    HttpPostFn post = [&](const std::string&, const std::string&,
                          const std::string&) -> std::pair<int, std::string> {
        ++attempts;
        return {0, ""};
    };
    ChatConfig config;
    config.retry_attempts = 3;
    config.retry_backoff_ms = 1;
    HttpBackend backend(config, post);
    EXPECT_THROW(backend.complete({"t", "d", "p"}), TransportExhausted);
    EXPECT_EQ(attempts, 3);
}

TEST(HttpBackend, ProviderRejectionIsTerminal) {
    int attempts = 0;
    HttpPostFn post = [&](const std::string&, const std::string&,
                          const std::string&) -> std::pair<int, std::string> {
        ++attempts;
        return {401, "bad key"};
    };
    ChatConfig config;
    config.retry_backoff_ms = 1;
    HttpBackend backend(config, post);
    EXPECT_THROW(backend.complete({"t", "d", "p"}), ProviderRejected);
    EXPECT_EQ(attempts, 1);
}

} // namespace
