#include <gtest/gtest.h>

#include <random>

#include "support/paths.hpp"
#include "testmend/java_source.hpp"
#include "testmend/report_parsing.hpp"

using namespace testmend;
using testsupport::testdata;

namespace {

MethodRef pricing_focal() {
    return {"src/main/java/com/acme/calc/Pricing.java", "com.acme.calc.Pricing", "discount",
            {"double"}, 10, 16};
}

TEST(CoverageParse, HandCountedSampleFixture) {
    auto facts = parse_coverage_report(read_file(testdata() / "jacoco/jacoco_sample.xml"),
                                       pricing_focal());
    // 4 covered, 1 missed -> 80.00; one 2-way branch half taken -> (1,2)
    EXPECT_NEAR(facts.line_coverage_pct, 80.00, 0.01);
    ASSERT_EQ(facts.branch_status.size(), 1u);
    EXPECT_EQ(facts.branch_status.at(12).covered, 1);
    EXPECT_EQ(facts.branch_status.at(12).total, 2);
    EXPECT_NEAR(facts.branch_coverage_pct, 50.00, 0.01);
    EXPECT_EQ(facts.line_status.at(10), LineStatus::no_instruction);
    EXPECT_EQ(facts.line_status.at(11), LineStatus::covered);
    EXPECT_EQ(facts.line_status.at(13), LineStatus::not_covered);
    EXPECT_EQ(facts.line_status.at(16), LineStatus::no_instruction);
    EXPECT_NEAR(facts.recompute_line_pct(), facts.line_coverage_pct, 0.01);
    EXPECT_NEAR(facts.recompute_branch_pct(), facts.branch_coverage_pct, 0.01);
}

TEST(CoverageParse, SpanWithoutExecutableLinesIsVacuouslyFull) {
    MethodRef focal = pricing_focal();
    focal.line_start = 2;
    focal.line_end = 5; // javadoc area: nothing reported there
    auto facts =
        parse_coverage_report(read_file(testdata() / "jacoco/jacoco_sample.xml"), focal);
    for (const auto& [line, status] : facts.line_status)
        EXPECT_EQ(status, LineStatus::no_instruction);
    EXPECT_EQ(facts.line_coverage_pct, 100.0);
}

TEST(CoverageParse, MissingFocalClassIsAnError) {
    MethodRef focal{"src/main/java/com/other/Gone.java", "com.other.Gone", "m", {}, 1, 2};
    EXPECT_THROW(
        parse_coverage_report(read_file(testdata() / "jacoco/jacoco_sample.xml"), focal),
        ParseError);
}

TEST(CoverageParse, MalformedXml) {
    EXPECT_THROW(parse_coverage_report("<report><package", pricing_focal()), ParseError);
}

TEST(MutationParse, HandCountedSampleFixture) {
    auto facts = parse_mutation_report(read_file(testdata() / "pit/pit_sample.xml"),
                                       pricing_focal());
    // 2 KILLED + 1 TIMED_OUT (killed) + 1 SURVIVED + 1 NO_COVERAGE; the
    // other-class entry is ignored
    ASSERT_EQ(facts.mutants.size(), 5u);
    EXPECT_NEAR(facts.mutation_score_pct, 60.00, 0.01);
    EXPECT_EQ(facts.mutants[2].status, MutantStatus::killed); // TIMED_OUT
    EXPECT_EQ(facts.mutants[3].status, MutantStatus::survived);
    EXPECT_EQ(facts.mutants[4].status, MutantStatus::no_coverage);
    EXPECT_EQ(facts.mutants[0].op, "MathMutator");
    EXPECT_NEAR(facts.recompute_score_pct(), facts.mutation_score_pct, 0.01);
}

TEST(MutationParse, ZeroMutantsForFocalScoresFull) {
    MethodRef focal{"X.java", "com.acme.calc.Absent", "nothing", {}, 1, 1};
    auto facts =
        parse_mutation_report(read_file(testdata() / "pit/pit_sample.xml"), focal);
    EXPECT_TRUE(facts.mutants.empty());
    EXPECT_EQ(facts.mutation_score_pct, 100.0);
}

TEST(MutationParse, UnknownStatusTokenNamed) {
    try {
        parse_mutation_report(read_file(testdata() / "pit/pit_unknown_status.xml"),
                              pricing_focal());
        FAIL() << "expected parse error";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("MEMORY_ERROR"), std::string::npos);
    }
}

TEST(MutationParse, ParameterCountFiltersOverloads) {
    MethodRef focal = pricing_focal();
    focal.signature = {"double", "int"}; // 2 params: no (D)D entry matches
    auto facts =
        parse_mutation_report(read_file(testdata() / "pit/pit_sample.xml"), focal);
    EXPECT_TRUE(facts.mutants.empty());
}

TEST(BuildLog, CompileErrorWithSymbolFromFollowupLine) {
    auto diagnostics = parse_build_log(read_file(testdata() / "logs/compile_error.txt"));
    ASSERT_EQ(diagnostics.size(), 1u);
    EXPECT_EQ(diagnostics[0].kind, DiagnosticKind::compile_error);
    ASSERT_TRUE(diagnostics[0].symbol.has_value());
    EXPECT_EQ(*diagnostics[0].symbol, "setInjectHtml");
    ASSERT_TRUE(diagnostics[0].line.has_value());
    EXPECT_EQ(*diagnostics[0].line, 13);
    EXPECT_NE(diagnostics[0].message.find("cannot find symbol"), std::string::npos);
}

TEST(BuildLog, InlineCannotFindMethodShape) {
    auto diagnostics = parse_build_log(
        "[ERROR] /ws/src/test/java/A.java:[7,3] cannot find method: setInjectHtml()\n");
    ASSERT_EQ(diagnostics.size(), 1u);
    EXPECT_EQ(diagnostics[0].symbol.value_or(""), "setInjectHtml");
}

TEST(BuildLog, AssertionFailureCarriesExpectedAndActual) {
    auto diagnostics = parse_build_log(read_file(testdata() / "logs/assertion_failure.txt"));
    ASSERT_GE(diagnostics.size(), 1u);
    const Diagnostic* assertion = nullptr;
    for (const auto& d : diagnostics)
        if (d.kind == DiagnosticKind::assertion_failure) assertion = &d;
    ASSERT_NE(assertion, nullptr);
    // JUnit bracket notation marks the differing spans; text is kept verbatim
    EXPECT_NE(assertion->expected->find("www.wikidata.org/ontology#propertyTypeString"),
              std::string::npos);
    EXPECT_NE(assertion->actual->find("wikiba.se/ontology#String"), std::string::npos);
    EXPECT_EQ(assertion->line.value_or(0), 13); // from the test stack frame
}

TEST(BuildLog, RuntimeFailure) {
    auto diagnostics = parse_build_log(read_file(testdata() / "logs/runtime_failure.txt"));
    ASSERT_GE(diagnostics.size(), 1u);
    EXPECT_EQ(diagnostics[0].kind, DiagnosticKind::runtime_failure);
    EXPECT_NE(diagnostics[0].message.find("NullPointerException"), std::string::npos);
}

TEST(BuildLog, CleanLogYieldsNothing) {
    EXPECT_TRUE(parse_build_log(read_file(testdata() / "logs/pass.txt")).empty());
}

// Inserting boilerplate between diagnostic blocks changes nothing.
TEST(BuildLog, IdempotentUnderBoilerplateInsertion) {
    std::string log = read_file(testdata() / "logs/compile_error.txt") +
                      read_file(testdata() / "logs/assertion_failure.txt");
    auto base = parse_build_log(log);

    std::string padded;
    for (const auto& line : split_lines(log)) {
        padded += line + "\n";
        padded += "[INFO] Downloading from central: https://repo.example/x.pom\n";
        padded += "[INFO] ------------------------------------------------------------\n";
    }
    auto with_noise = parse_build_log(padded);
    ASSERT_EQ(with_noise.size(), base.size());
    for (size_t i = 0; i < base.size(); ++i) {
        EXPECT_EQ(with_noise[i].kind, base[i].kind);
        EXPECT_EQ(with_noise[i].symbol, base[i].symbol);
        EXPECT_EQ(with_noise[i].expected, base[i].expected);
        EXPECT_EQ(with_noise[i].actual, base[i].actual);
    }
}

TEST(DiffParse, SingleFileOneHunk) {
    auto hunks = parse_unified_diff(read_file(testdata() / "diffs/single.txt"));
    ASSERT_EQ(hunks.size(), 1u);
    EXPECT_EQ(hunks[0].index, 0);
    EXPECT_EQ(hunks[0].file_path, "src/main/java/com/acme/config/SniffyConfig.java");
    EXPECT_EQ(hunks[0].old_start, 10);
    EXPECT_EQ(hunks[0].old_count, 7);
    ASSERT_EQ(hunks[0].changed_lines().size(), 2u);
}

TEST(DiffParse, MultiFileThreeHunksIndexedInFileOrder) {
    auto hunks = parse_unified_diff(read_file(testdata() / "diffs/multi.txt"));
    ASSERT_EQ(hunks.size(), 3u);
    EXPECT_EQ(hunks[0].index, 0);
    EXPECT_EQ(hunks[1].index, 1);
    EXPECT_EQ(hunks[2].index, 2);
    EXPECT_EQ(hunks[2].file_path, "src/main/java/com/acme/registry/PropertyRegistry.java");
}

TEST(DiffParse, InconsistentCountsReportPosition) {
    try {
        parse_unified_diff(read_file(testdata() / "diffs/malformed.txt"));
        FAIL() << "expected malformed-header error";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line"), std::string::npos);
    }
}

// Re-rendering parsed hunks reproduces the hunk bodies byte-for-byte.
TEST(DiffParse, RoundTripIsByteExact) {
    for (const char* fixture : {"diffs/single.txt", "diffs/multi.txt"}) {
        auto hunks = parse_unified_diff(read_file(testdata() / fixture));
        auto reparsed = parse_unified_diff(render_unified_diff(hunks));
        ASSERT_EQ(reparsed.size(), hunks.size()) << fixture;
        for (size_t i = 0; i < hunks.size(); ++i) {
            EXPECT_EQ(reparsed[i].lines, hunks[i].lines) << fixture << " hunk " << i;
            EXPECT_EQ(reparsed[i].file_path, hunks[i].file_path);
            EXPECT_EQ(reparsed[i].old_start, hunks[i].old_start);
            EXPECT_EQ(reparsed[i].new_start, hunks[i].new_start);
        }
        // idempotence: render(parse(render(...))) is stable
        EXPECT_EQ(render_unified_diff(reparsed), render_unified_diff(hunks));
    }
}

TEST(JavaScan, ExtractsMembersWithJavadocAndSpans) {
    std::string src = read_file(testdata() /
                                "fixture_repo/post/src/main/java/com/acme/config/SniffyConfig.java");
    auto members = java::extract_members(src);
    ASSERT_EQ(members.size(), 4u); // field + 3 methods
    EXPECT_EQ(members[0].kind, "field");
    EXPECT_EQ(members[0].name, "injectHtml");
    EXPECT_EQ(members[1].name, "setInjectHtmlEnabled");
    EXPECT_EQ(members[1].line_start, 13);
    EXPECT_EQ(members[1].line_end, 19);
    ASSERT_EQ(members[1].param_types.size(), 1u);
    EXPECT_EQ(members[1].param_types[0], "boolean");
    EXPECT_NE(members[1].doc.find("Enables or disables HTML injection"), std::string::npos);
    EXPECT_EQ(java::package_of(src), "com.acme.config");
    EXPECT_EQ(java::top_level_class_name(src), "SniffyConfig");
}

TEST(JavaScan, SynthesizedDocForUndocumentedMember) {
    std::string src = "package p;\nclass C {\n    private int counter = 0;\n}\n";
    auto members = java::extract_members(src);
    ASSERT_EQ(members.size(), 1u);
    EXPECT_TRUE(members[0].doc.empty());
}

TEST(JavaScan, CallSiteExtractionIsReceiverAware) {
    std::string method =
        "public void testInjectHtml() {\n"
        "    SniffyConfig config = new SniffyConfig();\n"
        "    config.loadSniffyConfiguration();\n"
        "    config.setInjectHtml(false);\n"
        "    assertFalse(config.isInjectHtml());\n"
        "    if (true) { /* no call */ }\n"
        "}";
    auto calls = java::extract_call_names(method);
    EXPECT_EQ(std::count(calls.begin(), calls.end(), "SniffyConfig"), 0); // 'new' target
    EXPECT_EQ(std::count(calls.begin(), calls.end(), "testInjectHtml"), 0); // declaration
    EXPECT_EQ(std::count(calls.begin(), calls.end(), "if"), 0);
    EXPECT_EQ(std::count(calls.begin(), calls.end(), "setInjectHtml"), 1);
    EXPECT_EQ(std::count(calls.begin(), calls.end(), "isInjectHtml"), 1);
}

TEST(JavaScan, DescriptorParamCount) {
    EXPECT_EQ(java::descriptor_param_count("(Z)V"), 1);
    EXPECT_EQ(java::descriptor_param_count("()V"), 0);
    EXPECT_EQ(java::descriptor_param_count("(Ljava/lang/String;Ljava/lang/String;)Ljava/lang/String;"), 2);
    EXPECT_EQ(java::descriptor_param_count("([I[Ljava/lang/String;D)Z"), 3);
}

TEST(JavaScan, BraceBalanceIgnoresStringsAndComments) {
    EXPECT_TRUE(java::brace_balanced("void f() { String s = \"}{\"; /* } */ }"));
    EXPECT_FALSE(java::brace_balanced("void f() { if (x) {"));
}

TEST(JavaScan, ImportInsertionDeduplicates) {
    std::string file = "package p;\n\nimport java.util.List;\n\npublic class C {\n}\n";
    std::string out = java::insert_imports(
        file, {"import java.util.List;", "java.util.Map", "import java.util.Map;"});
    // List already present; Map added once
    EXPECT_EQ(out.find("import java.util.Map;"), out.rfind("import java.util.Map;"));
    size_t count = 0, pos = 0;
    while ((pos = out.find("import java.util.List;", pos)) != std::string::npos) {
        ++count;
        pos += 5;
    }
    EXPECT_EQ(count, 1u);
}

} // namespace
