#pragma once

// Desk-scale dataset machinery: focal-method identification (invocation +
// mirrored path + name similarity) and the three-round outdated-test
// detection protocol with cause classification.

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "testmend/coordinator.hpp"
#include "testmend/java_source.hpp"
#include "testmend/types.hpp"

namespace testmend {

enum class OutdatedCause { compile_error, test_failure, coverage_degradation, mutation_degradation };

inline std::string to_string(OutdatedCause c) {
    switch (c) {
        case OutdatedCause::compile_error: return "compile_error";
        case OutdatedCause::test_failure: return "test_failure";
        case OutdatedCause::coverage_degradation: return "coverage_degradation";
        case OutdatedCause::mutation_degradation: return "mutation_degradation";
    }
    return "compile_error";
}

struct OutdatedVerdict {
    bool is_outdated = false;
    std::optional<OutdatedCause> cause; // present iff is_outdated
    std::vector<ExecutionOutcome> round_outcomes; // up to three rounds, in order
    std::optional<CoverageFacts> baseline_coverage;
    std::optional<MutationFacts> baseline_mutation;
};

namespace detail {

// Dice-normalized longest common subsequence over lowercased names.
inline double name_similarity(const std::string& a, const std::string& b) {
    std::string la = a, lb = b;
    std::transform(la.begin(), la.end(), la.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    std::transform(lb.begin(), lb.end(), lb.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    size_t n = la.size(), m = lb.size();
    if (n == 0 || m == 0) return 0.0;
    std::vector<std::vector<int>> dp(n + 1, std::vector<int>(m + 1, 0));
    for (size_t i = 1; i <= n; ++i)
        for (size_t j = 1; j <= m; ++j)
            dp[i][j] = la[i - 1] == lb[j - 1] ? dp[i - 1][j - 1] + 1
                                              : std::max(dp[i - 1][j], dp[i][j - 1]);
    return 2.0 * dp[n][m] / static_cast<double>(n + m);
}

// Mirrors the test path onto the production tree: the "test" path segment
// becomes "main" and the Test affix is dropped from the class name.
inline std::string production_path_for(const std::string& test_path) {
    std::vector<std::string> segments;
    size_t pos = 0;
    while (pos <= test_path.size()) {
        size_t slash = test_path.find('/', pos);
        if (slash == std::string::npos) {
            segments.push_back(test_path.substr(pos));
            break;
        }
        segments.push_back(test_path.substr(pos, slash - pos));
        pos = slash + 1;
    }
    for (auto& segment : segments) {
        if (segment == "test") {
            segment = "main";
            break;
        }
    }
    std::string& filename = segments.back();
    std::string stem = filename;
    if (stem.size() > 5 && stem.substr(stem.size() - 5) == ".java")
        stem = stem.substr(0, stem.size() - 5);
    if (stem.size() > 4 && stem.substr(stem.size() - 4) == "Test")
        stem = stem.substr(0, stem.size() - 4);
    else if (stem.size() > 4 && stem.substr(0, 4) == "Test")
        stem = stem.substr(4);
    filename = stem + ".java";
    std::string out;
    for (size_t i = 0; i < segments.size(); ++i) {
        out += segments[i];
        if (i + 1 < segments.size()) out += '/';
    }
    return out;
}

} // namespace detail

// Production methods directly invoked by the test whose file mirrors the test
// path, ranked by method-name similarity (descending, ties by declaration
// order). An empty result means no candidate, not an error.
inline std::vector<MethodRef> identify_focal_method(const MethodRef& test_ref,
                                                    const std::filesystem::path& repo_root) {
    auto test_path = repo_root / test_ref.file_path;
    if (!std::filesystem::exists(test_path)) return {};
    std::string test_src = read_file(test_path);

    std::string method_source = test_src;
    if (auto member = java::find_method(test_src, test_ref.method_name)) {
        auto lines = split_lines(test_src);
        std::string body;
        for (int l = member->line_start; l <= member->line_end && l <= (int)lines.size(); ++l)
            body += lines[static_cast<size_t>(l - 1)] + "\n";
        method_source = body;
    }
    auto calls = java::extract_call_names(method_source);
    if (calls.empty()) return {};

    std::string production_rel = detail::production_path_for(test_ref.file_path);
    auto production_path = repo_root / production_rel;
    if (!std::filesystem::exists(production_path)) return {};
    std::string production_src = read_file(production_path);
    std::string pkg = java::package_of(production_src);
    std::string cls = java::top_level_class_name(production_src);
    std::string fq = pkg.empty() ? cls : pkg + "." + cls;

    struct Candidate {
        MethodRef ref;
        double similarity;
        size_t order;
    };
    std::vector<Candidate> candidates;
    size_t order = 0;
    for (const auto& member : java::extract_members(production_src)) {
        if (member.kind != "method") continue;
        if (std::find(calls.begin(), calls.end(), member.name) == calls.end()) continue;
        MethodRef ref;
        ref.file_path = production_rel;
        ref.fully_qualified_class = fq;
        ref.method_name = member.name;
        ref.signature = member.param_types;
        ref.line_start = member.line_start;
        ref.line_end = member.line_end;
        candidates.push_back(
            {std::move(ref), detail::name_similarity(test_ref.method_name, member.name), order++});
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.order < b.order;
    });

    std::vector<MethodRef> ranked;
    for (auto& c : candidates) ranked.push_back(std::move(c.ref));
    return ranked;
}

// Three rounds: pre-test on pre-code (must pass, collecting baselines),
// pre-test on post-code, post-test on post-code (must pass). Outdated iff
// round 2 fails or degrades focal coverage/mutation; the cause takes the
// highest priority among compile_error > test_failure > coverage_degradation
// > mutation_degradation. Degradation is strict < on 2-decimal percentages.
inline OutdatedVerdict detect_outdated(Workspace& pre_ws, Workspace& post_ws,
                                       const MethodRef& test_ref, const MethodRef& focal,
                                       BuildAdapter& adapter) {
    OutdatedVerdict verdict;

    auto request_for = [&](const Workspace& ws) {
        RunRequest request;
        request.workspace = ws;
        std::string src = read_file(ws.root / test_ref.file_path);
        std::string pkg = java::package_of(src);
        std::string cls = java::top_level_class_name(src);
        request.test_class = pkg.empty() ? cls : pkg + "." + cls;
        request.test_method = test_ref.method_name;
        request.focal = focal;
        return request;
    };

    // round 1: pre test on pre code
    ExecutionOutcome r1 = run_phases(adapter, request_for(pre_ws));
    verdict.round_outcomes.push_back(r1);
    if (r1.phase_reached != Phase::passed) return verdict; // sample rejected
    verdict.baseline_coverage = r1.coverage;
    verdict.baseline_mutation = r1.mutation;

    // round 2: pre test applied onto post code
    std::string pre_src = read_file(pre_ws.root / test_ref.file_path);
    auto pre_method = java::find_method(pre_src, test_ref.method_name);
    if (!pre_method)
        throw Error("test method not found in pre workspace: " + test_ref.method_name);
    auto pre_lines = split_lines(pre_src);
    std::string pre_method_source;
    for (int l = pre_method->line_start; l <= pre_method->line_end; ++l)
        pre_method_source += pre_lines[static_cast<size_t>(l - 1)] +
                             (l < pre_method->line_end ? "\n" : "");
    UpdateTask carrier;
    carrier.test_before = pre_method_source;
    carrier.test_class_path = test_ref.file_path;
    CandidateUpdate pre_candidate{pre_method_source, {}, 1};
    adapter.apply_test_code(post_ws, carrier, pre_candidate);
    ExecutionOutcome r2 = run_phases(adapter, request_for(post_ws));
    verdict.round_outcomes.push_back(r2);
    adapter.reset(post_ws);

    // round 3: post test on post code
    ExecutionOutcome r3 = run_phases(adapter, request_for(post_ws));
    verdict.round_outcomes.push_back(r3);
    if (r3.phase_reached != Phase::passed) return verdict; // sample rejected

    if (r2.phase_reached == Phase::compile_failed) {
        verdict.is_outdated = true;
        verdict.cause = OutdatedCause::compile_error;
        return verdict;
    }
    if (r2.phase_reached == Phase::tests_failed) {
        verdict.is_outdated = true;
        verdict.cause = OutdatedCause::test_failure;
        return verdict;
    }
    double base_line = round2(verdict.baseline_coverage->line_coverage_pct);
    double base_branch = round2(verdict.baseline_coverage->branch_coverage_pct);
    double base_mut = round2(verdict.baseline_mutation->mutation_score_pct);
    double r2_line = round2(r2.coverage->line_coverage_pct);
    double r2_branch = round2(r2.coverage->branch_coverage_pct);
    double r2_mut = round2(r2.mutation->mutation_score_pct);
    if (r2_line < base_line || r2_branch < base_branch) {
        verdict.is_outdated = true;
        verdict.cause = OutdatedCause::coverage_degradation;
    } else if (r2_mut < base_mut) {
        verdict.is_outdated = true;
        verdict.cause = OutdatedCause::mutation_degradation;
    }
    return verdict;
}

} // namespace testmend
