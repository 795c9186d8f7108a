#pragma once

// Session orchestration: extraction of generated code, candidate evaluation,
// best-candidate recording, termination, agent selection and instruction
// merging, plus the end-to-end update loop.

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "testmend/build_adapter.hpp"
#include "testmend/coverage_agent.hpp"
#include "testmend/error_agent.hpp"
#include "testmend/gateway.hpp"
#include "testmend/input_agent.hpp"
#include "testmend/mutation_agent.hpp"
#include "testmend/report_parsing.hpp"
#include "testmend/retriever.hpp"
#include "testmend/types.hpp"
#include "testmend/update_agent.hpp"

namespace testmend {

struct SessionConfig {
    int max_iterations = 4;
    double line_threshold = 100.0;
    double branch_threshold = 100.0;
    double mutation_threshold = 100.0;
    int max_retrieval_iterations = 3;
    int top_k_hunks = 10;
    RankWeights rank_weights;
};

class ExtractionError : public Error {
public:
    using Error::Error;
};

namespace detail {

struct FencedBlock {
    std::string tag;
    std::string body;
};

inline std::vector<FencedBlock> parse_fences(const std::string& text) {
    std::vector<FencedBlock> blocks;
    auto lines = split_lines(text);
    std::optional<FencedBlock> open;
    std::vector<std::string> body;
    for (const auto& line : lines) {
        std::string t = trim(line);
        if (starts_with(t, "```")) {
            if (open) {
                open->body = join_lines(body);
                blocks.push_back(*open);
                open.reset();
                body.clear();
            } else {
                open = FencedBlock{trim(t.substr(3)), ""};
            }
        } else if (open) {
            body.push_back(line);
        }
    }
    return blocks;
}

// Largest brace-balanced region when the reply has no fences: from the start
// of the line holding a top-level '{' back through its signature lines.
inline std::string largest_balanced_block(const std::string& text) {
    std::string masked = java::mask_source(text);
    std::string best;
    size_t i = 0;
    while (i < masked.size()) {
        if (masked[i] != '{') {
            ++i;
            continue;
        }
        int depth = 0;
        size_t j = i;
        for (; j < masked.size(); ++j) {
            if (masked[j] == '{') ++depth;
            if (masked[j] == '}') {
                --depth;
                if (depth == 0) break;
            }
        }
        if (j >= masked.size()) break; // unbalanced tail
        // pull in the signature: walk back to the previous blank line
        size_t start = text.rfind('\n', i);
        start = start == std::string::npos ? 0 : start + 1;
        while (start > 0) {
            size_t prev_end = start - 1;
            size_t prev_start = prev_end == 0 ? 0 : text.rfind('\n', prev_end - 1);
            prev_start = prev_start == std::string::npos ? 0 : prev_start + 1;
            std::string prev = trim(text.substr(prev_start, prev_end - prev_start));
            if (prev.empty() || prev.back() == '.' || prev.back() == ':') break;
            start = prev_start;
        }
        std::string block = text.substr(start, j + 1 - start);
        if (block.size() > best.size()) best = block;
        i = j + 1;
    }
    return best;
}

} // namespace detail

// Extracts the "test" and "imports" fenced blocks from raw LLM output,
// falling back to the largest brace-balanced block when fences are absent.
inline CandidateUpdate extract_test_code(const std::string& raw) {
    CandidateUpdate candidate;
    auto blocks = detail::parse_fences(raw);

    const detail::FencedBlock* test_block = nullptr;
    const detail::FencedBlock* imports_block = nullptr;
    const detail::FencedBlock* untagged = nullptr;
    for (const auto& b : blocks) {
        if (b.tag == "test" && !test_block) test_block = &b;
        else if (b.tag == "imports" && !imports_block) imports_block = &b;
        else if (!untagged || b.body.size() > untagged->body.size()) untagged = &b;
    }

    if (test_block) candidate.test_code = test_block->body;
    else if (untagged && java::brace_balanced(untagged->body)) candidate.test_code = untagged->body;
    else candidate.test_code = detail::largest_balanced_block(raw);

    if (trim(candidate.test_code).empty())
        throw ExtractionError("no extractable code block in reply");
    if (!java::brace_balanced(candidate.test_code))
        throw ExtractionError("extracted block is not brace-balanced");

    if (imports_block) {
        for (const auto& line : split_lines(imports_block->body)) {
            std::string t = trim(line);
            if (!t.empty()) candidate.imports.push_back(t);
        }
    }
    return candidate;
}

// Quality ordering for record_best: execution phase dominates, then mutation
// score (oracle strength first), then branch and line coverage; among equals
// the earlier iteration wins.
inline std::tuple<int, double, double, double, int> quality_key(
    const CandidateUpdate& candidate, const ExecutionOutcome& outcome) {
    double mut = outcome.mutation ? outcome.mutation->mutation_score_pct : -1.0;
    double branch = outcome.coverage ? outcome.coverage->branch_coverage_pct : -1.0;
    double line = outcome.coverage ? outcome.coverage->line_coverage_pct : -1.0;
    return {phase_rank(outcome.phase_reached), mut, branch, line, -candidate.iteration};
}

using Scored = std::pair<CandidateUpdate, ExecutionOutcome>;

inline Scored record_best(const std::optional<Scored>& current, const Scored& next) {
    if (!current) return next;
    return quality_key(next.first, next.second) >
                   quality_key(current->first, current->second)
               ? next
               : *current;
}

enum class DoneState { done_thresholds, done_budget, keep_going };

inline DoneState has_done(const ExecutionOutcome& outcome, const SessionConfig& config,
                          int iteration) {
    if (outcome.phase_reached == Phase::passed && outcome.coverage && outcome.mutation &&
        round2(outcome.coverage->line_coverage_pct) >= config.line_threshold &&
        round2(outcome.coverage->branch_coverage_pct) >= config.branch_threshold &&
        round2(outcome.mutation->mutation_score_pct) >= config.mutation_threshold)
        return DoneState::done_thresholds;
    if (iteration >= config.max_iterations) return DoneState::done_budget;
    return DoneState::keep_going;
}

enum class AgentKind { error_analysis, coverage_analysis, mutation_analysis };

inline std::vector<AgentKind> choose_agents(const ExecutionOutcome& outcome,
                                            const SessionConfig& config) {
    std::vector<AgentKind> agents;
    if (outcome.phase_reached != Phase::passed) {
        agents.push_back(AgentKind::error_analysis);
        return agents;
    }
    if (outcome.coverage &&
        (round2(outcome.coverage->line_coverage_pct) < config.line_threshold ||
         round2(outcome.coverage->branch_coverage_pct) < config.branch_threshold))
        agents.push_back(AgentKind::coverage_analysis);
    if (outcome.mutation && round2(outcome.mutation->mutation_score_pct) < config.mutation_threshold)
        agents.push_back(AgentKind::mutation_analysis);
    return agents;
}

struct AgentOutput {
    AgentKind kind = AgentKind::error_analysis;
    std::vector<std::string> instructions;
    std::vector<ResolvedSymbol> retrieved;
};

// Concatenates each agent's list under its fixed key, dropping byte-identical
// duplicates, and attaches retrieved context.
inline InstructionBundle merge_instructions(const std::vector<AgentOutput>& outputs) {
    InstructionBundle bundle;
    auto append_unique = [](std::vector<std::string>& list, const std::vector<std::string>& items) {
        for (const auto& item : items)
            if (std::find(list.begin(), list.end(), item) == list.end()) list.push_back(item);
    };
    for (const auto& output : outputs) {
        switch (output.kind) {
            case AgentKind::error_analysis:
                append_unique(bundle.error_instructions, output.instructions);
                break;
            case AgentKind::coverage_analysis:
                append_unique(bundle.coverage_instructions, output.instructions);
                break;
            case AgentKind::mutation_analysis:
                append_unique(bundle.mutation_instructions, output.instructions);
                break;
        }
        for (const auto& symbol : output.retrieved)
            if (std::find(bundle.retrieved_context.begin(), bundle.retrieved_context.end(),
                          symbol) == bundle.retrieved_context.end())
                bundle.retrieved_context.push_back(symbol);
    }
    return bundle;
}

// Fully qualified test class name, preferring the file's package declaration
// when the workspace is on disk.
inline std::string fq_test_class(const UpdateTask& task, const Workspace& workspace) {
    auto path = workspace.root / task.test_class_path;
    std::string stem = std::filesystem::path(task.test_class_path).stem().string();
    if (std::filesystem::exists(path)) {
        std::string src = read_file(path);
        std::string pkg = java::package_of(src);
        std::string cls = java::top_level_class_name(src);
        if (cls.empty()) cls = stem;
        return pkg.empty() ? cls : pkg + "." + cls;
    }
    // derive from the path: src/test/java/com/acme/FooTest.java -> com.acme.FooTest
    std::string p = task.test_class_path;
    size_t marker = p.find("java/");
    if (marker != std::string::npos) p = p.substr(marker + 5);
    if (p.size() > 5 && p.substr(p.size() - 5) == ".java") p = p.substr(0, p.size() - 5);
    for (auto& c : p)
        if (c == '/') c = '.';
    return p;
}

// Walks compile -> tests -> coverage -> mutation for an already-prepared
// workspace, short-circuiting on the first failing phase. Coverage and
// mutation reports are parsed into facts for the focal method.
inline ExecutionOutcome run_phases(BuildAdapter& adapter, const RunRequest& request) {
    auto failure_outcome = [&](Phase phase, const RunResult& run, DiagnosticKind fallback_kind) {
        ExecutionOutcome outcome;
        outcome.phase_reached = phase;
        outcome.raw_log_ref = run.log_ref;
        outcome.diagnostics = parse_build_log(run.log);
        if (run.timed_out) {
            Diagnostic d;
            d.kind = DiagnosticKind::runtime_failure;
            d.message = "phase timeout";
            outcome.diagnostics.push_back(std::move(d));
        }
        if (outcome.diagnostics.empty()) {
            Diagnostic d;
            d.kind = fallback_kind;
            d.message = "phase failed";
            for (const auto& line : split_lines(run.log)) {
                if (!trim(line).empty()) {
                    d.message = trim(line);
                    break;
                }
            }
            outcome.diagnostics.push_back(std::move(d));
        }
        return outcome;
    };

    RunResult compile = adapter.run_compile(request);
    if (!compile.ok)
        return failure_outcome(Phase::compile_failed, compile, DiagnosticKind::compile_error);

    RunResult tests = adapter.run_tests(request);
    if (!tests.ok)
        return failure_outcome(Phase::tests_failed, tests, DiagnosticKind::runtime_failure);

    RunResult coverage = adapter.run_coverage(request);
    RunResult mutation = adapter.run_mutation(request);

    ExecutionOutcome outcome;
    outcome.phase_reached = Phase::passed;
    outcome.raw_log_ref = tests.log_ref;
    outcome.coverage = parse_coverage_report(read_file(coverage.report), request.focal);
    outcome.mutation = parse_mutation_report(read_file(mutation.report), request.focal);
    return outcome;
}

// Applies the candidate, then runs the phase pipeline.
inline ExecutionOutcome evaluate_candidate(const CandidateUpdate& candidate,
                                           const UpdateTask& task, BuildAdapter& adapter,
                                           Workspace& workspace,
                                           const PhaseTimeouts& timeouts = {}) {
    adapter.apply_test_code(workspace, task, candidate);

    RunRequest request;
    request.workspace = workspace;
    request.test_class = fq_test_class(task, workspace);
    request.test_method = java::first_method_name(task.test_before);
    request.focal = task.focal_after.ref;
    request.timeouts = timeouts;
    return run_phases(adapter, request);
}

// Unrecoverable gateway/adapter failures abort the session but keep the
// partial trace for audit.
class SessionAbort : public Error {
public:
    SessionAbort(const std::string& message, SessionResult partial)
        : Error(message), partial_result(std::move(partial)) {}
    SessionResult partial_result;
};

// The full loop: preprocess once, then generate -> extract -> evaluate ->
// record_best -> has_done -> (choose_agents -> analyze -> merge) until the
// thresholds are met or the iteration budget is spent.
inline SessionResult run_update_session(const UpdateTask& task, const SessionConfig& config,
                                        const Gateway& gateway, BuildAdapter& adapter,
                                        Workspace workspace, Retriever& retriever,
                                        const KnownSymbolCatalog& catalog) {
    auto violations = validate_task(task);
    if (!violations.empty())
        throw Error("invalid task: " + violations.front());

    SessionResult result;
    std::optional<Scored> best;
    auto finalize = [&](Termination reason) {
        result.terminated_by = reason;
        if (best) {
            result.best = best->first;
            result.best_outcome = best->second;
        }
        return result;
    };

    try {
        auto ranked = rank_hunks(task.test_before, task.diff_hunks, config.top_k_hunks,
                                 config.rank_weights);
        FilteredContext context = filter_context(task, ranked, gateway);
        RetrievalBudget budget{config.max_retrieval_iterations, {}};
        std::optional<InstructionBundle> instructions;

        for (int iteration = 1; iteration <= config.max_iterations; ++iteration) {
            result.iterations_used = iteration;

            CandidateUpdate candidate;
            ExecutionOutcome outcome;
            try {
                std::string raw = generate_update(task, context, instructions, iteration, gateway);
                candidate = extract_test_code(raw);
                candidate.iteration = iteration;
                outcome = evaluate_candidate(candidate, task, adapter, workspace);
            } catch (const ExtractionError& e) {
                candidate = CandidateUpdate{"", {}, iteration};
                outcome.phase_reached = Phase::compile_failed;
                Diagnostic d;
                d.kind = DiagnosticKind::compile_error;
                d.message = e.what();
                outcome.diagnostics.push_back(std::move(d));
            }

            best = record_best(best, {candidate, outcome});
            result.trace.push_back({candidate, outcome, {}});
            DoneState state = has_done(outcome, config, iteration);

            InstructionBundle bundle;
            if (state == DoneState::keep_going) {
                std::vector<AgentOutput> outputs;
                for (AgentKind kind : choose_agents(outcome, config)) {
                    AgentOutput output;
                    output.kind = kind;
                    switch (kind) {
                        case AgentKind::error_analysis: {
                            auto analysis = analyze_errors(outcome, candidate.test_code, task,
                                                           catalog, retriever, budget, gateway);
                            output.instructions = std::move(analysis.instructions);
                            output.retrieved = std::move(analysis.retrieved);
                            break;
                        }
                        case AgentKind::coverage_analysis:
                            output.instructions = analyze_coverage(
                                *outcome.coverage, task.focal_after.source, gateway);
                            break;
                        case AgentKind::mutation_analysis:
                            output.instructions = analyze_mutations(
                                *outcome.mutation, task.focal_after.source, gateway);
                            break;
                    }
                    outputs.push_back(std::move(output));
                }
                bundle = merge_instructions(outputs);
                instructions = bundle;
                result.trace.back().instructions = bundle;
            }

            if (state == DoneState::done_thresholds) return finalize(Termination::thresholds_met);
            if (state == DoneState::done_budget) return finalize(Termination::max_iterations);
        }
        return finalize(Termination::max_iterations);
    } catch (const Error& e) {
        throw SessionAbort(std::string("session aborted: ") + e.what(),
                           finalize(Termination::max_iterations));
    }
}

} // namespace testmend
