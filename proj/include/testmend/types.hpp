#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "testmend/util.hpp"

namespace testmend {

// Location of one production or test method.
struct MethodRef {
    std::string file_path;              // repo-relative
    std::string fully_qualified_class;  // dotted
    std::string method_name;
    std::vector<std::string> signature; // parameter-type list
    int line_start = 1;
    int line_end = 1;                   // 1-based inclusive

    bool operator==(const MethodRef&) const = default;
};

enum class LineTag { context, add, del };

struct DiffHunk {
    std::string file_path;
    int old_start = 0;
    int old_count = 0;
    int new_start = 0;
    int new_count = 0;
    std::vector<std::pair<LineTag, std::string>> lines;
    int index = 0; // ordinal in the original diff

    bool operator==(const DiffHunk&) const = default;

    std::vector<std::string> changed_lines() const {
        std::vector<std::string> out;
        for (const auto& [tag, text] : lines)
            if (tag != LineTag::context) out.push_back(text);
        return out;
    }
};

struct FocalMethod {
    MethodRef ref;
    std::string source;

    bool operator==(const FocalMethod&) const = default;
};

// Everything the update pipeline consumes for one outdated test.
struct UpdateTask {
    std::string test_before;      // outdated test method source
    std::string test_class_path;  // repo-relative path of the test class
    std::vector<std::string> non_test_methods;
    std::vector<std::string> class_variables;
    FocalMethod focal_before;
    FocalMethod focal_after;      // equal to focal_before when unchanged
    std::vector<DiffHunk> diff_hunks;
    std::string repo_pre;         // pre-change workspace identifier
    std::string repo_post;        // post-change workspace identifier

    bool operator==(const UpdateTask&) const = default;
};

struct CandidateUpdate {
    std::string test_code;
    std::vector<std::string> imports;
    int iteration = 1;

    bool operator==(const CandidateUpdate&) const = default;
};

enum class Phase { compile_failed, tests_failed, passed };

enum class DiagnosticKind { compile_error, assertion_failure, runtime_failure };

struct Diagnostic {
    DiagnosticKind kind = DiagnosticKind::runtime_failure;
    std::string message; // raw text, kept verbatim
    std::optional<std::string> symbol;
    std::optional<std::string> file_path;
    std::optional<int> line;
    std::optional<std::string> expected;
    std::optional<std::string> actual;

    bool operator==(const Diagnostic&) const = default;
};

enum class LineStatus { covered, not_covered, no_instruction };

struct BranchCount {
    int covered = 0;
    int total = 0;

    bool operator==(const BranchCount&) const = default;
};

struct CoverageFacts {
    MethodRef method;
    std::map<int, LineStatus> line_status;
    std::map<int, BranchCount> branch_status;
    double line_coverage_pct = 100.0;
    double branch_coverage_pct = 100.0;

    bool operator==(const CoverageFacts&) const = default;

    // Lines without instructions are excluded; no executable line is vacuously 100.
    double recompute_line_pct() const {
        int covered = 0, missed = 0;
        for (const auto& [line, st] : line_status) {
            if (st == LineStatus::covered) ++covered;
            else if (st == LineStatus::not_covered) ++missed;
        }
        if (covered + missed == 0) return 100.0;
        return round2(100.0 * covered / (covered + missed));
    }

    double recompute_branch_pct() const {
        int covered = 0, total = 0;
        for (const auto& [line, bc] : branch_status) {
            covered += bc.covered;
            total += bc.total;
        }
        if (total == 0) return 100.0;
        return round2(100.0 * covered / total);
    }
};

enum class MutantStatus { no_coverage, survived, killed };

struct Mutant {
    int line = 0;
    std::string op; // mutation operator name
    std::string description;
    MutantStatus status = MutantStatus::survived;

    bool operator==(const Mutant&) const = default;
};

struct MutationFacts {
    MethodRef method;
    std::vector<Mutant> mutants;
    double mutation_score_pct = 100.0;

    bool operator==(const MutationFacts&) const = default;

    // Zero mutants is vacuously adequate (100).
    double recompute_score_pct() const {
        if (mutants.empty()) return 100.0;
        int killed = 0;
        for (const auto& m : mutants)
            if (m.status == MutantStatus::killed) ++killed;
        return round2(100.0 * killed / static_cast<double>(mutants.size()));
    }
};

struct ExecutionOutcome {
    Phase phase_reached = Phase::compile_failed;
    std::vector<Diagnostic> diagnostics;       // non-empty iff not passed
    std::optional<CoverageFacts> coverage;     // present iff passed
    std::optional<MutationFacts> mutation;     // present iff passed
    std::string raw_log_ref;

    bool operator==(const ExecutionOutcome&) const = default;
};

struct ResolvedSymbol {
    std::string name;
    std::string kind; // "method" or "field"
    std::string signature_or_definition;
    std::string file_path;
    std::string import_path;

    bool operator==(const ResolvedSymbol&) const = default;
};

// Merged key-value feedback for the next update iteration.
struct InstructionBundle {
    std::vector<std::string> error_instructions;
    std::vector<std::string> coverage_instructions;
    std::vector<std::string> mutation_instructions;
    std::vector<ResolvedSymbol> retrieved_context;

    bool operator==(const InstructionBundle&) const = default;

    bool empty() const {
        return error_instructions.empty() && coverage_instructions.empty() &&
               mutation_instructions.empty() && retrieved_context.empty();
    }
};

enum class Termination { thresholds_met, max_iterations };

struct TraceEntry {
    CandidateUpdate candidate;
    ExecutionOutcome outcome;
    InstructionBundle instructions; // feedback produced after this iteration

    bool operator==(const TraceEntry&) const = default;
};

struct SessionResult {
    CandidateUpdate best;
    ExecutionOutcome best_outcome;
    int iterations_used = 0;
    std::vector<TraceEntry> trace;
    Termination terminated_by = Termination::max_iterations;

    bool operator==(const SessionResult&) const = default;
};

// Checks the structural UpdateTask invariants. Violations are data, not
// failures; each entry names the invariant that failed. Filesystem-dependent
// invariants (test_class_path existing in repo_post) are checked where the
// workspace is available, not here.
inline std::vector<std::string> validate_task(const UpdateTask& task) {
    std::vector<std::string> violations;
    if (task.test_before.empty()) violations.push_back("test_before empty");
    if (task.test_class_path.empty()) violations.push_back("test_class_path empty");
    if (task.focal_after.source.empty()) violations.push_back("focal_after missing");
    auto check_ref = [&](const MethodRef& ref, const std::string& which) {
        if (ref.method_name.empty())
            violations.push_back(which + ".method_name empty");
        if (ref.line_start > ref.line_end)
            violations.push_back(which + ".line_span start > end");
    };
    check_ref(task.focal_before.ref, "focal_before");
    check_ref(task.focal_after.ref, "focal_after");
    std::set<int> seen;
    int prev = -1;
    for (const auto& hunk : task.diff_hunks) {
        if (!seen.insert(hunk.index).second)
            violations.push_back("DiffHunk.index duplicate: " + std::to_string(hunk.index));
        if (hunk.index < prev)
            violations.push_back("DiffHunk.index out of order: " + std::to_string(hunk.index));
        prev = hunk.index;
        int old_lines = 0, new_lines = 0;
        for (const auto& [tag, text] : hunk.lines) {
            if (tag != LineTag::add) ++old_lines;
            if (tag != LineTag::del) ++new_lines;
        }
        if (old_lines != hunk.old_count)
            violations.push_back("DiffHunk " + std::to_string(hunk.index) + " old_range count mismatch");
        if (new_lines != hunk.new_count)
            violations.push_back("DiffHunk " + std::to_string(hunk.index) + " new_range count mismatch");
    }
    return violations;
}

inline int phase_rank(Phase p) {
    switch (p) {
        case Phase::passed: return 2;
        case Phase::tests_failed: return 1;
        case Phase::compile_failed: return 0;
    }
    return 0;
}

inline std::string to_string(Phase p) {
    switch (p) {
        case Phase::compile_failed: return "compile_failed";
        case Phase::tests_failed: return "tests_failed";
        case Phase::passed: return "passed";
    }
    return "compile_failed";
}

inline std::string to_string(DiagnosticKind k) {
    switch (k) {
        case DiagnosticKind::compile_error: return "compile_error";
        case DiagnosticKind::assertion_failure: return "assertion_failure";
        case DiagnosticKind::runtime_failure: return "runtime_failure";
    }
    return "runtime_failure";
}

inline std::string to_string(LineStatus s) {
    switch (s) {
        case LineStatus::covered: return "covered";
        case LineStatus::not_covered: return "not_covered";
        case LineStatus::no_instruction: return "no_instruction";
    }
    return "no_instruction";
}

inline std::string to_string(MutantStatus s) {
    switch (s) {
        case MutantStatus::no_coverage: return "no_coverage";
        case MutantStatus::survived: return "survived";
        case MutantStatus::killed: return "killed";
    }
    return "killed";
}

inline std::string to_string(Termination t) {
    return t == Termination::thresholds_met ? "thresholds_met" : "max_iterations";
}

} // namespace testmend
