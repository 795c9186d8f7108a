#pragma once

// Canonical interchange format: JSON with stable field names matching the
// domain types. Used for session traces, fixtures and CLI output.

#include <nlohmann/json.hpp>

#include "testmend/types.hpp"

namespace testmend {

using json = nlohmann::json;

NLOHMANN_JSON_SERIALIZE_ENUM(LineTag, {
    {LineTag::context, "context"}, {LineTag::add, "add"}, {LineTag::del, "del"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Phase, {
    {Phase::compile_failed, "compile_failed"},
    {Phase::tests_failed, "tests_failed"},
    {Phase::passed, "passed"}})
NLOHMANN_JSON_SERIALIZE_ENUM(DiagnosticKind, {
    {DiagnosticKind::compile_error, "compile_error"},
    {DiagnosticKind::assertion_failure, "assertion_failure"},
    {DiagnosticKind::runtime_failure, "runtime_failure"}})
NLOHMANN_JSON_SERIALIZE_ENUM(LineStatus, {
    {LineStatus::covered, "covered"},
    {LineStatus::not_covered, "not_covered"},
    {LineStatus::no_instruction, "no_instruction"}})
NLOHMANN_JSON_SERIALIZE_ENUM(MutantStatus, {
    {MutantStatus::no_coverage, "no_coverage"},
    {MutantStatus::survived, "survived"},
    {MutantStatus::killed, "killed"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Termination, {
    {Termination::thresholds_met, "thresholds_met"},
    {Termination::max_iterations, "max_iterations"}})

inline void to_json(json& j, const MethodRef& m) {
    j = json{{"file_path", m.file_path},
             {"fully_qualified_class", m.fully_qualified_class},
             {"method_name", m.method_name},
             {"signature", m.signature},
             {"line_span", {m.line_start, m.line_end}}};
}
inline void from_json(const json& j, MethodRef& m) {
    j.at("file_path").get_to(m.file_path);
    j.at("fully_qualified_class").get_to(m.fully_qualified_class);
    j.at("method_name").get_to(m.method_name);
    j.at("signature").get_to(m.signature);
    m.line_start = j.at("line_span").at(0).get<int>();
    m.line_end = j.at("line_span").at(1).get<int>();
}

inline void to_json(json& j, const DiffHunk& h) {
    json lines = json::array();
    for (const auto& [tag, text] : h.lines) lines.push_back({json(tag), text});
    j = json{{"file_path", h.file_path},
             {"old_range", {h.old_start, h.old_count}},
             {"new_range", {h.new_start, h.new_count}},
             {"lines", lines},
             {"index", h.index}};
}
inline void from_json(const json& j, DiffHunk& h) {
    j.at("file_path").get_to(h.file_path);
    h.old_start = j.at("old_range").at(0).get<int>();
    h.old_count = j.at("old_range").at(1).get<int>();
    h.new_start = j.at("new_range").at(0).get<int>();
    h.new_count = j.at("new_range").at(1).get<int>();
    h.lines.clear();
    for (const auto& entry : j.at("lines"))
        h.lines.emplace_back(entry.at(0).get<LineTag>(), entry.at(1).get<std::string>());
    j.at("index").get_to(h.index);
}

inline void to_json(json& j, const FocalMethod& f) {
    j = json{{"ref", f.ref}, {"source", f.source}};
}
inline void from_json(const json& j, FocalMethod& f) {
    j.at("ref").get_to(f.ref);
    j.at("source").get_to(f.source);
}

inline void to_json(json& j, const UpdateTask& t) {
    j = json{{"test_before", t.test_before},
             {"test_class_path", t.test_class_path},
             {"non_test_methods", t.non_test_methods},
             {"class_variables", t.class_variables},
             {"focal_before", t.focal_before},
             {"focal_after", t.focal_after},
             {"diff_hunks", t.diff_hunks},
             {"repo_pre", t.repo_pre},
             {"repo_post", t.repo_post}};
}
inline void from_json(const json& j, UpdateTask& t) {
    j.at("test_before").get_to(t.test_before);
    j.at("test_class_path").get_to(t.test_class_path);
    j.at("non_test_methods").get_to(t.non_test_methods);
    j.at("class_variables").get_to(t.class_variables);
    j.at("focal_before").get_to(t.focal_before);
    j.at("focal_after").get_to(t.focal_after);
    j.at("diff_hunks").get_to(t.diff_hunks);
    j.at("repo_pre").get_to(t.repo_pre);
    j.at("repo_post").get_to(t.repo_post);
}

inline void to_json(json& j, const CandidateUpdate& c) {
    j = json{{"test_code", c.test_code}, {"imports", c.imports}, {"iteration", c.iteration}};
}
inline void from_json(const json& j, CandidateUpdate& c) {
    j.at("test_code").get_to(c.test_code);
    j.at("imports").get_to(c.imports);
    j.at("iteration").get_to(c.iteration);
}

namespace detail {
template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}
template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& v) {
    if (j.contains(key) && !j.at(key).is_null()) v = j.at(key).get<T>();
    else v.reset();
}
} // namespace detail

inline void to_json(json& j, const Diagnostic& d) {
    j = json{{"kind", d.kind}, {"message", d.message}};
    detail::put_optional(j, "symbol", d.symbol);
    detail::put_optional(j, "file_path", d.file_path);
    detail::put_optional(j, "line", d.line);
    detail::put_optional(j, "expected", d.expected);
    detail::put_optional(j, "actual", d.actual);
}
inline void from_json(const json& j, Diagnostic& d) {
    j.at("kind").get_to(d.kind);
    j.at("message").get_to(d.message);
    detail::get_optional(j, "symbol", d.symbol);
    detail::get_optional(j, "file_path", d.file_path);
    detail::get_optional(j, "line", d.line);
    detail::get_optional(j, "expected", d.expected);
    detail::get_optional(j, "actual", d.actual);
}

inline void to_json(json& j, const BranchCount& b) {
    j = json{b.covered, b.total};
}
inline void from_json(const json& j, BranchCount& b) {
    b.covered = j.at(0).get<int>();
    b.total = j.at(1).get<int>();
}

inline void to_json(json& j, const CoverageFacts& c) {
    json lines = json::object();
    for (const auto& [line, st] : c.line_status) lines[std::to_string(line)] = st;
    json branches = json::object();
    for (const auto& [line, bc] : c.branch_status) branches[std::to_string(line)] = bc;
    j = json{{"method", c.method},
             {"line_status", lines},
             {"branch_status", branches},
             {"line_coverage_pct", c.line_coverage_pct},
             {"branch_coverage_pct", c.branch_coverage_pct}};
}
inline void from_json(const json& j, CoverageFacts& c) {
    j.at("method").get_to(c.method);
    c.line_status.clear();
    for (const auto& [key, val] : j.at("line_status").items())
        c.line_status[std::stoi(key)] = val.get<LineStatus>();
    c.branch_status.clear();
    for (const auto& [key, val] : j.at("branch_status").items())
        c.branch_status[std::stoi(key)] = val.get<BranchCount>();
    j.at("line_coverage_pct").get_to(c.line_coverage_pct);
    j.at("branch_coverage_pct").get_to(c.branch_coverage_pct);
}

inline void to_json(json& j, const Mutant& m) {
    j = json{{"line", m.line}, {"operator", m.op},
             {"description", m.description}, {"status", m.status}};
}
inline void from_json(const json& j, Mutant& m) {
    j.at("line").get_to(m.line);
    j.at("operator").get_to(m.op);
    j.at("description").get_to(m.description);
    j.at("status").get_to(m.status);
}

inline void to_json(json& j, const MutationFacts& m) {
    j = json{{"method", m.method}, {"mutants", m.mutants},
             {"mutation_score_pct", m.mutation_score_pct}};
}
inline void from_json(const json& j, MutationFacts& m) {
    j.at("method").get_to(m.method);
    j.at("mutants").get_to(m.mutants);
    j.at("mutation_score_pct").get_to(m.mutation_score_pct);
}

inline void to_json(json& j, const ExecutionOutcome& o) {
    j = json{{"phase_reached", o.phase_reached},
             {"diagnostics", o.diagnostics},
             {"raw_log_ref", o.raw_log_ref}};
    detail::put_optional(j, "coverage", o.coverage);
    detail::put_optional(j, "mutation", o.mutation);
}
inline void from_json(const json& j, ExecutionOutcome& o) {
    j.at("phase_reached").get_to(o.phase_reached);
    j.at("diagnostics").get_to(o.diagnostics);
    j.at("raw_log_ref").get_to(o.raw_log_ref);
    detail::get_optional(j, "coverage", o.coverage);
    detail::get_optional(j, "mutation", o.mutation);
}

inline void to_json(json& j, const ResolvedSymbol& r) {
    j = json{{"name", r.name}, {"kind", r.kind},
             {"signature_or_definition", r.signature_or_definition},
             {"file_path", r.file_path}, {"import_path", r.import_path}};
}
inline void from_json(const json& j, ResolvedSymbol& r) {
    j.at("name").get_to(r.name);
    j.at("kind").get_to(r.kind);
    j.at("signature_or_definition").get_to(r.signature_or_definition);
    j.at("file_path").get_to(r.file_path);
    j.at("import_path").get_to(r.import_path);
}

inline void to_json(json& j, const InstructionBundle& b) {
    j = json{{"error_instructions", b.error_instructions},
             {"coverage_instructions", b.coverage_instructions},
             {"mutation_instructions", b.mutation_instructions},
             {"retrieved_context", b.retrieved_context}};
}
inline void from_json(const json& j, InstructionBundle& b) {
    j.at("error_instructions").get_to(b.error_instructions);
    j.at("coverage_instructions").get_to(b.coverage_instructions);
    j.at("mutation_instructions").get_to(b.mutation_instructions);
    j.at("retrieved_context").get_to(b.retrieved_context);
}

inline void to_json(json& j, const TraceEntry& e) {
    j = json{{"candidate", e.candidate}, {"outcome", e.outcome},
             {"instructions", e.instructions}};
}
inline void from_json(const json& j, TraceEntry& e) {
    j.at("candidate").get_to(e.candidate);
    j.at("outcome").get_to(e.outcome);
    j.at("instructions").get_to(e.instructions);
}

inline void to_json(json& j, const SessionResult& s) {
    j = json{{"best", s.best}, {"best_outcome", s.best_outcome},
             {"iterations_used", s.iterations_used}, {"trace", s.trace},
             {"terminated_by", s.terminated_by}};
}
inline void from_json(const json& j, SessionResult& s) {
    j.at("best").get_to(s.best);
    j.at("best_outcome").get_to(s.best_outcome);
    j.at("iterations_used").get_to(s.iterations_used);
    j.at("trace").get_to(s.trace);
    j.at("terminated_by").get_to(s.terminated_by);
}

} // namespace testmend
