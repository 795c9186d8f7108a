#pragma once

// Applies candidate test code to a workspace and runs the compile / test /
// coverage / mutation phases. Two implementations: a real Maven adapter and a
// deterministic replay adapter keyed on candidate digests, so end-to-end runs
// need no JDK.

#include <array>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "testmend/java_source.hpp"
#include "testmend/types.hpp"
#include "testmend/util.hpp"

namespace testmend {

struct Workspace {
    std::filesystem::path root;
    std::string snapshot_id;
    bool dirty = false;
};

struct PhaseTimeouts {
    int compile_s = 300;
    int tests_s = 300;
    int coverage_s = 300;
    int mutation_s = 900;
};

struct RunRequest {
    Workspace workspace;
    std::string test_class;  // fully qualified
    std::string test_method;
    MethodRef focal;
    PhaseTimeouts timeouts;
};

// Shared result of one phase run: captured log plus, for coverage/mutation,
// the report file path.
struct RunResult {
    bool ok = false;
    bool timed_out = false;
    std::string log;
    std::string log_ref;           // stored-log handle
    std::filesystem::path report;  // coverage/mutation reports only
};

class AdapterError : public Error {
public:
    using Error::Error;
};

class ReplayMissAdapter : public AdapterError {
public:
    using AdapterError::AdapterError;
};

// Digest over (test_code, imports), normalized for trailing whitespace.
inline std::string candidate_digest(const CandidateUpdate& candidate) {
    std::string buf;
    for (auto& line : split_lines(candidate.test_code)) {
        std::string l = line;
        while (!l.empty() && (l.back() == ' ' || l.back() == '\t' || l.back() == '\r'))
            l.pop_back();
        buf += l;
        buf += '\n';
    }
    while (buf.size() >= 2 && buf[buf.size() - 1] == '\n' && buf[buf.size() - 2] == '\n')
        buf.pop_back();
    for (const auto& imp : candidate.imports) {
        buf += '\x1f';
        buf += java::canonical_import(imp);
    }
    return to_hex(fnv1a64(buf));
}

inline const std::string kPristineDigest = "pristine";

class BuildAdapter {
public:
    virtual ~BuildAdapter() = default;

    // Replaces the outdated test method with the candidate and inserts its
    // imports (deduplicated); all other file bytes are unchanged. Returns the
    // repo-relative path of the modified file.
    virtual std::string apply_test_code(Workspace& workspace, const UpdateTask& task,
                                        const CandidateUpdate& candidate) {
        std::string method_name = java::first_method_name(task.test_before);
        if (method_name.empty())
            throw AdapterError("cannot determine test method name from task.test_before");
        auto path = workspace.root / task.test_class_path;
        if (std::filesystem::exists(path)) {
            std::string original = read_file(path);
            std::string replaced = java::replace_method(original, method_name, candidate.test_code);
            replaced = java::insert_imports(replaced, candidate.imports);
            if (!java::brace_balanced(replaced))
                throw AdapterError("unbalanced replacement in " + task.test_class_path);
            backups_.try_emplace(path.string(), original);
            write_file(path, replaced);
            workspace.dirty = true;
        }
        applied_digest_[workspace.snapshot_id] = candidate_digest(candidate);
        return task.test_class_path;
    }

    // Restores every file touched by apply_test_code to its snapshot bytes.
    virtual void reset(Workspace& workspace) {
        for (const auto& [path, content] : backups_)
            write_file(path, content);
        backups_.clear();
        applied_digest_[workspace.snapshot_id] = kPristineDigest;
        workspace.dirty = false;
    }

    virtual RunResult run_compile(const RunRequest& request) = 0;
    virtual RunResult run_tests(const RunRequest& request) = 0;
    virtual RunResult run_coverage(const RunRequest& request) = 0;
    virtual RunResult run_mutation(const RunRequest& request) = 0;

protected:
    std::string current_digest(const Workspace& workspace) const {
        auto it = applied_digest_.find(workspace.snapshot_id);
        return it == applied_digest_.end() ? kPristineDigest : it->second;
    }

    // Mutation runs are only legal after a passing test run on the same
    // workspace; the coordinator enforces it, the adapter asserts it.
    void note_tests_result(const Workspace& workspace, bool ok) {
        tests_passed_[workspace.snapshot_id + "/" + current_digest(workspace)] = ok;
    }
    void assert_tests_passed(const Workspace& workspace) const {
        auto it = tests_passed_.find(workspace.snapshot_id + "/" + current_digest(workspace));
        if (it == tests_passed_.end() || !it->second)
            throw AdapterError("run_mutation invoked without a passing test run");
    }

private:
    std::map<std::string, std::string> backups_;
    std::map<std::string, std::string> applied_digest_;
    std::map<std::string, bool> tests_passed_;
};

// Replay bundle layout: <bundle>/<snapshot_id>__<digest>/ containing
// meta.json {compile_ok, tests_ok, timed_out?}, log.txt and, when recorded,
// coverage.xml / mutations.xml.
class ReplayAdapter : public BuildAdapter {
public:
    explicit ReplayAdapter(std::filesystem::path bundle_dir)
        : bundle_dir_(std::move(bundle_dir)) {}

    RunResult run_compile(const RunRequest& request) override {
        auto [meta, dir] = entry_for(request.workspace);
        RunResult result;
        result.ok = meta.value("compile_ok", false);
        result.log = read_file(dir / "log.txt");
        result.log_ref = (dir / "log.txt").string();
        return result;
    }

    RunResult run_tests(const RunRequest& request) override {
        auto [meta, dir] = entry_for(request.workspace);
        RunResult result;
        result.ok = meta.value("compile_ok", false) && meta.value("tests_ok", false);
        result.timed_out = meta.value("timed_out", false);
        result.log = read_file(dir / "log.txt");
        result.log_ref = (dir / "log.txt").string();
        note_tests_result(request.workspace, result.ok);
        return result;
    }

    RunResult run_coverage(const RunRequest& request) override {
        auto [meta, dir] = entry_for(request.workspace);
        RunResult result;
        result.report = dir / meta.value("coverage", "coverage.xml");
        if (!std::filesystem::exists(result.report))
            throw ReplayMissAdapter("replay entry has no coverage report: " + result.report.string());
        result.ok = true;
        result.log = read_file(dir / "log.txt");
        result.log_ref = (dir / "log.txt").string();
        return result;
    }

    RunResult run_mutation(const RunRequest& request) override {
        assert_tests_passed(request.workspace);
        auto [meta, dir] = entry_for(request.workspace);
        RunResult result;
        result.report = dir / meta.value("mutations", "mutations.xml");
        if (!std::filesystem::exists(result.report))
            throw ReplayMissAdapter("replay entry has no mutation report: " + result.report.string());
        result.ok = true;
        result.log = read_file(dir / "log.txt");
        result.log_ref = (dir / "log.txt").string();
        return result;
    }

private:
    std::pair<nlohmann::json, std::filesystem::path> entry_for(const Workspace& workspace) {
        std::string digest = current_digest(workspace);
        auto dir = bundle_dir_ / (workspace.snapshot_id + "__" + digest);
        auto meta_path = dir / "meta.json";
        if (!std::filesystem::exists(meta_path))
            throw ReplayMissAdapter("no replay recording for snapshot '" + workspace.snapshot_id +
                                    "' digest " + digest);
        return {nlohmann::json::parse(read_file(meta_path)), dir};
    }

    std::filesystem::path bundle_dir_;
};

// Command templates keep Maven invocation configurable; {root}, {test_class},
// {test_method} are substituted per run.
struct MavenCommands {
    std::string compile = "mvn -q -B test-compile";
    std::string tests = "mvn -q -B test -Dtest={test_class}#{test_method}";
    std::string coverage =
        "mvn -q -B org.jacoco:jacoco-maven-plugin:prepare-agent test "
        "-Dtest={test_class}#{test_method} org.jacoco:jacoco-maven-plugin:report";
    std::string mutation =
        "mvn -q -B test-compile org.pitest:pitest-maven:mutationCoverage "
        "-DtargetTests={test_class} -DoutputFormats=XML";
    std::string coverage_report = "target/site/jacoco/jacoco.xml";
    std::string mutation_report_dir = "target/pit-reports";
};

class MavenAdapter : public BuildAdapter {
public:
    explicit MavenAdapter(MavenCommands commands = {}) : commands_(std::move(commands)) {}

    RunResult run_compile(const RunRequest& request) override {
        return run_phase(request, commands_.compile, request.timeouts.compile_s, "compile");
    }

    RunResult run_tests(const RunRequest& request) override {
        auto result = run_phase(request, commands_.tests, request.timeouts.tests_s, "tests");
        note_tests_result(request.workspace, result.ok);
        return result;
    }

    RunResult run_coverage(const RunRequest& request) override {
        auto result = run_phase(request, commands_.coverage, request.timeouts.coverage_s, "coverage");
        result.report = request.workspace.root / commands_.coverage_report;
        if (result.ok && !std::filesystem::exists(result.report))
            throw AdapterError("coverage report not found: " + result.report.string());
        return result;
    }

    RunResult run_mutation(const RunRequest& request) override {
        assert_tests_passed(request.workspace);
        auto result = run_phase(request, commands_.mutation, request.timeouts.mutation_s, "mutation");
        result.report = newest_mutation_report(request.workspace.root / commands_.mutation_report_dir);
        if (result.ok && result.report.empty())
            throw AdapterError("mutation report not found under " +
                               (request.workspace.root / commands_.mutation_report_dir).string());
        return result;
    }

private:
    RunResult run_phase(const RunRequest& request, const std::string& command_template,
                        int timeout_s, const std::string& phase) {
        std::string cmd = command_template;
        auto substitute = [&](const std::string& key, const std::string& value) {
            size_t pos;
            while ((pos = cmd.find(key)) != std::string::npos) cmd.replace(pos, key.size(), value);
        };
        substitute("{root}", request.workspace.root.string());
        substitute("{test_class}", request.test_class);
        substitute("{test_method}", request.test_method);
        std::string full = "cd '" + request.workspace.root.string() + "' && timeout " +
                           std::to_string(timeout_s) + "s " + cmd + " 2>&1";

        RunResult result;
        std::array<char, 4096> buf{};
        FILE* pipe = ::popen(full.c_str(), "r");
        if (!pipe) throw AdapterError("toolchain missing: cannot spawn shell");
        while (size_t n = ::fread(buf.data(), 1, buf.size(), pipe))
            result.log.append(buf.data(), n);
        int status = ::pclose(pipe);
        int exit_code = status >= 0 ? (status >> 8) & 0xff : -1;
        if (exit_code == 127)
            throw AdapterError("toolchain missing: " + cmd);
        result.timed_out = exit_code == 124;
        if (result.timed_out) result.log += "\nphase timeout\n";
        result.ok = exit_code == 0;

        auto log_dir = request.workspace.root / ".testmend" / "logs";
        auto log_path = log_dir / (phase + "-" + current_digest(request.workspace) + ".log");
        write_file(log_path, result.log);
        result.log_ref = log_path.string();
        return result;
    }

    static std::filesystem::path newest_mutation_report(const std::filesystem::path& dir) {
        std::filesystem::path newest;
        if (!std::filesystem::exists(dir)) return newest;
        for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
            if (entry.is_regular_file() && entry.path().filename() == "mutations.xml") {
                if (newest.empty() ||
                    std::filesystem::last_write_time(entry.path()) >
                        std::filesystem::last_write_time(newest))
                    newest = entry.path();
            }
        }
        return newest;
    }

    MavenCommands commands_;
};

} // namespace testmend
