#pragma once

// Converts tool artifacts into domain types: JaCoCo coverage XML, PIT mutation
// XML, Maven/javac/JUnit build logs and unified diffs.

#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "testmend/java_source.hpp"
#include "testmend/types.hpp"
#include "testmend/util.hpp"

namespace testmend {

class ParseError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline boost::property_tree::ptree read_xml_text(const std::string& xml) {
    // rapidxml (under property_tree) rejects DOCTYPE declarations; drop them
    std::string cleaned = xml;
    size_t pos;
    while ((pos = cleaned.find("<!DOCTYPE")) != std::string::npos) {
        size_t end = cleaned.find('>', pos);
        if (end == std::string::npos) break;
        cleaned.erase(pos, end - pos + 1);
    }
    std::istringstream in(cleaned);
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_xml(in, tree);
    } catch (const boost::property_tree::xml_parser_error& e) {
        throw ParseError(std::string("malformed XML: ") + e.what());
    }
    return tree;
}

inline std::string package_path(const std::string& fully_qualified_class) {
    auto dot = fully_qualified_class.rfind('.');
    if (dot == std::string::npos) return "";
    std::string pkg = fully_qualified_class.substr(0, dot);
    for (auto& c : pkg)
        if (c == '.') c = '/';
    return pkg;
}

inline std::string basename_of(const std::string& path) {
    auto slash = path.find_last_of('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

inline const boost::property_tree::ptree* find_sourcefile(
    const boost::property_tree::ptree& node, const std::string& pkg,
    const std::string& filename) {
    for (const auto& [key, child] : node) {
        if (key == "package") {
            std::string name = child.get<std::string>("<xmlattr>.name", "");
            if (!pkg.empty() && name != pkg) continue;
            for (const auto& [ckey, cchild] : child) {
                if (ckey == "sourcefile" &&
                    cchild.get<std::string>("<xmlattr>.name", "") == filename)
                    return &cchild;
            }
        } else if (key == "group" || key == "report") {
            if (const auto* found = find_sourcefile(child, pkg, filename)) return found;
        }
    }
    return nullptr;
}

} // namespace detail

// Per-line statuses over the focal span. Lines absent from the report have no
// instructions; JaCoCo marks a line covered once any instruction on it ran.
inline CoverageFacts parse_coverage_report(const std::string& xml, const MethodRef& focal) {
    auto tree = detail::read_xml_text(xml);
    auto report = tree.get_child_optional("report");
    if (!report) throw ParseError("coverage XML has no <report> root");
    std::string pkg = detail::package_path(focal.fully_qualified_class);
    std::string filename = detail::basename_of(focal.file_path);
    const auto* sourcefile = detail::find_sourcefile(*report, pkg, filename);
    if (!sourcefile)
        throw ParseError("focal class not found in coverage report: " +
                         focal.fully_qualified_class);

    struct LineCounters {
        int mi = 0, ci = 0, mb = 0, cb = 0;
    };
    std::map<int, LineCounters> reported;
    for (const auto& [key, child] : *sourcefile) {
        if (key != "line") continue;
        LineCounters c;
        int nr = child.get<int>("<xmlattr>.nr", -1);
        c.mi = child.get<int>("<xmlattr>.mi", 0);
        c.ci = child.get<int>("<xmlattr>.ci", 0);
        c.mb = child.get<int>("<xmlattr>.mb", 0);
        c.cb = child.get<int>("<xmlattr>.cb", 0);
        if (nr >= 0) reported[nr] = c;
    }

    CoverageFacts facts;
    facts.method = focal;
    for (int line = focal.line_start; line <= focal.line_end; ++line) {
        auto it = reported.find(line);
        if (it == reported.end() || (it->second.mi == 0 && it->second.ci == 0)) {
            facts.line_status[line] = LineStatus::no_instruction;
            continue;
        }
        facts.line_status[line] =
            it->second.ci > 0 ? LineStatus::covered : LineStatus::not_covered;
        int total = it->second.mb + it->second.cb;
        if (total > 0) facts.branch_status[line] = BranchCount{it->second.cb, total};
    }
    facts.line_coverage_pct = facts.recompute_line_pct();
    facts.branch_coverage_pct = facts.recompute_branch_pct();
    return facts;
}

// One Mutant per report entry on the focal method; methods are matched by
// (name, parameter count) since descriptors and source signatures differ.
inline MutationFacts parse_mutation_report(const std::string& xml, const MethodRef& focal) {
    auto tree = detail::read_xml_text(xml);
    auto mutations = tree.get_child_optional("mutations");
    if (!mutations) throw ParseError("mutation XML has no <mutations> root");

    MutationFacts facts;
    facts.method = focal;
    for (const auto& [key, entry] : *mutations) {
        if (key != "mutation") continue;
        if (entry.get<std::string>("mutatedClass", "") != focal.fully_qualified_class) continue;
        if (entry.get<std::string>("mutatedMethod", "") != focal.method_name) continue;
        std::string desc = entry.get<std::string>("methodDescription", "");
        if (!desc.empty()) {
            int count = java::descriptor_param_count(desc);
            if (count >= 0 && count != static_cast<int>(focal.signature.size())) continue;
        }
        Mutant m;
        m.line = entry.get<int>("lineNumber", 0);
        std::string mutator = entry.get<std::string>("mutator", "");
        auto dot = mutator.rfind('.');
        m.op = dot == std::string::npos ? mutator : mutator.substr(dot + 1);
        m.description = entry.get<std::string>("description", "");
        std::string status = entry.get<std::string>("<xmlattr>.status", "");
        if (status == "KILLED" || status == "TIMED_OUT") m.status = MutantStatus::killed;
        else if (status == "SURVIVED") m.status = MutantStatus::survived;
        else if (status == "NO_COVERAGE") m.status = MutantStatus::no_coverage;
        else throw ParseError("unknown mutant status token: " + status);
        facts.mutants.push_back(std::move(m));
    }
    facts.mutation_score_pct = facts.recompute_score_pct();
    return facts;
}

// Regex catalog for one build tool's log format. Maven versions differ in
// formatting, so the catalog is data, not code.
struct LogPatterns {
    std::vector<std::regex> compile_error; // 1=file 2=line 3=message tail
    std::vector<std::regex> symbol_line;   // 1=symbol, attaches to last compile error
    std::vector<std::regex> symbol_in_message; // 1=symbol, applied to the error text
    std::vector<std::regex> assertion;     // 1=expected 2=actual
    std::vector<std::regex> assertion_bare; // assertion failure without values
    std::vector<std::regex> test_frame;    // 1=file 2=line, attaches to last failure
    std::vector<std::regex> runtime;       // whole line is the failure message
};

inline const LogPatterns& maven_log_patterns() {
    static const LogPatterns patterns = [] {
        LogPatterns p;
        p.compile_error = {
            std::regex(R"(^\[ERROR\]\s+(\S+\.java):\[(\d+)(?:,\d+)?\]\s*(.*)$)"),
            std::regex(R"(^(\S+\.java):(\d+):\s*error:\s*(.*)$)"),
        };
        p.symbol_line = {
            std::regex(R"(^\s*(?:\[ERROR\]\s*)?symbol\s*:\s*(?:method|variable|class)?\s*([A-Za-z_$][\w$]*))"),
        };
        p.symbol_in_message = {
            std::regex(R"(cannot find (?:symbol|method)[:\s]+\s*(?:method\s+)?([A-Za-z_$][\w$]*)\s*\()"),
        };
        p.assertion = {
            std::regex(R"(expected:\s?<(.*)> but was:\s?<(.*)>)"),
        };
        p.assertion_bare = {
            std::regex(R"((?:java\.lang\.AssertionError|org\.opentest4j\.AssertionFailedError)(?::\s*(.*))?$)"),
        };
        p.test_frame = {
            std::regex(R"(^\s*at\s+[\w.$]+\(([\w$]+\.java):(\d+)\))"),
        };
        p.runtime = {
            std::regex(R"((?:[A-Za-z_$][\w$]*\.)+[A-Za-z_$][\w$]*(?:Exception|Error)(?::.*)?$)"),
        };
        return p;
    }();
    return patterns;
}

// Extracts compiler errors, assertion failures and runtime failures from a raw
// build log; build-system boilerplate is dropped, ordering preserved.
// Unrecognized logs simply yield an empty list.
inline std::vector<Diagnostic> parse_build_log(const std::string& log,
                                               const LogPatterns& patterns = maven_log_patterns()) {
    std::vector<Diagnostic> diagnostics;
    auto last_of_kind = [&](DiagnosticKind kind) -> Diagnostic* {
        for (auto it = diagnostics.rbegin(); it != diagnostics.rend(); ++it)
            if (it->kind == kind) return &*it;
        return nullptr;
    };

    for (const auto& raw_line : split_lines(log)) {
        std::string line = raw_line;
        std::smatch m;
        bool matched = false;

        for (const auto& re : patterns.compile_error) {
            if (std::regex_search(line, m, re)) {
                Diagnostic d;
                d.kind = DiagnosticKind::compile_error;
                d.message = trim(line);
                d.file_path = m[1].str();
                d.line = std::stoi(m[2].str());
                std::string tail = m[3].str();
                for (const auto& sym_re : patterns.symbol_in_message) {
                    std::smatch sm;
                    if (std::regex_search(tail, sm, sym_re)) {
                        d.symbol = sm[1].str();
                        break;
                    }
                }
                diagnostics.push_back(std::move(d));
                matched = true;
                break;
            }
        }
        if (matched) continue;

        for (const auto& re : patterns.symbol_line) {
            if (std::regex_search(line, m, re)) {
                if (auto* d = last_of_kind(DiagnosticKind::compile_error); d && !d->symbol)
                    d->symbol = m[1].str();
                matched = true;
                break;
            }
        }
        if (matched) continue;

        for (const auto& re : patterns.assertion) {
            if (std::regex_search(line, m, re)) {
                Diagnostic d;
                d.kind = DiagnosticKind::assertion_failure;
                d.message = trim(line);
                d.expected = m[1].str();
                d.actual = m[2].str();
                diagnostics.push_back(std::move(d));
                matched = true;
                break;
            }
        }
        if (matched) continue;

        for (const auto& re : patterns.assertion_bare) {
            if (std::regex_search(line, m, re)) {
                Diagnostic d;
                d.kind = DiagnosticKind::assertion_failure;
                d.message = trim(line);
                diagnostics.push_back(std::move(d));
                matched = true;
                break;
            }
        }
        if (matched) continue;

        for (const auto& re : patterns.test_frame) {
            if (std::regex_search(line, m, re)) {
                Diagnostic* d = last_of_kind(DiagnosticKind::assertion_failure);
                Diagnostic* r = last_of_kind(DiagnosticKind::runtime_failure);
                Diagnostic* target = d && (!r || r < d) ? d : r;
                if (target && !target->line) {
                    target->file_path = m[1].str();
                    target->line = std::stoi(m[2].str());
                }
                matched = true;
                break;
            }
        }
        if (matched) continue;

        for (const auto& re : patterns.runtime) {
            if (std::regex_search(line, m, re)) {
                Diagnostic d;
                d.kind = DiagnosticKind::runtime_failure;
                d.message = trim(line);
                diagnostics.push_back(std::move(d));
                break;
            }
        }
    }
    return diagnostics;
}

// --- unified diff ---

inline std::vector<DiffHunk> parse_unified_diff(const std::string& text) {
    std::vector<DiffHunk> hunks;
    auto lines = split_lines(text);
    static const std::regex header_re(R"(^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@)");
    std::string old_file, new_file;
    int index = 0;
    size_t i = 0;
    while (i < lines.size()) {
        const std::string& line = lines[i];
        if (starts_with(line, "--- ")) {
            old_file = trim(line.substr(4));
            if (starts_with(old_file, "a/")) old_file = old_file.substr(2);
            ++i;
            continue;
        }
        if (starts_with(line, "+++ ")) {
            new_file = trim(line.substr(4));
            if (starts_with(new_file, "b/")) new_file = new_file.substr(2);
            ++i;
            continue;
        }
        std::smatch m;
        if (std::regex_search(line, m, header_re)) {
            DiffHunk hunk;
            hunk.old_start = std::stoi(m[1].str());
            hunk.old_count = m[2].matched ? std::stoi(m[2].str()) : 1;
            hunk.new_start = std::stoi(m[3].str());
            hunk.new_count = m[4].matched ? std::stoi(m[4].str()) : 1;
            hunk.file_path = new_file == "/dev/null" ? old_file : new_file;
            hunk.index = index;
            int old_left = hunk.old_count, new_left = hunk.new_count;
            ++i;
            while (old_left > 0 || new_left > 0) {
                if (i >= lines.size())
                    throw ParseError("malformed hunk header at line " +
                                     std::to_string(i) + ": counts exceed body");
                const std::string& body = lines[i];
                if (starts_with(body, "\\")) { // "\ No newline at end of file"
                    ++i;
                    continue;
                }
                char tag = body.empty() ? ' ' : body[0];
                std::string content = body.empty() ? "" : body.substr(1);
                if (tag == ' ') {
                    hunk.lines.emplace_back(LineTag::context, content);
                    --old_left;
                    --new_left;
                } else if (tag == '+') {
                    hunk.lines.emplace_back(LineTag::add, content);
                    --new_left;
                } else if (tag == '-') {
                    hunk.lines.emplace_back(LineTag::del, content);
                    --old_left;
                } else {
                    throw ParseError("malformed hunk header at line " + std::to_string(i + 1) +
                                     ": counts inconsistent with body");
                }
                if (old_left < 0 || new_left < 0)
                    throw ParseError("malformed hunk header at line " + std::to_string(i + 1) +
                                     ": counts inconsistent with body");
                ++i;
            }
            ++index;
            hunks.push_back(std::move(hunk));
            continue;
        }
        ++i;
    }
    return hunks;
}

// Canonical re-rendering: headers always carry explicit counts; bodies are
// reproduced byte-for-byte.
inline std::string render_unified_diff(const std::vector<DiffHunk>& hunks) {
    std::string out;
    std::string current_file;
    for (const auto& hunk : hunks) {
        if (hunk.file_path != current_file) {
            current_file = hunk.file_path;
            out += "--- a/" + current_file + "\n";
            out += "+++ b/" + current_file + "\n";
        }
        out += "@@ -" + std::to_string(hunk.old_start) + "," + std::to_string(hunk.old_count) +
               " +" + std::to_string(hunk.new_start) + "," + std::to_string(hunk.new_count) +
               " @@\n";
        for (const auto& [tag, text] : hunk.lines) {
            char c = tag == LineTag::context ? ' ' : tag == LineTag::add ? '+' : '-';
            out += c + text + "\n";
        }
    }
    return out;
}

} // namespace testmend
