#pragma once

// Coverage analysis: annotates the focal method with line/branch statuses and
// emits one improvement instruction per uncovered line and per partially
// covered branch, default-filling targets the LLM reply omits.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "testmend/gateway.hpp"
#include "testmend/types.hpp"
#include "testmend/util.hpp"

namespace testmend {

struct UncoverInfo {
    std::vector<int> uncovered_lines;
    std::vector<std::pair<int, BranchCount>> partial_branches;
};

inline UncoverInfo extract_uncover_info(const CoverageFacts& facts) {
    UncoverInfo info;
    for (const auto& [line, status] : facts.line_status)
        if (status == LineStatus::not_covered) info.uncovered_lines.push_back(line);
    for (const auto& [line, bc] : facts.branch_status)
        if (bc.covered < bc.total) info.partial_branches.emplace_back(line, bc);
    return info;
}

class SpanMismatch : public Error {
public:
    using Error::Error;
};

// Suffix-comment annotation: every line gains "// COVERED" / "// NOT_COVERED"
// / "// NO_INSTRUCTION"; branch lines additionally gain "// BRANCH: i/n
// covered". Stripping the suffixes restores the source bytes.
inline std::string annotate_coverage(const std::string& focal_source, const CoverageFacts& facts) {
    auto lines = split_lines(focal_source);
    bool trailing_newline = !focal_source.empty() && focal_source.back() == '\n';
    int span = facts.method.line_end - facts.method.line_start + 1;
    if (static_cast<int>(lines.size()) != span)
        throw SpanMismatch("focal source has " + std::to_string(lines.size()) +
                           " lines but method span is " + std::to_string(span));
    for (size_t i = 0; i < lines.size(); ++i) {
        int line_no = facts.method.line_start + static_cast<int>(i);
        LineStatus status = LineStatus::no_instruction;
        if (auto it = facts.line_status.find(line_no); it != facts.line_status.end())
            status = it->second;
        const char* label = status == LineStatus::covered       ? "COVERED"
                            : status == LineStatus::not_covered ? "NOT_COVERED"
                                                                : "NO_INSTRUCTION";
        lines[i] += std::string(" // ") + label;
        if (auto it = facts.branch_status.find(line_no); it != facts.branch_status.end())
            lines[i] += " // BRANCH: " + std::to_string(it->second.covered) + "/" +
                        std::to_string(it->second.total) + " covered";
    }
    std::string out = join_lines(lines);
    if (trailing_newline) out += '\n';
    return out;
}

inline std::string strip_coverage_annotations(const std::string& annotated) {
    std::vector<std::string> out;
    bool trailing_newline = !annotated.empty() && annotated.back() == '\n';
    for (auto line : split_lines(annotated)) {
        static const char* kLabels[] = {" // COVERED", " // NOT_COVERED", " // NO_INSTRUCTION"};
        size_t cut = std::string::npos;
        for (const char* label : kLabels) {
            size_t pos = line.rfind(label);
            if (pos != std::string::npos) cut = std::min(cut, pos);
        }
        if (cut != std::string::npos) line = line.substr(0, cut);
        out.push_back(line);
    }
    std::string result = join_lines(out);
    if (trailing_newline) result += '\n';
    return result;
}

// One instruction per uncovered line and per partial branch, always. The LLM
// tags each easy|hard; omitted targets get a default instruction tagged hard,
// and easy instructions are ordered before hard in the result.
inline std::vector<std::string> analyze_coverage(const CoverageFacts& facts,
                                                 const std::string& focal_source,
                                                 const Gateway& gateway) {
    auto info = extract_uncover_info(facts);
    std::string annotated = annotate_coverage(focal_source, facts);

    std::string targets;
    for (int line : info.uncovered_lines) targets += "LINE " + std::to_string(line) + "\n";
    for (const auto& [line, bc] : info.partial_branches)
        targets += "BRANCH " + std::to_string(line) + " (" + std::to_string(bc.covered) + "/" +
                   std::to_string(bc.total) + " covered)\n";

    std::string reply = gateway.ask("coverage_analyze",
                                    {{"annotated_focal", annotated}, {"targets", targets}});

    struct Parsed {
        std::string tag;
        std::string text;
    };
    std::map<std::string, Parsed> by_target; // "L12" / "B7"
    for (const auto& raw : split_lines(reply)) {
        std::string line = trim(raw);
        bool is_line = starts_with(line, "LINE ");
        bool is_branch = starts_with(line, "BRANCH ");
        if (!is_line && !is_branch) continue;
        std::string rest = trim(line.substr(is_line ? 5 : 7));
        size_t num_end = 0;
        while (num_end < rest.size() && std::isdigit(static_cast<unsigned char>(rest[num_end])))
            ++num_end;
        if (num_end == 0) continue;
        int target = std::stoi(rest.substr(0, num_end));
        std::string tail = trim(rest.substr(num_end));
        std::string tag = "hard"; // unparseable tags default to hard
        if (starts_with(tail, "easy")) {
            tag = "easy";
            tail = trim(tail.substr(4));
        } else if (starts_with(tail, "hard")) {
            tail = trim(tail.substr(4));
        }
        if (starts_with(tail, ":")) tail = trim(tail.substr(1));
        std::string key = (is_line ? "L" : "B") + std::to_string(target);
        if (!by_target.count(key) && !tail.empty()) by_target[key] = {tag, tail};
    }

    std::vector<std::pair<std::string, std::string>> tagged; // (tag, instruction)
    for (int line : info.uncovered_lines) {
        auto it = by_target.find("L" + std::to_string(line));
        if (it != by_target.end())
            tagged.emplace_back(it->second.tag, "line " + std::to_string(line) + " (" +
                                                    it->second.tag + "): " + it->second.text);
        else
            tagged.emplace_back("hard", "line " + std::to_string(line) +
                                            " (hard): construct an input reaching line " +
                                            std::to_string(line));
    }
    for (const auto& [line, bc] : info.partial_branches) {
        auto it = by_target.find("B" + std::to_string(line));
        if (it != by_target.end())
            tagged.emplace_back(it->second.tag, "branch at line " + std::to_string(line) + " (" +
                                                    it->second.tag + "): " + it->second.text);
        else
            tagged.emplace_back(
                "hard", "branch at line " + std::to_string(line) +
                            " (hard): construct an input driving the uncovered direction (" +
                            std::to_string(bc.covered) + "/" + std::to_string(bc.total) +
                            " covered)");
    }

    std::vector<std::string> instructions;
    for (const auto& [tag, text] : tagged)
        if (tag == "easy") instructions.push_back(text);
    for (const auto& [tag, text] : tagged)
        if (tag != "easy") instructions.push_back(text);
    return instructions;
}

} // namespace testmend
