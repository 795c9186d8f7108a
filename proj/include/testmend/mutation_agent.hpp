#pragma once

// Mutation analysis: annotates the focal method with per-mutant statuses and
// emits one instruction per surviving mutant (assertion strengthening) and
// per uncovered mutant (coverage first, so the mutant becomes reachable).

#include <map>
#include <string>
#include <vector>

#include "testmend/gateway.hpp"
#include "testmend/types.hpp"
#include "testmend/util.hpp"

namespace testmend {

inline constexpr const char* kMutantMarker = "// MUTANT[";

struct MutationInfo {
    std::vector<Mutant> survived;
    std::vector<Mutant> uncovered;
};

inline MutationInfo extract_mutation_info(const MutationFacts& facts) {
    MutationInfo info;
    for (const auto& m : facts.mutants) {
        if (m.status == MutantStatus::survived) info.survived.push_back(m);
        else if (m.status == MutantStatus::no_coverage) info.uncovered.push_back(m);
    }
    return info;
}

class MutationSpanMismatch : public Error {
public:
    using Error::Error;
};

// Inserts "// MUTANT[<operator>] <STATUS>: <description>" comment lines above
// each mutant's line, stacked in report order. Insertion-only.
inline std::string annotate_mutations(const std::string& focal_source,
                                      const MutationFacts& facts) {
    auto lines = split_lines(focal_source);
    bool trailing_newline = !focal_source.empty() && focal_source.back() == '\n';
    int span = facts.method.line_end - facts.method.line_start + 1;
    if (static_cast<int>(lines.size()) != span)
        throw MutationSpanMismatch("focal source has " + std::to_string(lines.size()) +
                                   " lines but method span is " + std::to_string(span));

    std::multimap<int, std::string> at_line;
    for (const auto& m : facts.mutants) {
        const char* status = m.status == MutantStatus::no_coverage ? "NO_COVERAGE"
                             : m.status == MutantStatus::survived  ? "SURVIVED"
                                                                   : "KILLED";
        at_line.emplace(m.line, std::string(kMutantMarker) + m.op + "] " + status + ": " +
                                    m.description);
    }

    std::vector<std::string> out;
    for (size_t i = 0; i < lines.size(); ++i) {
        int line_no = facts.method.line_start + static_cast<int>(i);
        auto [begin, end] = at_line.equal_range(line_no);
        for (auto it = begin; it != end; ++it) {
            std::string indent = lines[i].substr(0, lines[i].find_first_not_of(" \t"));
            if (indent.size() == lines[i].size()) indent.clear();
            out.push_back(indent + it->second);
        }
        out.push_back(lines[i]);
    }
    std::string result = join_lines(out);
    if (trailing_newline) result += '\n';
    return result;
}

inline std::string strip_mutation_annotations(const std::string& annotated) {
    std::vector<std::string> out;
    bool trailing_newline = !annotated.empty() && annotated.back() == '\n';
    for (const auto& line : split_lines(annotated)) {
        if (starts_with(trim(line), kMutantMarker)) continue;
        out.push_back(line);
    }
    std::string result = join_lines(out);
    if (trailing_newline) result += '\n';
    return result;
}

// One instruction per non-killed mutant, always: the prompt numbers them and
// the reply is matched per mutant ("MUTANT <k>: ..."); omissions are
// default-filled.
inline std::vector<std::string> analyze_mutations(const MutationFacts& facts,
                                                  const std::string& focal_source,
                                                  const Gateway& gateway) {
    auto info = extract_mutation_info(facts);
    std::string annotated = annotate_mutations(focal_source, facts);

    std::vector<Mutant> targets = info.survived;
    targets.insert(targets.end(), info.uncovered.begin(), info.uncovered.end());

    std::string listing;
    for (size_t i = 0; i < targets.size(); ++i) {
        const auto& m = targets[i];
        listing += "MUTANT " + std::to_string(i + 1) + " [" + m.op + "] " +
                   (m.status == MutantStatus::survived ? "SURVIVED" : "NO_COVERAGE") + " at line " +
                   std::to_string(m.line) + ": " + m.description + "\n";
    }

    std::string reply = gateway.ask("mutation_analyze",
                                    {{"annotated_focal", annotated}, {"mutants", listing}});

    std::map<int, std::string> by_index;
    for (const auto& raw : split_lines(reply)) {
        std::string line = trim(raw);
        if (!starts_with(line, "MUTANT ")) continue;
        std::string rest = trim(line.substr(7));
        size_t num_end = 0;
        while (num_end < rest.size() && std::isdigit(static_cast<unsigned char>(rest[num_end])))
            ++num_end;
        if (num_end == 0) continue;
        int idx = std::stoi(rest.substr(0, num_end));
        std::string text = trim(rest.substr(num_end));
        if (starts_with(text, ":")) text = trim(text.substr(1));
        if (!text.empty() && !by_index.count(idx)) by_index[idx] = text;
    }

    std::vector<std::string> instructions;
    for (size_t i = 0; i < targets.size(); ++i) {
        const auto& m = targets[i];
        auto it = by_index.find(static_cast<int>(i + 1));
        std::string prefix = "mutant [" + m.op + "] at line " + std::to_string(m.line) + ": ";
        if (it != by_index.end()) {
            instructions.push_back(prefix + it->second);
        } else if (m.status == MutantStatus::survived) {
            instructions.push_back(prefix +
                                   "strengthen or add an assertion that detects this mutant (" +
                                   m.description + ")");
        } else {
            instructions.push_back(prefix + "cover line " + std::to_string(m.line) +
                                   " so the mutant is reachable");
        }
    }
    return instructions;
}

} // namespace testmend
