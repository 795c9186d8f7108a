#pragma once

// Error analysis: turns build/test diagnostics into localized repair
// instructions. Known symbols resolve against a bundled catalog without any
// LLM or retriever involvement; unknown symbols go through semantic retrieval;
// assertion failures are annotated into the test and revised via the LLM.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "testmend/gateway.hpp"
#include "testmend/retriever.hpp"
#include "testmend/types.hpp"
#include "testmend/util.hpp"

namespace testmend {

// Annotation markers are fixed constants so golden tests and prompts stay stable.
inline constexpr const char* kErrorMarker = "// ERROR: ";
inline constexpr const char* kAssertionMarker = "// ASSERTION FAILED: ";

struct CatalogEntry {
    std::string kind; // method | field | class
    std::string import_path;
};

// Predefined known symbols (standard library, test frameworks). Lookup is
// exact and case-sensitive; extensible from a data file.
class KnownSymbolCatalog {
public:
    static KnownSymbolCatalog bundled() {
        KnownSymbolCatalog c;
        // JUnit 4/5 assertions and annotations
        for (const char* name : {"assertEquals", "assertTrue", "assertFalse", "assertNull",
                                 "assertNotNull", "assertSame", "assertNotSame", "assertArrayEquals",
                                 "fail", "assertThrows"})
            c.entries_[name] = {"method", std::string("static org.junit.Assert.") + name};
        c.entries_["Test"] = {"class", "org.junit.Test"};
        c.entries_["Before"] = {"class", "org.junit.Before"};
        c.entries_["After"] = {"class", "org.junit.After"};
        // core JDK
        c.entries_["List"] = {"class", "java.util.List"};
        c.entries_["ArrayList"] = {"class", "java.util.ArrayList"};
        c.entries_["Map"] = {"class", "java.util.Map"};
        c.entries_["HashMap"] = {"class", "java.util.HashMap"};
        c.entries_["Set"] = {"class", "java.util.Set"};
        c.entries_["HashSet"] = {"class", "java.util.HashSet"};
        c.entries_["Arrays"] = {"class", "java.util.Arrays"};
        c.entries_["Collections"] = {"class", "java.util.Collections"};
        c.entries_["Optional"] = {"class", "java.util.Optional"};
        c.entries_["Objects"] = {"class", "java.util.Objects"};
        c.entries_["IOException"] = {"class", "java.io.IOException"};
        c.entries_["File"] = {"class", "java.io.File"};
        return c;
    }

    // Data file: one "symbol kind import..." per line ('#' comments); the
    // import field is the rest of the line, so static imports work. Later
    // entries override earlier ones.
    void load(const std::filesystem::path& path) {
        for (const auto& line : split_lines(read_file(path))) {
            std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            std::istringstream in(t);
            std::string symbol, kind;
            if (!(in >> symbol >> kind)) continue;
            std::string import_path;
            std::getline(in, import_path);
            import_path = trim(import_path);
            if (!import_path.empty()) entries_[symbol] = {kind, import_path};
        }
    }

    std::optional<CatalogEntry> lookup(const std::string& symbol) const {
        auto it = entries_.find(symbol);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    size_t size() const { return entries_.size(); }

private:
    std::map<std::string, CatalogEntry> entries_;
};

struct SymbolPartition {
    std::vector<std::pair<std::string, CatalogEntry>> known;
    std::vector<std::string> unknown;
};

inline SymbolPartition distinguish_unknown_symbols(const std::vector<std::string>& symbols,
                                                   const KnownSymbolCatalog& catalog) {
    SymbolPartition partition;
    for (const auto& symbol : symbols) {
        if (auto entry = catalog.lookup(symbol))
            partition.known.emplace_back(symbol, *entry);
        else
            partition.unknown.push_back(symbol);
    }
    return partition;
}

// Inserts one comment line above each diagnosed line (indented to match);
// diagnostics without a line number append to a trailing comment block.
// Insertion-only: deleting the inserted lines restores the input.
inline std::string annotate_errors(const std::string& test_code,
                                   const std::vector<Diagnostic>& diagnostics) {
    auto lines = split_lines(test_code);
    bool trailing_newline = !test_code.empty() && test_code.back() == '\n';
    std::multimap<int, std::string> at_line; // keeps diagnostic order per line
    std::vector<std::string> trailing;

    for (const auto& d : diagnostics) {
        std::string comment;
        if (d.kind == DiagnosticKind::assertion_failure) {
            comment = kAssertionMarker;
            if (d.expected || d.actual)
                comment += "expected " + d.expected.value_or("?") + " but was " +
                           d.actual.value_or("?");
            else
                comment += d.message;
        } else {
            comment = kErrorMarker + d.message;
        }
        if (d.line && *d.line >= 1 && *d.line <= static_cast<int>(lines.size()))
            at_line.emplace(*d.line, comment);
        else
            trailing.push_back(comment);
    }

    std::vector<std::string> out;
    for (size_t i = 0; i < lines.size(); ++i) {
        auto [begin, end] = at_line.equal_range(static_cast<int>(i + 1));
        for (auto it = begin; it != end; ++it) {
            std::string indent = lines[i].substr(0, lines[i].find_first_not_of(" \t"));
            if (indent.size() == lines[i].size()) indent.clear();
            out.push_back(indent + it->second);
        }
        out.push_back(lines[i]);
    }
    for (const auto& comment : trailing) out.push_back(comment);

    std::string result = join_lines(out);
    if (trailing_newline) result += '\n';
    return result;
}

// Removes every line inserted by annotate_errors.
inline std::string strip_error_annotations(const std::string& annotated) {
    auto lines = split_lines(annotated);
    bool trailing_newline = !annotated.empty() && annotated.back() == '\n';
    std::vector<std::string> out;
    for (const auto& line : lines) {
        std::string t = trim(line);
        if (starts_with(t, kErrorMarker) || starts_with(t, kAssertionMarker)) continue;
        out.push_back(line);
    }
    std::string result = join_lines(out);
    if (trailing_newline) result += '\n';
    return result;
}

struct ErrorAnalysis {
    std::vector<std::string> instructions;
    std::vector<ResolvedSymbol> retrieved;
};

// Produces structured repair instructions for a failed outcome. test_code is
// the candidate that was executed (diagnostic lines are relative to it).
inline ErrorAnalysis analyze_errors(const ExecutionOutcome& outcome, const std::string& test_code,
                                    const UpdateTask& task, const KnownSymbolCatalog& catalog,
                                    Retriever& retriever, RetrievalBudget& budget,
                                    const Gateway& gateway) {
    ErrorAnalysis analysis;

    std::vector<std::string> symbols;
    bool needs_llm = false;
    for (const auto& d : outcome.diagnostics) {
        if (d.kind == DiagnosticKind::compile_error) {
            if (d.symbol) {
                if (std::find(symbols.begin(), symbols.end(), *d.symbol) == symbols.end())
                    symbols.push_back(*d.symbol);
            } else {
                needs_llm = true; // symbol-less compile error: let the model read it
            }
        } else {
            needs_llm = true; // assertion or runtime failure
        }
    }

    auto partition = distinguish_unknown_symbols(symbols, catalog);
    for (const auto& [symbol, entry] : partition.known)
        analysis.instructions.push_back("add import " + entry.import_path + " for symbol " +
                                        symbol);

    if (!partition.unknown.empty()) {
        auto result = retriever.resolve_symbols(partition.unknown, task, budget, gateway);
        for (const auto& [queried, resolved] : result.resolved) {
            if (resolved.name == queried)
                analysis.instructions.push_back(
                    "symbol " + queried + " exists: import " + resolved.import_path +
                    "; declaration: " + resolved.signature_or_definition);
            else
                analysis.instructions.push_back(
                    "replace hallucinated symbol " + queried + " with " + resolved.name +
                    ", import " + resolved.import_path);
            analysis.retrieved.push_back(resolved);
        }
        for (const auto& symbol : result.unresolved)
            analysis.instructions.push_back("symbol unresolved: consider removing or re-deriving " +
                                            symbol);
    }

    if (needs_llm) {
        std::string annotated = annotate_errors(test_code, outcome.diagnostics);
        std::string failures;
        for (const auto& d : outcome.diagnostics) {
            if (d.kind == DiagnosticKind::compile_error && d.symbol) continue;
            failures += to_string(d.kind) + ": " + d.message;
            if (d.expected) failures += " | expected: " + *d.expected;
            if (d.actual) failures += " | actual: " + *d.actual;
            failures += '\n';
        }
        std::string reply = gateway.ask("error_analyze",
                                        {{"annotated_test", annotated}, {"failures", failures}});
        for (const auto& line : split_lines(reply)) {
            std::string t = trim(line);
            if (!t.empty()) analysis.instructions.push_back(t);
        }
    }
    return analysis;
}

} // namespace testmend
