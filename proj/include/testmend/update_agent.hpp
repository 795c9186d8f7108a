#pragma once

// Test update generation: renders the update prompt from the task, filtered
// context and (from iteration 2 on) the merged instruction bundle, and returns
// the raw completion for the coordinator to extract.

#include <string>

#include "testmend/gateway.hpp"
#include "testmend/input_agent.hpp"
#include "testmend/types.hpp"
#include "testmend/util.hpp"

namespace testmend {

// Structured key-value rendering of the bundle for the update prompt.
inline std::string format_instructions(const InstructionBundle& bundle) {
    std::string out = "Update instructions (apply each):\n";
    auto section = [&](const char* key, const std::vector<std::string>& items) {
        out += std::string(key) + ":\n";
        if (items.empty()) out += "- (none)\n";
        for (const auto& item : items) out += "- " + item + "\n";
    };
    section("error_instructions", bundle.error_instructions);
    section("coverage_instructions", bundle.coverage_instructions);
    section("mutation_instructions", bundle.mutation_instructions);
    out += "retrieved_context:\n";
    if (bundle.retrieved_context.empty()) out += "- (none)\n";
    for (const auto& symbol : bundle.retrieved_context)
        out += "- " + symbol.kind + " " + symbol.name + ": " + symbol.signature_or_definition +
               " (import " + symbol.import_path + ", " + symbol.file_path + ")\n";
    return out;
}

// Renders the test_update prompt and returns the raw LLM output. Iteration 1
// carries no instruction section at all; focal_before is embedded only when
// the focal method actually changed.
inline std::string generate_update(const UpdateTask& task, const FilteredContext& context,
                                   const std::optional<InstructionBundle>& instructions,
                                   int iteration, const Gateway& gateway) {
    if (iteration < 1) throw Error("iteration must be >= 1");
    if (iteration == 1 && instructions)
        throw Error("instructions must be absent on iteration 1");
    if (iteration > 1 && !instructions)
        throw Error("instructions required from iteration 2 on");

    std::string methods_text, variables_text, hunks_text;
    for (const auto& m : context.kept_non_test_methods) methods_text += m + "\n---\n";
    for (const auto& v : context.kept_variables) variables_text += v + "\n";
    for (const auto& h : context.kept_hunks) hunks_text += describe_hunk(h);

    bool focal_changed = task.focal_before.source != task.focal_after.source ||
                         task.focal_before.ref != task.focal_after.ref;
    std::string focal_before_section;
    if (focal_changed)
        focal_before_section =
            "\nFocal method before the change:\n" + task.focal_before.source + "\n";

    std::string instruction_section;
    if (instructions) instruction_section = "\n" + format_instructions(*instructions);

    return gateway.ask("test_update", {{"test_code", task.test_before},
                                       {"focal_after", task.focal_after.source},
                                       {"focal_before_section", focal_before_section},
                                       {"non_test_methods", methods_text},
                                       {"class_variables", variables_text},
                                       {"diff_hunks", hunks_text},
                                       {"instructions", instruction_section}});
}

} // namespace testmend
