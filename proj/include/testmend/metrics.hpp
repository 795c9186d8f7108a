#pragma once

// Aggregate session metrics (compilation/test pass rates and coverage /
// mutation means over passing sessions) plus the n-gram overlap diagnostic.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "testmend/types.hpp"
#include "testmend/util.hpp"

namespace testmend {

struct MetricsSummary {
    int sessions = 0;
    double cpr = 0.0; // % of sessions whose best compiled
    double tpr = 0.0; // % of sessions whose best passed
    // Means over sessions whose best passed; absent when none did, since these
    // metrics require the updated test to execute.
    std::optional<double> mean_line_cov;
    std::optional<double> mean_branch_cov;
    std::optional<double> mean_mutation_score;
};

inline MetricsSummary aggregate_metrics(const std::vector<SessionResult>& results) {
    if (results.empty()) throw Error("aggregate_metrics: empty input");
    MetricsSummary summary;
    summary.sessions = static_cast<int>(results.size());
    int compiled = 0, passed = 0;
    double line_sum = 0, branch_sum = 0, mutation_sum = 0;
    for (const auto& r : results) {
        if (r.best_outcome.phase_reached != Phase::compile_failed) ++compiled;
        if (r.best_outcome.phase_reached == Phase::passed) {
            ++passed;
            if (r.best_outcome.coverage) {
                line_sum += r.best_outcome.coverage->line_coverage_pct;
                branch_sum += r.best_outcome.coverage->branch_coverage_pct;
            }
            if (r.best_outcome.mutation)
                mutation_sum += r.best_outcome.mutation->mutation_score_pct;
        }
    }
    summary.cpr = round2(100.0 * compiled / summary.sessions);
    summary.tpr = round2(100.0 * passed / summary.sessions);
    if (passed > 0) {
        summary.mean_line_cov = round2(line_sum / passed);
        summary.mean_branch_cov = round2(branch_sum / passed);
        summary.mean_mutation_score = round2(mutation_sum / passed);
    }
    return summary;
}

inline std::string format_metrics(const MetricsSummary& m) {
    auto opt = [](const std::optional<double>& v) {
        return v ? std::to_string(round2(*v)) : std::string("n/a");
    };
    std::string out;
    out += "sessions:        " + std::to_string(m.sessions) + "\n";
    out += "CPR:             " + std::to_string(m.cpr) + "\n";
    out += "TPR:             " + std::to_string(m.tpr) + "\n";
    out += "mean line cov:   " + opt(m.mean_line_cov) + "\n";
    out += "mean branch cov: " + opt(m.mean_branch_cov) + "\n";
    out += "mean mut score:  " + opt(m.mean_mutation_score) + "\n";
    return out;
}

// Token-level n-gram overlap: |distinct generated n-grams ∩ distinct
// reference n-grams| / |distinct generated n-grams|. Texts shorter than n
// contribute nothing; no generated n-grams yields 0.
inline double ngram_overlap(const std::vector<std::string>& generated,
                            const std::vector<std::string>& reference, int n = 4) {
    if (n < 1) throw Error("ngram_overlap: n must be >= 1");
    auto grams_of = [n](const std::vector<std::string>& texts) {
        std::set<std::string> grams;
        for (const auto& text : texts) {
            auto tokens = tokenize(text);
            if (static_cast<int>(tokens.size()) < n) continue;
            for (size_t i = 0; i + static_cast<size_t>(n) <= tokens.size(); ++i) {
                std::string gram;
                for (size_t j = 0; j < static_cast<size_t>(n); ++j) {
                    gram += tokens[i + j];
                    gram += '\x1f';
                }
                grams.insert(std::move(gram));
            }
        }
        return grams;
    };
    auto gen = grams_of(generated);
    if (gen.empty()) return 0.0;
    auto ref = grams_of(reference);
    size_t shared = 0;
    for (const auto& g : gen)
        if (ref.count(g)) ++shared;
    return static_cast<double>(shared) / static_cast<double>(gen.size());
}

} // namespace testmend
