#pragma once

// Input preprocessing: ranks diff hunks by Test TF-IDF similarity plus
// Repetition, then asks the LLM to discard irrelevant helper methods and
// variables. Only those two hunk signals are used; breakage similarity needs
// manually updated tests and is deliberately absent.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "testmend/gateway.hpp"
#include "testmend/java_source.hpp"
#include "testmend/types.hpp"
#include "testmend/util.hpp"

namespace testmend {

struct FilteredContext {
    std::vector<DiffHunk> kept_hunks; // ranked subset of task.diff_hunks
    std::vector<std::string> kept_non_test_methods;
    std::vector<std::string> kept_variables;
};

struct RankWeights {
    double tfidf = 0.5;
    double repetition = 0.5;
};

namespace detail {

inline std::map<std::string, int> token_counts(const std::vector<std::string>& tokens) {
    std::map<std::string, int> counts;
    for (const auto& t : tokens) ++counts[t];
    return counts;
}

inline double cosine(const std::map<std::string, double>& a,
                     const std::map<std::string, double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (const auto& [t, v] : a) {
        na += v * v;
        auto it = b.find(t);
        if (it != b.end()) dot += v * it->second;
    }
    for (const auto& [t, v] : b) nb += v * v;
    if (na == 0 || nb == 0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

} // namespace detail

// score(h) = w1*norm(tfidf_cos(test, h)) + w2*norm(repetition(h)).
// TF-IDF is computed over the task-local corpus: the test document plus one
// document per hunk (its changed lines). Repetition counts hunks whose
// changed-line token multiset equals the hunk's own. Constant signals
// normalize to 0; ties break by ascending hunk index.
inline std::vector<DiffHunk> rank_hunks(const std::string& test_before,
                                        const std::vector<DiffHunk>& hunks, int k,
                                        RankWeights weights = {}) {
    if (hunks.empty() || k < 1) return {};

    std::vector<std::map<std::string, int>> hunk_counts;
    hunk_counts.reserve(hunks.size());
    for (const auto& h : hunks) {
        std::string changed;
        for (const auto& line : h.changed_lines()) {
            changed += line;
            changed += '\n';
        }
        hunk_counts.push_back(detail::token_counts(tokenize(changed)));
    }
    auto test_counts = detail::token_counts(tokenize(test_before));

    // document frequency over {test} ∪ hunks
    std::map<std::string, int> df;
    for (const auto& [t, c] : test_counts) ++df[t];
    for (const auto& counts : hunk_counts)
        for (const auto& [t, c] : counts) ++df[t];
    double n_docs = 1.0 + static_cast<double>(hunks.size());
    auto idf = [&](const std::string& t) {
        return std::log((1.0 + n_docs) / (1.0 + df.at(t))) + 1.0;
    };
    auto weigh = [&](const std::map<std::string, int>& counts) {
        std::map<std::string, double> vec;
        for (const auto& [t, c] : counts) vec[t] = c * idf(t);
        return vec;
    };
    auto test_vec = weigh(test_counts);

    std::vector<double> tfidf_raw(hunks.size()), rep_raw(hunks.size());
    for (size_t i = 0; i < hunks.size(); ++i)
        tfidf_raw[i] = detail::cosine(test_vec, weigh(hunk_counts[i]));
    for (size_t i = 0; i < hunks.size(); ++i) {
        int reps = 0;
        for (size_t j = 0; j < hunks.size(); ++j)
            if (hunk_counts[j] == hunk_counts[i]) ++reps;
        rep_raw[i] = reps;
    }

    auto minmax_norm = [](std::vector<double>& values) {
        auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
        double lo = *lo_it, span = *hi_it - *lo_it;
        for (auto& v : values) v = span == 0 ? 0.0 : (v - lo) / span;
    };
    minmax_norm(tfidf_raw);
    minmax_norm(rep_raw);

    std::vector<size_t> order(hunks.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<double> score(hunks.size());
    for (size_t i = 0; i < hunks.size(); ++i)
        score[i] = weights.tfidf * tfidf_raw[i] + weights.repetition * rep_raw[i];
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return hunks[a].index < hunks[b].index;
    });

    std::vector<DiffHunk> ranked;
    for (size_t i = 0; i < order.size() && static_cast<int>(i) < k; ++i)
        ranked.push_back(hunks[order[i]]);
    return ranked;
}

inline std::string describe_hunk(const DiffHunk& hunk) {
    std::string out = "hunk " + std::to_string(hunk.index) + " (" + hunk.file_path + "):\n";
    for (const auto& [tag, text] : hunk.lines) {
        char c = tag == LineTag::context ? ' ' : tag == LineTag::add ? '+' : '-';
        out += c + text + "\n";
    }
    return out;
}

inline std::string declared_variable_name(const std::string& decl) {
    std::string head = decl.substr(0, decl.find('='));
    size_t end = head.size();
    while (end > 0 && !java::is_ident_char(head[end - 1])) --end;
    size_t begin = end;
    while (begin > 0 && java::is_ident_char(head[begin - 1])) --begin;
    return head.substr(begin, end - begin);
}

// Asks the LLM which helpers/variables to keep. Reply format is two lines,
// "methods: a, b" and "variables: x, y" ("none" for an empty keep set). Items
// that do not name a task element exactly are dropped; an unparsable reply
// keeps everything.
inline FilteredContext filter_context(const UpdateTask& task,
                                      const std::vector<DiffHunk>& ranked_hunks,
                                      const Gateway& gateway) {
    std::string methods_text, variables_text, hunks_text;
    for (const auto& m : task.non_test_methods) methods_text += m + "\n---\n";
    for (const auto& v : task.class_variables) variables_text += v + "\n";
    for (const auto& h : ranked_hunks) hunks_text += describe_hunk(h);

    std::string reply = gateway.ask("input_filter",
                                    {{"test_code", task.test_before},
                                     {"focal_after", task.focal_after.source},
                                     {"non_test_methods", methods_text},
                                     {"class_variables", variables_text},
                                     {"ranked_hunks", hunks_text}});

    FilteredContext context;
    context.kept_hunks = ranked_hunks;

    auto parse_list = [](const std::string& line) {
        std::vector<std::string> names;
        std::string rest = trim(line.substr(line.find(':') + 1));
        if (rest == "none" || rest.empty()) return names;
        size_t pos = 0;
        while (pos < rest.size()) {
            size_t comma = rest.find(',', pos);
            std::string item = trim(rest.substr(pos, comma == std::string::npos
                                                         ? std::string::npos
                                                         : comma - pos));
            if (!item.empty()) names.push_back(item);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        return names;
    };

    bool saw_methods = false, saw_variables = false;
    std::vector<std::string> keep_methods, keep_variables;
    for (const auto& line : split_lines(reply)) {
        std::string t = trim(line);
        if (starts_with(t, "methods:")) {
            keep_methods = parse_list(t);
            saw_methods = true;
        } else if (starts_with(t, "variables:")) {
            keep_variables = parse_list(t);
            saw_variables = true;
        }
    }
    // An unparsable section falls back to keeping that whole list.
    if (saw_methods) {
        for (const auto& source : task.non_test_methods) {
            std::string name = java::first_method_name(source);
            if (std::find(keep_methods.begin(), keep_methods.end(), name) != keep_methods.end())
                context.kept_non_test_methods.push_back(source);
        }
    } else {
        context.kept_non_test_methods = task.non_test_methods;
    }
    if (saw_variables) {
        for (const auto& decl : task.class_variables) {
            std::string name = declared_variable_name(decl);
            if (std::find(keep_variables.begin(), keep_variables.end(), name) !=
                keep_variables.end())
                context.kept_variables.push_back(decl);
        }
    } else {
        context.kept_variables = task.class_variables;
    }
    return context;
}

} // namespace testmend
