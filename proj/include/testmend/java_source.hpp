#pragma once

// Lexical Java source handling: method/field declaration extraction, call-site
// extraction, javadoc capture, method replacement and import insertion. This
// is deliberately not an AST parser; full language checking is delegated to
// the compiler via the build adapter.

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "testmend/util.hpp"

namespace testmend::java {

// Comment and string/char literal contents blanked with spaces; newlines and
// all offsets preserved.
inline std::string mask_source(std::string_view src) {
    std::string out(src);
    enum class State { code, line_comment, block_comment, string_lit, char_lit } state = State::code;
    for (size_t i = 0; i < src.size(); ++i) {
        char c = src[i];
        char next = i + 1 < src.size() ? src[i + 1] : '\0';
        switch (state) {
            case State::code:
                if (c == '/' && next == '/') {
                    state = State::line_comment;
                    out[i] = out[i + 1] = ' ';
                    ++i;
                } else if (c == '/' && next == '*') {
                    state = State::block_comment;
                    out[i] = out[i + 1] = ' ';
                    ++i;
                } else if (c == '"') {
                    state = State::string_lit;
                } else if (c == '\'') {
                    state = State::char_lit;
                }
                break;
            case State::line_comment:
                if (c == '\n') state = State::code;
                else out[i] = ' ';
                break;
            case State::block_comment:
                if (c == '*' && next == '/') {
                    out[i] = out[i + 1] = ' ';
                    state = State::code;
                    ++i;
                } else if (c != '\n') {
                    out[i] = ' ';
                }
                break;
            case State::string_lit:
                if (c == '\\') {
                    out[i] = ' ';
                    if (i + 1 < src.size() && src[i + 1] != '\n') out[i + 1] = ' ';
                    ++i;
                } else if (c == '"') {
                    state = State::code;
                } else if (c != '\n') {
                    out[i] = ' ';
                }
                break;
            case State::char_lit:
                if (c == '\\') {
                    out[i] = ' ';
                    if (i + 1 < src.size() && src[i + 1] != '\n') out[i + 1] = ' ';
                    ++i;
                } else if (c == '\'') {
                    state = State::code;
                } else if (c != '\n') {
                    out[i] = ' ';
                }
                break;
        }
    }
    return out;
}

inline bool brace_balanced(std::string_view src) {
    std::string masked = mask_source(src);
    long depth = 0;
    for (char c : masked) {
        if (c == '{') ++depth;
        if (c == '}') --depth;
        if (depth < 0) return false;
    }
    return depth == 0;
}

inline bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

inline bool is_java_keyword(std::string_view word) {
    static const std::set<std::string, std::less<>> keywords = {
        "if", "for", "while", "switch", "catch", "return", "new", "synchronized",
        "assert", "this", "super", "do", "else", "try", "throw", "throws", "case",
        "instanceof", "class", "interface", "enum", "extends", "implements"};
    return keywords.count(word) > 0;
}

inline int line_of_offset(std::string_view src, size_t offset) {
    return 1 + static_cast<int>(std::count(src.begin(), src.begin() + static_cast<long>(offset), '\n'));
}

inline std::string package_of(std::string_view src) {
    std::string masked = mask_source(src);
    size_t pos = masked.find("package");
    while (pos != std::string::npos) {
        bool word_start = pos == 0 || !is_ident_char(masked[pos - 1]);
        bool word_end = pos + 7 < masked.size() && !is_ident_char(masked[pos + 7]);
        if (word_start && word_end) {
            size_t semi = masked.find(';', pos);
            if (semi == std::string::npos) return "";
            return trim(std::string(src.substr(pos + 7, semi - pos - 7)));
        }
        pos = masked.find("package", pos + 1);
    }
    return "";
}

inline std::string top_level_class_name(std::string_view src) {
    std::string masked = mask_source(src);
    for (const char* kw : {"class", "interface", "enum"}) {
        size_t pos = 0;
        while ((pos = masked.find(kw, pos)) != std::string::npos) {
            size_t kwlen = std::string_view(kw).size();
            bool word_start = pos == 0 || !is_ident_char(masked[pos - 1]);
            bool word_end = pos + kwlen < masked.size() && !is_ident_char(masked[pos + kwlen]);
            if (word_start && word_end) {
                size_t name_start = pos + kwlen;
                while (name_start < masked.size() &&
                       std::isspace(static_cast<unsigned char>(masked[name_start])))
                    ++name_start;
                size_t name_end = name_start;
                while (name_end < masked.size() && is_ident_char(masked[name_end])) ++name_end;
                if (name_end > name_start)
                    return std::string(src.substr(name_start, name_end - name_start));
            }
            pos += kwlen;
        }
    }
    return "";
}

struct Member {
    std::string kind; // "method" or "field"
    std::string name;
    std::string signature;             // declaration text up to the parameter list / semicolon
    std::vector<std::string> param_types;
    int line_start = 0;
    int line_end = 0;
    std::string doc;                   // javadoc interior text, empty when absent
    size_t decl_offset = 0;            // offset of the declaration start in the file
    size_t end_offset = 0;             // offset just past the body '}' or ';'
};

namespace detail {

// Splits a parameter list on top-level commas, honoring <> and () nesting.
inline std::vector<std::string> split_params(std::string_view params) {
    std::vector<std::string> out;
    int angle = 0, paren = 0;
    std::string cur;
    for (char c : params) {
        if (c == '<') ++angle;
        if (c == '>') --angle;
        if (c == '(') ++paren;
        if (c == ')') --paren;
        if (c == ',' && angle == 0 && paren == 0) {
            if (!trim(cur).empty()) out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
}

inline std::string param_type_of(std::string_view param) {
    // drop annotations and 'final', then everything except the last identifier
    std::string p = trim(param);
    std::vector<std::string> words;
    std::string cur;
    int angle = 0;
    for (char c : p) {
        if (c == '<') ++angle;
        if (c == '>') --angle;
        if (std::isspace(static_cast<unsigned char>(c)) && angle == 0) {
            if (!cur.empty()) words.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) words.push_back(cur);
    std::vector<std::string> kept;
    for (const auto& w : words) {
        if (w == "final" || (!w.empty() && w[0] == '@')) continue;
        kept.push_back(w);
    }
    if (kept.size() <= 1) return kept.empty() ? std::string() : kept[0];
    kept.pop_back(); // parameter name
    std::string type;
    for (const auto& w : kept) {
        if (!type.empty()) type += ' ';
        type += w;
    }
    return type;
}

// Walks back from a declaration to the start of its modifier/type tokens.
inline size_t decl_start(const std::string& masked, size_t ident_start) {
    size_t pos = ident_start;
    while (pos > 0) {
        char c = masked[pos - 1];
        if (c == ';' || c == '{' || c == '}') break;
        --pos;
    }
    while (pos < ident_start && std::isspace(static_cast<unsigned char>(masked[pos]))) ++pos;
    return pos;
}

inline std::string javadoc_above(std::string_view src, const std::string& masked, size_t decl) {
    // skip blank and annotation lines upward in the original text
    size_t pos = decl;
    while (pos > 0) {
        size_t search_from = pos - 1;
        if (src[search_from] == '\n') { // pos sits at a line start
            if (search_from == 0) return "";
            --search_from;
        }
        size_t nl = src.rfind('\n', search_from);
        size_t line_start = nl == std::string_view::npos ? 0 : nl + 1;
        std::string line = trim(src.substr(line_start, pos - line_start));
        if (!line.empty() && line[0] != '@') break;
        if (line_start == 0) return "";
        pos = line_start;
    }
    // the block must end right above and open with "/**"
    std::string before = trim(src.substr(0, pos));
    if (before.size() < 2 || before.substr(before.size() - 2) != "*/") return "";
    size_t block_end = src.rfind("*/", pos);
    size_t block_start = src.rfind("/*", block_end == 0 ? 0 : block_end - 1);
    if (block_start == std::string_view::npos ||
        src.substr(block_start, 3) != "/**") return "";
    std::string body(src.substr(block_start + 3, block_end - block_start - 3));
    // strip leading '*' gutters
    std::string out;
    for (auto& line : split_lines(body)) {
        std::string t = trim(line);
        if (starts_with(t, "*")) t = trim(t.substr(1));
        if (!t.empty()) {
            if (!out.empty()) out += ' ';
            out += t;
        }
    }
    (void)masked;
    return out;
}

} // namespace detail

// Extracts method and field declarations of the top-level class (brace depth 1).
inline std::vector<Member> extract_members(std::string_view src) {
    std::vector<Member> members;
    std::string masked = mask_source(src);
    int depth = 0;
    size_t stmt_start = std::string::npos; // potential field decl start at depth 1
    for (size_t i = 0; i < masked.size(); ++i) {
        char c = masked[i];
        if (c == '{') {
            ++depth;
            stmt_start = std::string::npos;
            continue;
        }
        if (c == '}') {
            --depth;
            stmt_start = std::string::npos;
            continue;
        }
        if (depth != 1) continue;
        if (c == ';') {
            // field declaration candidate
            if (stmt_start != std::string::npos) {
                std::string stmt = trim(std::string(src.substr(stmt_start, i - stmt_start)));
                std::string masked_stmt = trim(masked.substr(stmt_start, i - stmt_start));
                if (!masked_stmt.empty() && masked_stmt[0] != '@' &&
                    masked_stmt.find('(') == std::string::npos &&
                    !starts_with(masked_stmt, "package") && !starts_with(masked_stmt, "import")) {
                    // name = last identifier before '=' (or end)
                    std::string head = masked_stmt.substr(0, masked_stmt.find('='));
                    size_t end = head.size();
                    while (end > 0 && !is_ident_char(head[end - 1])) --end;
                    size_t begin = end;
                    while (begin > 0 && is_ident_char(head[begin - 1])) --begin;
                    if (end > begin) {
                        Member m;
                        m.kind = "field";
                        m.name = head.substr(begin, end - begin);
                        m.signature = stmt;
                        m.line_start = line_of_offset(src, stmt_start);
                        m.line_end = line_of_offset(src, i);
                        m.doc = detail::javadoc_above(src, masked, stmt_start);
                        m.decl_offset = stmt_start;
                        m.end_offset = i + 1;
                        members.push_back(std::move(m));
                    }
                }
            }
            stmt_start = std::string::npos;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (stmt_start == std::string::npos) stmt_start = i;
        if (!is_ident_char(c)) continue;
        // scan the identifier
        size_t ident_start = i;
        while (i < masked.size() && is_ident_char(masked[i])) ++i;
        size_t ident_end = i;
        size_t j = ident_end;
        while (j < masked.size() && std::isspace(static_cast<unsigned char>(masked[j]))) ++j;
        if (j >= masked.size() || masked[j] != '(') {
            i = ident_end - 1;
            continue;
        }
        // method candidate: match the parameter list
        int parens = 0;
        size_t k = j;
        for (; k < masked.size(); ++k) {
            if (masked[k] == '(') ++parens;
            if (masked[k] == ')') {
                --parens;
                if (parens == 0) break;
            }
        }
        if (k >= masked.size()) break;
        size_t after = k + 1;
        while (after < masked.size() &&
               (std::isspace(static_cast<unsigned char>(masked[after])) ||
                is_ident_char(masked[after]) || masked[after] == ',' || masked[after] == '.'))
            ++after; // skip a throws clause
        if (after < masked.size() && (masked[after] == '{' || masked[after] == ';')) {
            std::string name(src.substr(ident_start, ident_end - ident_start));
            if (!is_java_keyword(name)) {
                Member m;
                m.kind = "method";
                m.name = name;
                size_t start = detail::decl_start(masked, ident_start);
                m.signature = trim(std::string(src.substr(start, k + 1 - start)));
                for (const auto& p :
                     detail::split_params(std::string_view(masked).substr(j + 1, k - j - 1)))
                    m.param_types.push_back(detail::param_type_of(p));
                m.line_start = line_of_offset(src, start);
                m.decl_offset = start;
                if (masked[after] == '{') {
                    int body = 0;
                    size_t b = after;
                    for (; b < masked.size(); ++b) {
                        if (masked[b] == '{') ++body;
                        if (masked[b] == '}') {
                            --body;
                            if (body == 0) break;
                        }
                    }
                    m.line_end = line_of_offset(src, std::min(b, masked.size() - 1));
                    m.end_offset = std::min(b + 1, masked.size());
                    i = b; // resume after the body
                } else {
                    m.line_end = line_of_offset(src, after);
                    m.end_offset = after + 1;
                    i = after;
                }
                m.doc = detail::javadoc_above(src, masked, start);
                members.push_back(std::move(m));
                stmt_start = std::string::npos;
                continue;
            }
        }
        i = ident_end - 1;
    }
    return members;
}

inline std::optional<Member> find_method(std::string_view src, std::string_view name) {
    for (auto& m : extract_members(src))
        if (m.kind == "method" && m.name == name) return m;
    return std::nullopt;
}

inline std::string first_method_name(std::string_view method_source) {
    // wrap in a class so the member scanner sees it at depth 1
    std::string wrapped = "class W {\n" + std::string(method_source) + "\n}";
    for (const auto& m : extract_members(wrapped))
        if (m.kind == "method") return m.name;
    return "";
}

// Method names invoked inside a method body (lexical, receiver-aware: 'new'
// targets and the declaration itself are excluded).
inline std::vector<std::string> extract_call_names(std::string_view method_source) {
    std::string masked = mask_source(method_source);
    std::vector<std::string> calls;
    std::set<std::string> seen;
    size_t body_start = masked.find('{'); // skip the signature
    if (body_start == std::string::npos) body_start = 0;
    std::string prev_word;
    for (size_t i = body_start; i < masked.size(); ++i) {
        if (!is_ident_char(masked[i])) continue;
        size_t start = i;
        while (i < masked.size() && is_ident_char(masked[i])) ++i;
        std::string word = masked.substr(start, i - start);
        size_t j = i;
        while (j < masked.size() && std::isspace(static_cast<unsigned char>(masked[j]))) ++j;
        if (j < masked.size() && masked[j] == '(' && !is_java_keyword(word) &&
            prev_word != "new") {
            if (seen.insert(word).second) calls.push_back(word);
        }
        prev_word = word;
        --i;
    }
    return calls;
}

// Canonical import line for either "a.b.C" or "import a.b.C;" inputs.
inline std::string canonical_import(std::string_view decl) {
    std::string s = trim(decl);
    if (starts_with(s, "import")) s = trim(s.substr(6));
    if (!s.empty() && s.back() == ';') s = trim(s.substr(0, s.size() - 1));
    return "import " + s + ";";
}

// Inserts imports after the existing import block (or the package line),
// skipping ones already present.
inline std::string insert_imports(const std::string& file_text,
                                  const std::vector<std::string>& imports) {
    if (imports.empty()) return file_text;
    auto lines = split_lines(file_text);
    bool had_trailing_newline = !file_text.empty() && file_text.back() == '\n';
    std::set<std::string> existing;
    long last_import = -1, package_line = -1;
    for (size_t i = 0; i < lines.size(); ++i) {
        std::string t = trim(lines[i]);
        if (starts_with(t, "import ")) {
            existing.insert(canonical_import(t));
            last_import = static_cast<long>(i);
        } else if (starts_with(t, "package ")) {
            package_line = static_cast<long>(i);
        }
    }
    std::vector<std::string> to_add;
    for (const auto& imp : imports) {
        std::string canon = canonical_import(imp);
        if (!existing.count(canon)) {
            to_add.push_back(canon);
            existing.insert(canon);
        }
    }
    if (to_add.empty()) return file_text;
    long insert_at = last_import >= 0 ? last_import + 1
                   : package_line >= 0 ? package_line + 1
                                       : 0;
    lines.insert(lines.begin() + insert_at, to_add.begin(), to_add.end());
    std::string out = join_lines(lines);
    if (had_trailing_newline) out += '\n';
    return out;
}

class MethodNotFound : public Error {
public:
    using Error::Error;
};

// Replaces the named method (including contiguous annotation lines above it)
// with new_source. Replacement is whole-line: the span starts at the beginning
// of the topmost annotation/declaration line and ends after the body.
inline std::string replace_method(const std::string& file_text, std::string_view method_name,
                                  const std::string& new_source) {
    auto member = find_method(file_text, method_name);
    if (!member)
        throw MethodNotFound("method not found in file: " + std::string(method_name));
    size_t line_start = file_text.rfind('\n', member->decl_offset == 0 ? 0 : member->decl_offset - 1);
    line_start = line_start == std::string::npos ? 0 : line_start + 1;
    while (line_start > 0) {
        size_t prev_end = line_start - 1; // '\n' terminating the previous line
        size_t prev_start = prev_end == 0 ? 0 : file_text.rfind('\n', prev_end - 1);
        prev_start = prev_start == std::string::npos ? 0 : prev_start + 1;
        std::string prev = trim(file_text.substr(prev_start, prev_end - prev_start));
        if (!starts_with(prev, "@")) break;
        line_start = prev_start;
    }
    return file_text.substr(0, line_start) + new_source + file_text.substr(member->end_offset);
}

// Parameter count of a JVM method descriptor like "(ZLjava/lang/String;[I)V".
inline int descriptor_param_count(std::string_view desc) {
    size_t open = desc.find('(');
    size_t close = desc.find(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open)
        return -1;
    int count = 0;
    for (size_t i = open + 1; i < close;) {
        while (i < close && desc[i] == '[') ++i;
        if (i >= close) break;
        if (desc[i] == 'L') {
            size_t semi = desc.find(';', i);
            if (semi == std::string_view::npos || semi > close) return -1;
            i = semi + 1;
        } else {
            ++i;
        }
        ++count;
    }
    return count;
}

} // namespace testmend::java
