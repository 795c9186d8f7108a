#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace testmend {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Percentages are stored and compared at 2-decimal precision.
inline double round2(double v) {
    return std::round(v * 100.0) / 100.0;
}

inline std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            if (pos < text.size()) lines.emplace_back(text.substr(pos));
            break;
        }
        lines.emplace_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return lines;
}

inline std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (size_t i = 0; i < lines.size(); ++i) {
        out += lines[i];
        if (i + 1 < lines.size()) out += '\n';
    }
    return out;
}

// Identifier tokenizer used for hunk ranking, n-gram overlap and the hash
// embedder: split on non-alphanumerics and camelCase boundaries, lowercase,
// no stemming.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string word;
    auto flush_word = [&]() {
        if (word.empty()) return;
        // camelCase / PascalCase / ALLCaps boundaries
        std::string cur;
        for (size_t i = 0; i < word.size(); ++i) {
            char c = word[i];
            bool upper = std::isupper(static_cast<unsigned char>(c));
            if (upper && !cur.empty()) {
                bool prev_lower = std::islower(static_cast<unsigned char>(word[i - 1]));
                bool next_lower = i + 1 < word.size() &&
                                  std::islower(static_cast<unsigned char>(word[i + 1]));
                if (prev_lower || (next_lower && std::isupper(static_cast<unsigned char>(word[i - 1])))) {
                    tokens.push_back(cur);
                    cur.clear();
                }
            }
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
        if (!cur.empty()) tokens.push_back(cur);
        word.clear();
    };
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            word += c;
        } else {
            flush_word();
        }
    }
    flush_word();
    return tokens;
}

// FNV-1a 64-bit: stable across platforms, used for replay keys.
inline uint64_t fnv1a64(std::string_view data, uint64_t seed = 0xcbf29ce484222325ULL) {
    uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string to_hex(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

inline bool starts_with(std::string_view s, std::string_view prefix) {
    return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

inline bool contains(std::string_view s, std::string_view needle) {
    return s.find(needle) != std::string_view::npos;
}

} // namespace testmend
