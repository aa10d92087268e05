#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "seedabsa/common.hpp"

// Minimal Unicode-aware text handling: UTF-8 decoding, case folding and
// word-character classification for the Latin, Greek and Cyrillic ranges
// that cover the supported review languages. No locale dependency.

namespace seedabsa {

inline char32_t decode_utf8(std::string_view s, std::size_t& i) {
    const unsigned char c0 = s[i];
    if (c0 < 0x80) { ++i; return c0; }
    auto cont = [&](std::size_t k) {
        return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
    };
    if ((c0 & 0xE0) == 0xC0 && cont(1)) {
        char32_t cp = (c0 & 0x1Fu) << 6 | (s[i + 1] & 0x3Fu);
        i += 2;
        return cp;
    }
    if ((c0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
        char32_t cp = (c0 & 0x0Fu) << 12 | (s[i + 1] & 0x3Fu) << 6 | (s[i + 2] & 0x3Fu);
        i += 3;
        return cp;
    }
    if ((c0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
        char32_t cp = (c0 & 0x07u) << 18 | (s[i + 1] & 0x3Fu) << 12 | (s[i + 2] & 0x3Fu) << 6 |
                      (s[i + 3] & 0x3Fu);
        i += 4;
        return cp;
    }
    ++i; // invalid byte
    return 0xFFFD;
}

inline void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

inline bool is_word_char(char32_t c) {
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9')) return true;
    if (c >= 0x00C0 && c <= 0x00FF) return c != 0x00D7 && c != 0x00F7; // Latin-1 letters
    if (c >= 0x0100 && c <= 0x024F) return true;                      // Latin Extended-A/B
    if (c >= 0x0386 && c <= 0x03FF) return c != 0x0387;               // Greek
    if (c >= 0x0400 && c <= 0x04FF) return true;                      // Cyrillic
    return false;
}

inline char32_t to_lower(char32_t c) {
    if (c >= 'A' && c <= 'Z') return c + 0x20;
    if (c >= 0x00C0 && c <= 0x00DE && c != 0x00D7) return c + 0x20;
    if (c >= 0x0100 && c <= 0x0137) return (c % 2 == 0) ? c + 1 : c;  // paired Ā..ķ
    if (c >= 0x0139 && c <= 0x0148) return (c % 2 == 1) ? c + 1 : c;  // paired Ĺ..ň
    if (c >= 0x014A && c <= 0x0177) return (c % 2 == 0) ? c + 1 : c;  // paired Ŋ..ŷ
    if (c == 0x0178) return 0x00FF;                                    // Ÿ → ÿ
    if (c >= 0x0179 && c <= 0x017E) return (c % 2 == 1) ? c + 1 : c;  // Ź..ž
    if (c >= 0x0391 && c <= 0x03AB && c != 0x03A2) return c + 0x20;   // Greek capitals
    if (c >= 0x0410 && c <= 0x042F) return c + 0x20;                  // Cyrillic А..Я
    if (c >= 0x0400 && c <= 0x040F) return c + 0x50;                  // Cyrillic Ѐ..Џ
    return c;
}

// Lowercases a UTF-8 string; used for both corpus tokens and seed words so
// that the two always normalize identically.
inline std::string normalize_token(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) append_utf8(out, to_lower(decode_utf8(s, i)));
    return out;
}

// Splits on non-word-character boundaries and lowercases.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    std::size_t i = 0;
    while (i < text.size()) {
        char32_t cp = decode_utf8(text, i);
        if (is_word_char(cp)) {
            append_utf8(current, to_lower(cp));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

// Splits review text into sentences on runs of .?! followed by whitespace
// or end of input.
inline std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> sentences;
    std::size_t start = 0;
    std::size_t i = 0;
    auto is_terminal = [](char c) { return c == '.' || c == '?' || c == '!'; };
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (i < text.size()) {
        if (is_terminal(text[i])) {
            std::size_t j = i + 1;
            while (j < text.size() && is_terminal(text[j])) ++j;
            if (j >= text.size() || is_space(text[j])) {
                std::string sent = trim(text.substr(start, j - start));
                if (!sent.empty()) sentences.push_back(std::move(sent));
                start = j;
                i = j;
                continue;
            }
            i = j;
        } else {
            ++i;
        }
    }
    std::string tail = trim(text.substr(start));
    if (!tail.empty()) sentences.push_back(std::move(tail));
    return sentences;
}

} // namespace seedabsa
