#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "qidf/errors.hpp"

namespace qidf {

/// The four analyzer pipelines compared in the tokenizer ablation.
///
///  - t0_default: lowercase, extract `\b\w\w+\b` runs, drop stopwords. No stemming.
///  - t1_whitespace: split on Unicode whitespace, lowercase, keep everything.
///  - t2_identifier_aware: t0 runs, each emitted whole and followed by its sub-tokens.
///  - t3_subtokens_only: t0 runs replaced by their sub-tokens.
enum class TokenizerMode : std::uint8_t {
    t0_default = 0,
    t1_whitespace = 1,
    t2_identifier_aware = 2,
    t3_subtokens_only = 3,
};

using Token = std::string;
using StopwordSet = std::unordered_set<std::string>;

inline const char* to_string(TokenizerMode mode)
{
    switch (mode) {
    case TokenizerMode::t0_default: return "t0";
    case TokenizerMode::t1_whitespace: return "t1";
    case TokenizerMode::t2_identifier_aware: return "t2";
    case TokenizerMode::t3_subtokens_only: return "t3";
    }
    return "?";
}

inline TokenizerMode parse_tokenizer_mode(std::string_view name)
{
    if (name == "t0") return TokenizerMode::t0_default;
    if (name == "t1") return TokenizerMode::t1_whitespace;
    if (name == "t2") return TokenizerMode::t2_identifier_aware;
    if (name == "t3") return TokenizerMode::t3_subtokens_only;
    throw Error("unknown tokenizer mode '" + std::string(name) + "' (expected t0..t3)");
}

/// The English stop list shipped as data/stopwords_en.txt (Lucene's classic 33-word set).
inline const StopwordSet& default_stopwords()
{
    static const StopwordSet words = {
        "a",    "an",   "and",  "are",  "as",    "at",   "be",    "but",  "by",
        "for",  "if",   "in",   "into", "is",    "it",   "no",    "not",  "of",
        "on",   "or",   "such", "that", "the",   "their", "then", "there", "these",
        "they", "this", "to",   "was",  "will",  "with",
    };
    return words;
}

/// One word per line; blank lines and lines starting with '#' are ignored.
inline StopwordSet load_stopwords(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open stopword list '" + path + "'");
    }
    StopwordSet words;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
            line.pop_back();
        }
        auto start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') {
            continue;
        }
        words.insert(line.substr(start));
    }
    return words;
}

namespace detail {

struct CodePoint {
    char32_t value;
    std::size_t length; // bytes consumed
};

/// Decodes one UTF-8 sequence at `pos`. Invalid bytes decode as U+FFFD of length 1.
inline CodePoint decode_utf8(std::string_view s, std::size_t pos)
{
    auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
    unsigned char lead = byte(pos);
    if (lead < 0x80) {
        return {lead, 1};
    }
    std::size_t len = 0;
    char32_t cp = 0;
    if ((lead & 0xE0) == 0xC0) {
        len = 2;
        cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
        len = 3;
        cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
        len = 4;
        cp = lead & 0x07;
    } else {
        return {0xFFFD, 1};
    }
    if (pos + len > s.size()) {
        return {0xFFFD, 1};
    }
    for (std::size_t i = 1; i < len; ++i) {
        unsigned char c = byte(pos + i);
        if ((c & 0xC0) != 0x80) {
            return {0xFFFD, 1};
        }
        cp = (cp << 6) | (c & 0x3F);
    }
    return {cp, len};
}

inline bool is_unicode_space(char32_t c)
{
    return (c >= 0x09 && c <= 0x0D) || (c >= 0x1C && c <= 0x20) || c == 0x85 || c == 0xA0
        || c == 0x1680 || (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029
        || c == 0x202F || c == 0x205F || c == 0x3000;
}

/// Approximates Python's `\w`: ASCII alphanumerics and underscore, plus any
/// non-ASCII code point outside the common whitespace, Latin-1 punctuation,
/// general punctuation, and CJK punctuation blocks.
inline bool is_word_char(char32_t c)
{
    if (c < 0x80) {
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    }
    if (c == 0xFFFD || is_unicode_space(c)) {
        return false;
    }
    if (c >= 0xA1 && c <= 0xBF) {
        return c == 0xAA || c == 0xB2 || c == 0xB3 || c == 0xB5 || c == 0xB9 || c == 0xBA
            || (c >= 0xBC && c <= 0xBE);
    }
    if (c == 0xD7 || c == 0xF7) {
        return false;
    }
    if (c >= 0x2000 && c <= 0x206F) {
        return false;
    }
    if (c >= 0x3000 && c <= 0x303F) {
        return false;
    }
    return true;
}

inline std::string ascii_lower(std::string_view s)
{
    std::string out(s);
    for (auto& ch : out) {
        if (ch >= 'A' && ch <= 'Z') {
            ch = static_cast<char>(ch - 'A' + 'a');
        }
    }
    return out;
}

enum class CharClass { upper, lower, digit, other_letter, separator };

inline CharClass classify(char32_t c)
{
    if (c >= 'A' && c <= 'Z') return CharClass::upper;
    if (c >= 'a' && c <= 'z') return CharClass::lower;
    if (c >= '0' && c <= '9') return CharClass::digit;
    if (c >= 0x80 && is_word_char(c)) return CharClass::other_letter;
    return CharClass::separator;
}

inline bool is_letter(CharClass c)
{
    return c == CharClass::upper || c == CharClass::lower || c == CharClass::other_letter;
}

} // namespace detail

/// Maximal runs of word characters at least two code points long (the `\b\w\w+\b`
/// rule), as views into `text` with their original case.
inline std::vector<std::string_view> extract_words(std::string_view text)
{
    std::vector<std::string_view> words;
    std::size_t pos = 0;
    std::size_t run_start = 0;
    std::size_t run_chars = 0;
    auto flush = [&](std::size_t end) {
        if (run_chars >= 2) {
            words.push_back(text.substr(run_start, end - run_start));
        }
        run_chars = 0;
    };
    while (pos < text.size()) {
        auto cp = detail::decode_utf8(text, pos);
        if (detail::is_word_char(cp.value)) {
            if (run_chars == 0) {
                run_start = pos;
            }
            ++run_chars;
        } else {
            flush(pos);
        }
        pos += cp.length;
    }
    flush(text.size());
    return words;
}

/// Splits an identifier into lowercase parts at underscores (and any other
/// non-word character), lower-to-upper transitions, letter/digit transitions,
/// and before the last capital of an acronym run that is followed by a
/// lowercase letter ("HTTPServer" -> http, server). One-character parts are kept.
inline std::vector<std::string> split_identifier(std::string_view token)
{
    struct Unit {
        std::size_t offset;
        std::size_t length;
        detail::CharClass cls;
    };
    std::vector<Unit> units;
    for (std::size_t pos = 0; pos < token.size();) {
        auto cp = detail::decode_utf8(token, pos);
        units.push_back({pos, cp.length, detail::classify(cp.value)});
        pos += cp.length;
    }

    std::vector<std::string> parts;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            parts.push_back(detail::ascii_lower(current));
            current.clear();
        }
    };

    using detail::CharClass;
    for (std::size_t i = 0; i < units.size(); ++i) {
        const auto& u = units[i];
        if (u.cls == CharClass::separator) {
            flush();
            continue;
        }
        if (!current.empty()) {
            CharClass prev = units[i - 1].cls;
            bool boundary = false;
            if ((prev == CharClass::lower || prev == CharClass::other_letter) && u.cls == CharClass::upper) {
                boundary = true;
            } else if (detail::is_letter(prev) && u.cls == CharClass::digit) {
                boundary = true;
            } else if (prev == CharClass::digit && detail::is_letter(u.cls)) {
                boundary = true;
            } else if (prev == CharClass::upper && u.cls == CharClass::upper && i + 1 < units.size()
                       && units[i + 1].cls == CharClass::lower) {
                boundary = true;
            }
            if (boundary) {
                flush();
            }
        }
        current.append(token.substr(u.offset, u.length));
    }
    flush();
    return parts;
}

/// Splits on Unicode whitespace; the returned views keep their original case.
inline std::vector<std::string_view> split_whitespace(std::string_view text)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    std::size_t start = std::string_view::npos;
    while (pos < text.size()) {
        auto cp = detail::decode_utf8(text, pos);
        if (detail::is_unicode_space(cp.value)) {
            if (start != std::string_view::npos) {
                out.push_back(text.substr(start, pos - start));
                start = std::string_view::npos;
            }
        } else if (start == std::string_view::npos) {
            start = pos;
        }
        pos += cp.length;
    }
    if (start != std::string_view::npos) {
        out.push_back(text.substr(start));
    }
    return out;
}

/// Word-level unit produced before sub-token expansion: the original-case
/// surface and its normalized (lowercased) form.
struct Word {
    std::string_view surface;
    std::string normalized;
};

/// The pre-expansion word stream of a mode: whitespace chunks for t1, stopword-filtered
/// `\w\w+` runs otherwise.
inline std::vector<Word> words(std::string_view text, TokenizerMode mode, const StopwordSet& stopwords)
{
    std::vector<Word> out;
    if (mode == TokenizerMode::t1_whitespace) {
        for (auto chunk : split_whitespace(text)) {
            out.push_back({chunk, detail::ascii_lower(chunk)});
        }
        return out;
    }
    for (auto run : extract_words(text)) {
        auto lower = detail::ascii_lower(run);
        if (stopwords.count(lower)) {
            continue;
        }
        out.push_back({run, std::move(lower)});
    }
    return out;
}

inline std::vector<Token> tokenize(std::string_view text, TokenizerMode mode,
                                   const StopwordSet& stopwords = default_stopwords())
{
    auto ws = words(text, mode, stopwords);
    std::vector<Token> tokens;
    tokens.reserve(ws.size());
    switch (mode) {
    case TokenizerMode::t0_default:
    case TokenizerMode::t1_whitespace:
        for (auto& w : ws) {
            tokens.push_back(std::move(w.normalized));
        }
        break;
    case TokenizerMode::t2_identifier_aware:
        for (auto& w : ws) {
            auto parts = split_identifier(w.surface);
            std::size_t group_start = tokens.size();
            tokens.push_back(std::move(w.normalized));
            for (auto& p : parts) {
                if (tokens.size() > group_start && tokens.back() == p) {
                    continue;
                }
                tokens.push_back(std::move(p));
            }
        }
        break;
    case TokenizerMode::t3_subtokens_only:
        for (auto& w : ws) {
            for (auto& p : split_identifier(w.surface)) {
                tokens.push_back(std::move(p));
            }
        }
        break;
    }
    return tokens;
}

} // namespace qidf
