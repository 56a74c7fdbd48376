#include "calmdesk/lingua/text.hpp"

#include <algorithm>
#include <cstdint>

namespace calmdesk::lingua {

namespace {

struct CodePoint {
    char32_t value;
    std::size_t length;
};

CodePoint decode(std::string_view s, std::size_t i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    auto cont = [&](std::size_t k) -> char32_t {
        if (i + k >= s.size()) return 0xFFFD;
        const auto b = static_cast<unsigned char>(s[i + k]);
        return (b & 0xC0) == 0x80 ? char32_t(b & 0x3F) : char32_t(0xFFFD);
    };
    if (b0 < 0x80) return {b0, 1};
    if ((b0 & 0xE0) == 0xC0 && i + 1 < s.size()) return {(char32_t(b0 & 0x1F) << 6) | cont(1), 2};
    if ((b0 & 0xF0) == 0xE0 && i + 2 < s.size()) return {(char32_t(b0 & 0x0F) << 12) | (cont(1) << 6) | cont(2), 3};
    if ((b0 & 0xF8) == 0xF0 && i + 3 < s.size())
        return {(char32_t(b0 & 0x07) << 18) | (cont(1) << 12) | (cont(2) << 6) | cont(3), 4};
    return {0xFFFD, 1};
}

bool is_ascii_letter(char32_t c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char32_t c) { return c >= '0' && c <= '9'; }
bool is_apostrophe(char32_t c) { return c == '\'' || c == 0x2019; }

bool is_other_letter(char32_t c) {
    if (c < 0x80 || c == 0xFFFD) return false;
    if (c >= 0x80 && c <= 0xBF) return false;          // Latin-1 punctuation and symbols
    if (c == 0xD7 || c == 0xF7) return false;          // multiplication, division
    if (c >= 0x2000 && c <= 0x2BFF) return false;      // general punctuation through misc symbols
    if (c >= 0x3000 && c <= 0x303F) return false;      // CJK punctuation
    if (c >= 0xFE00 && c <= 0xFE0F) return false;      // variation selectors
    if (c >= 0x1F000) return false;                    // emoji and pictographs
    return true;
}

bool is_space(char32_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' || c == 0xA0; }
bool is_terminator(char32_t c) { return c == '.' || c == '!' || c == '?'; }

} // namespace

TokenizedText tokenize(std::string_view text) {
    TokenizedText out;
    std::string current;
    std::size_t sentence_begin = 0;

    auto flush_token = [&] {
        if (current.empty()) return;
        out.tokens.push_back(std::move(current));
        current.clear();
    };
    auto close_sentence = [&] {
        if (out.tokens.size() > sentence_begin) {
            out.sentences.emplace_back(sentence_begin, out.tokens.size());
            sentence_begin = out.tokens.size();
        }
    };

    for (std::size_t i = 0; i < text.size();) {
        const auto cp = decode(text, i);
        const char32_t c = cp.value;
        if (is_ascii_letter(c)) {
            current += static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
            ++out.letter_count;
        } else if (is_digit(c)) {
            current += static_cast<char>(c);
        } else if (is_apostrophe(c)) {
            current += '\'';
        } else if (is_other_letter(c)) {
            current.append(text.substr(i, cp.length));
            ++out.letter_count;
        } else {
            flush_token();
            if (is_terminator(c)) {
                const std::size_t next = i + cp.length;
                if (next >= text.size() || is_space(decode(text, next).value)) close_sentence();
            }
        }
        i += cp.length;
    }
    flush_token();
    close_sentence();

    // A token made only of apostrophes carries no word content.
    auto is_word = [](const std::string& t) { return t.find_first_not_of('\'') != std::string::npos; };
    if (std::all_of(out.tokens.begin(), out.tokens.end(), is_word)) return out;
    std::vector<std::string> kept;
    std::vector<std::size_t> remap(out.tokens.size() + 1, 0);
    for (std::size_t k = 0; k < out.tokens.size(); ++k) {
        remap[k] = kept.size();
        if (is_word(out.tokens[k])) kept.push_back(std::move(out.tokens[k]));
    }
    remap[out.tokens.size()] = kept.size();
    std::vector<std::pair<std::size_t, std::size_t>> sentences;
    for (const auto& [b, e] : out.sentences)
        if (remap[e] > remap[b]) sentences.emplace_back(remap[b], remap[e]);
    out.sentences = std::move(sentences);
    out.tokens = std::move(kept);
    return out;
}

} // namespace calmdesk::lingua
