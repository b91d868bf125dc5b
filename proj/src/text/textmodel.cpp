#include "tpf/text/textmodel.hpp"

#include <algorithm>

#include "tpf/error.hpp"

namespace tpf::text {

namespace {

// Decodes one scalar at s[i]; returns the number of bytes consumed (>= 1).
std::size_t decode_one(std::string_view s, std::size_t i, char32_t& out) noexcept {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        out = b0;
        return 1;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2; cp = b0 & 0x1F; min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3; cp = b0 & 0x0F; min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4; cp = b0 & 0x07; min = 0x10000;
    } else {
        out = 0xFFFD;
        return 1;
    }
    if (i + len > s.size()) {
        out = 0xFFFD;
        return 1;
    }
    for (std::size_t k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) {
            out = 0xFFFD;
            return 1;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        out = 0xFFFD;
        return 1;
    }
    out = cp;
    return len;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_ascii_alnum(char32_t c) noexcept {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_joiner(char32_t c) noexcept {
    return c == '-' || c == '\'' || c == 0x2019 || c == 0x2010 || c == 0x2011;
}

// Non-ASCII symbols and punctuation that never belong to a word.
bool is_non_ascii_punct(char32_t c) noexcept {
    return c == 0x00D7 || c == 0x00F7 || (c >= 0x2000 && c <= 0x206F) || (c >= 0x2190 && c <= 0x2BFF) ||
           (c >= 0x3000 && c <= 0x303F) || (c >= 0xFF01 && c <= 0xFF0F) || c == 0xFFFD;
}

bool is_alnum_like(char32_t c) noexcept {
    if (c < 0x80) return is_ascii_alnum(c);
    return c >= 0xC0 && !is_non_ascii_punct(c) && !is_space(c);
}

bool is_terminator(char32_t c) noexcept { return c == '.' || c == '!' || c == '?'; }

bool is_closer(char32_t c) noexcept {
    return c == '"' || c == '\'' || c == ')' || c == ']' || c == 0x201D || c == 0x2019;
}

bool is_opener(char32_t c) noexcept {
    return c == '"' || c == '\'' || c == '(' || c == '[' || c == 0x201C || c == 0x2018;
}

bool is_upper(char32_t c) noexcept {
    return (c >= 'A' && c <= 'Z') || (c >= 0xC0 && c <= 0xDE && c != 0xD7) || (c >= 0x391 && c <= 0x3A9) ||
           (c >= 0x410 && c <= 0x42F);
}

char32_t fold_lower(char32_t c) noexcept {
    if (c >= 'A' && c <= 'Z') return c + 32;
    if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
    return c;
}

bool starts_upper(const std::u32string& cps, std::size_t r) noexcept {
    char32_t c = cps[r];
    if (is_opener(c) && r + 1 < cps.size()) c = cps[r + 1];
    return is_upper(c);
}

// True if the word ending right before the period at `dot` is a guarded abbreviation.
bool is_abbreviation(const std::u32string& cps, std::size_t sentence_start, std::size_t dot) {
    std::size_t b = dot;
    while (b > sentence_start && !is_space(cps[b - 1])) --b;
    while (b < dot && is_opener(cps[b])) ++b;
    if (b == dot) return false;
    std::string word;
    for (std::size_t k = b; k < dot; ++k) append_utf8(word, fold_lower(cps[k]));
    const auto& guards = abbreviation_guards();
    return std::find(guards.begin(), guards.end(), word) != guards.end();
}

}  // namespace

bool is_space(char32_t c) noexcept {
    return c == ' ' || (c >= '\t' && c <= '\r') || c == 0x85 || c == 0xA0 || (c >= 0x2000 && c <= 0x200A) ||
           c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000;
}

bool is_word_char(char32_t c) noexcept { return is_alnum_like(c) || is_joiner(c); }

Utf8Text::Utf8Text(std::string utf8) : utf8_(std::move(utf8)) {
    const std::string_view s(utf8_);
    codepoints_.reserve(s.size());
    byte_offsets_.reserve(s.size() + 1);
    std::size_t i = 0;
    while (i < s.size()) {
        char32_t cp;
        const std::size_t len = decode_one(s, i, cp);
        byte_offsets_.push_back(i);
        codepoints_.push_back(cp);
        i += len;
    }
    byte_offsets_.push_back(s.size());
}

const std::vector<std::string_view>& abbreviation_guards() {
    static const std::vector<std::string_view> guards = {
        "e.g", "i.e", "al", "fig", "figs", "eq", "eqs", "ref", "refs", "sec", "no", "vs",
        "cf", "approx", "dr", "mr", "mrs", "ms", "prof", "vol", "pp", "resp", "tab", "ch",
    };
    return guards;
}

std::vector<SentenceSpan> segment_sentences(const Utf8Text& text) {
    const std::u32string& cps = text.codepoints();
    const std::size_t n = cps.size();
    std::vector<SentenceSpan> out;

    std::size_t i = 0;
    while (true) {
        while (i < n && is_space(cps[i])) ++i;
        if (i >= n) break;

        const std::size_t start = i;
        std::size_t end = n;
        std::size_t next = n;
        std::size_t content_end = i;
        bool closed = false;
        std::size_t j = i;
        while (j < n && !closed) {
            const char32_t c = cps[j];
            if (is_space(c)) {
                std::size_t k = j;
                int newlines = 0;
                while (k < n && is_space(cps[k])) {
                    if (cps[k] == '\n') ++newlines;
                    ++k;
                }
                if (newlines >= 2) {
                    end = j;
                    next = k;
                    closed = true;
                }
                j = k;
                continue;
            }
            if (is_terminator(c)) {
                std::size_t q = j + 1;
                while (q < n && (is_terminator(cps[q]) || is_closer(cps[q]))) ++q;
                content_end = q;
                if (q == n) {
                    end = q;
                    next = q;
                    closed = true;
                } else if (is_space(cps[q])) {
                    std::size_t r = q;
                    while (r < n && is_space(cps[r])) ++r;
                    if (r == n || (starts_upper(cps, r) && !(c == '.' && is_abbreviation(cps, start, j)))) {
                        end = q;
                        next = r;
                        closed = true;
                    }
                }
                j = q;
                continue;
            }
            ++j;
            content_end = j;
        }
        if (!closed) {
            end = content_end;
            next = n;
        }
        out.push_back(SentenceSpan{start, end, {}});
        i = next;
    }
    return out;
}

std::vector<SentenceSpan> segment_sentences(std::string_view raw_text) {
    return segment_sentences(Utf8Text(std::string(raw_text)));
}

std::vector<TokenSpan> tokenize_span(const Utf8Text& text, CharSpan range) {
    const std::u32string& cps = text.codepoints();
    std::vector<TokenSpan> out;
    std::size_t i = range.start;
    while (i < range.end) {
        if (!is_word_char(cps[i])) {
            ++i;
            continue;
        }
        std::size_t a = i;
        std::size_t b = i;
        while (b < range.end && is_word_char(cps[b])) ++b;
        i = b;
        while (a < b && is_joiner(cps[a])) ++a;
        while (b > a && is_joiner(cps[b - 1])) --b;
        if (a < b) out.push_back(TokenSpan{a, b});
    }
    return out;
}

std::vector<TokenSpan> tokenize_words(const SentenceSpan& sentence, const Utf8Text& text) {
    return tokenize_span(text, sentence.span());
}

std::string lowercase(std::string_view utf8) {
    std::string out;
    out.reserve(utf8.size());
    std::size_t i = 0;
    while (i < utf8.size()) {
        char32_t cp;
        const std::size_t len = decode_one(utf8, i, cp);
        if (cp == 0xFFFD && len == 1 && static_cast<unsigned char>(utf8[i]) >= 0x80) {
            out.push_back(utf8[i]);  // keep malformed bytes verbatim
        } else {
            append_utf8(out, fold_lower(cp));
        }
        i += len;
    }
    return out;
}

std::vector<std::string> word_tokens(std::string_view text, bool lower) {
    const Utf8Text t{std::string(text)};
    std::vector<std::string> out;
    for (const TokenSpan& tok : tokenize_span(t, CharSpan{0, t.size()})) {
        std::string_view w = t.slice(tok);
        out.push_back(lower ? lowercase(w) : std::string(w));
    }
    return out;
}

AnalyzedDocument::AnalyzedDocument(std::string doc_id, std::string raw_text)
    : doc_id_(std::move(doc_id)), text_(std::move(raw_text)) {
    sentences_ = segment_sentences(text_);
    for (SentenceSpan& s : sentences_) s.tokens = tokenize_words(s, text_);
}

std::size_t AnalyzedDocument::sentence_at(std::size_t pos) const noexcept {
    auto it = std::upper_bound(sentences_.begin(), sentences_.end(), pos,
                               [](std::size_t p, const SentenceSpan& s) { return p < s.start; });
    if (it == sentences_.begin()) return sentences_.size();
    --it;
    return pos < it->end ? static_cast<std::size_t>(it - sentences_.begin()) : sentences_.size();
}

std::vector<PhraseWindow> extract_windows(const AnalyzedDocument& doc, std::size_t min_len, std::size_t max_len) {
    if (min_len < 1 || min_len > max_len) {
        throw Error(ErrorKind::InvalidArgument, "extract_windows: require 1 <= min_len <= max_len");
    }
    std::vector<PhraseWindow> out;
    const auto& sentences = doc.sentences();
    for (std::size_t si = 0; si < sentences.size(); ++si) {
        const auto& toks = sentences[si].tokens;
        for (std::size_t start = 0; start < toks.size(); ++start) {
            for (std::size_t n = min_len; n <= max_len && start + n <= toks.size(); ++n) {
                const CharSpan span{toks[start].start, toks[start + n - 1].end};
                out.push_back(PhraseWindow{si, start, n, std::string(doc.slice(span)), span});
            }
        }
    }
    return out;
}

}  // namespace tpf::text
