#pragma once

// Canonical document representation. All offsets are Unicode scalar values, not bytes,
// and every span slices back to the exact source text.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace tpf::text {

/// Half-open [start, end) range in code points.
struct CharSpan {
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - start; }
    bool overlaps(const CharSpan& o) const noexcept { return start < o.end && o.start < end; }
    friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

/// UTF-8 text with a code-point index. Malformed bytes decode to U+FFFD one byte at a
/// time, so slicing still returns the original bytes.
class Utf8Text {
public:
    Utf8Text() : byte_offsets_{0} {}
    explicit Utf8Text(std::string utf8);

    const std::string& str() const noexcept { return utf8_; }
    std::size_t size() const noexcept { return codepoints_.size(); }
    bool empty() const noexcept { return codepoints_.empty(); }
    char32_t operator[](std::size_t i) const noexcept { return codepoints_[i]; }
    const std::u32string& codepoints() const noexcept { return codepoints_; }

    std::string_view slice(std::size_t start, std::size_t end) const noexcept {
        return std::string_view(utf8_).substr(byte_offsets_[start], byte_offsets_[end] - byte_offsets_[start]);
    }
    std::string_view slice(CharSpan s) const noexcept { return slice(s.start, s.end); }

private:
    std::string utf8_;
    std::u32string codepoints_;
    std::vector<std::size_t> byte_offsets_;  // size() + 1 entries
};

using TokenSpan = CharSpan;

struct SentenceSpan {
    std::size_t start = 0;
    std::size_t end = 0;
    std::vector<TokenSpan> tokens;

    CharSpan span() const noexcept { return {start, end}; }
};

struct PhraseWindow {
    std::size_t sentence_index = 0;
    std::size_t token_start = 0;
    std::size_t token_len = 0;
    std::string text;
    CharSpan char_span;
};

class AnalyzedDocument {
public:
    AnalyzedDocument() = default;
    AnalyzedDocument(std::string doc_id, std::string raw_text);

    const std::string& doc_id() const noexcept { return doc_id_; }
    const std::string& raw_text() const noexcept { return text_.str(); }
    const Utf8Text& text() const noexcept { return text_; }
    const std::vector<SentenceSpan>& sentences() const noexcept { return sentences_; }

    std::string_view slice(CharSpan s) const noexcept { return text_.slice(s); }
    std::string_view sentence_text(std::size_t i) const noexcept { return text_.slice(sentences_[i].span()); }

    /// Index of the sentence containing code point `pos`, or sentences().size() if none.
    std::size_t sentence_at(std::size_t pos) const noexcept;

private:
    std::string doc_id_;
    Utf8Text text_;
    std::vector<SentenceSpan> sentences_;
};

/// Rule-based split on . ! ? followed by whitespace and an uppercase letter, guarded by
/// abbreviation_guards(); a blank line (two or more newlines) always ends a sentence.
/// Returned spans have empty token lists.
std::vector<SentenceSpan> segment_sentences(const Utf8Text& text);
std::vector<SentenceSpan> segment_sentences(std::string_view raw_text);

/// Lowercased words that do not end a sentence when followed by a period.
const std::vector<std::string_view>& abbreviation_guards();

/// Maximal runs of letters, digits, hyphens and apostrophes inside the sentence, with
/// leading/trailing hyphens and apostrophes trimmed; runs without a letter or digit are dropped.
std::vector<TokenSpan> tokenize_words(const SentenceSpan& sentence, const Utf8Text& text);
std::vector<TokenSpan> tokenize_span(const Utf8Text& text, CharSpan range);

/// Word tokens of arbitrary text as strings, optionally lowercased.
std::vector<std::string> word_tokens(std::string_view text, bool lowercase = true);

/// ASCII and Latin-1 lowercase folding; other scripts pass through unchanged.
std::string lowercase(std::string_view utf8);

/// Every within-sentence word n-gram with min_len <= n <= max_len, stride 1, ordered by
/// (sentence, first token, length).
std::vector<PhraseWindow> extract_windows(const AnalyzedDocument& doc, std::size_t min_len, std::size_t max_len);

bool is_space(char32_t c) noexcept;
bool is_word_char(char32_t c) noexcept;

}  // namespace tpf::text
