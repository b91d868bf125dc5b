#pragma once

// Sentence alignment against the retrieved source and the exhaustive n-gram scanner.
// Every proposed term is a verbatim slice of the source text.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tpf/backend/backend.hpp"
#include "tpf/text/textmodel.hpp"

namespace tpf::restore {

struct RestorationConfig {
    double t_align = 0.45;
    double gamma = 0.60;
    std::size_t max_ngram = 5;

    /// Both thresholds in (0, 1], max_ngram >= 1; throws InvalidArgument otherwise.
    void validate() const;
};

/// Inclusive gates: a similarity equal to the threshold passes.
inline bool passes_gate(double similarity, double threshold) noexcept { return similarity >= threshold; }

struct AlignmentResult {
    std::size_t source_sentence_index = 0;
    std::string source_sentence_text;
    double similarity = 0.0;
    bool passed_gate = false;
};

struct RestorationCandidate {
    std::string ngram_text;
    std::size_t n = 0;
    std::size_t token_start = 0;   // within the scanned sentence
    text::CharSpan span;           // code points within the scanned text
    double similarity = 0.0;
    bool accepted = false;
};

struct ScanResult {
    std::optional<RestorationCandidate> best;  // absent only when the sentence has no tokens
    std::vector<RestorationCandidate> candidates;  // ordered by (n, token_start)
};

/// A source document with its sentence embeddings computed once. Sentences without word
/// tokens get no embedding and never match.
class PreparedSource {
public:
    PreparedSource(text::AnalyzedDocument doc, const backend::EmbedderBackend& embedder);

    const text::AnalyzedDocument& doc() const noexcept { return doc_; }
    const std::vector<std::optional<backend::Embedding>>& sentence_embeddings() const noexcept { return emb_; }

private:
    text::AnalyzedDocument doc_;
    std::vector<std::optional<backend::Embedding>> emb_;
};

/// Argmax cosine over source sentences; lowest index wins ties. Throws EmptySource when
/// no source sentence has a word token.
AlignmentResult align_sentence(const backend::Embedding& suspect_sentence, const PreparedSource& source,
                               const RestorationConfig& cfg);
AlignmentResult align_sentence(std::string_view suspect_sentence, const text::AnalyzedDocument& source,
                               const backend::EmbedderBackend& embedder, const RestorationConfig& cfg);

/// All word n-grams of `sentence` with 1 <= n <= max_n, ordered by (n, start).
std::vector<RestorationCandidate> sentence_ngrams(std::string_view sentence, std::size_t max_n);

/// Exhaustive scan. Best = argmax cosine(v(phrase), v(g)); ties go to smaller n, then
/// earlier position. accepted iff best similarity >= gamma.
ScanResult scan_ngrams(const backend::Embedding& phrase, std::string_view matched_sentence,
                       const backend::EmbedderBackend& embedder, const RestorationConfig& cfg);
ScanResult scan_ngrams(std::string_view tortured_phrase, std::string_view matched_sentence,
                       const backend::EmbedderBackend& embedder, const RestorationConfig& cfg);

}  // namespace tpf::restore
