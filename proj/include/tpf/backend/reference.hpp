#pragma once

// Deterministic, dependency-free stand-ins for the neural backends.
//
// Reference embedder recipe (reproducible in any language):
//   1. word_tokens(text) lowercased; optional Lexicon rewrite (longest match first);
//   2. per distinct token t: state = fnv1a64(t) XOR (seed * 0x9e3779b97f4a7c15),
//      component j = 2 * u_j - 1 where u_j is the j-th SplitMix64 draw mapped to [0,1)
//      via (x >> 11) * 2^-53; the token vector is that draw normalized in double;
//   3. sum count(t) * vec(t) over distinct tokens in byte order, normalize, round to float.
//
// Reference scorer: word bigram model with MLE unigrams for the first token and
// add-one (Laplace) bigrams after it, both smoothed by +1e-10 before the log.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "tpf/backend/backend.hpp"

namespace tpf::backend {

struct SwapEntry {
    std::string original;
    std::string tortured;
};

/// Swap-table TSV: `original<TAB>tortured` per line; blank lines and '#' comments ignored.
/// Throws Format on a line without exactly one tab.
std::vector<SwapEntry> parse_swap_entries(std::string_view tsv);

/// Phrase-level rewrite table: tortured token sequence -> canonical token sequence.
/// Stands in for the synonym knowledge a trained sentence embedder has.
class Lexicon {
public:
    Lexicon() = default;

    static Lexicon load_swap_table(const std::filesystem::path& path);
    static Lexicon parse_swap_table(std::string_view tsv);

    void add(std::string_view tortured, std::string_view original);

    /// Greedy left-to-right rewrite, longest matching key first.
    std::vector<std::string> canonicalize(const std::vector<std::string>& tokens) const;

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    /// Order-independent content hash, recorded in backend names and report snapshots.
    std::uint64_t fingerprint() const noexcept;

private:
    std::map<std::vector<std::string>, std::vector<std::string>> entries_;
    std::size_t max_key_len_ = 0;
};

/// Unit vector for one (already lowercased) token.
std::vector<double> token_vector(std::string_view token, std::size_t dim, std::uint64_t seed);

/// Bag-of-token-vectors embedding (see recipe above). Throws EmptyText when no token
/// survives tokenization and InvalidArgument when dim < 8.
Embedding ref_embed(std::string_view text, std::size_t dim, std::uint64_t seed, const Lexicon* lexicon = nullptr);

class ReferenceEmbedder final : public EmbedderBackend {
public:
    static constexpr std::size_t kDefaultDim = 64;

    explicit ReferenceEmbedder(std::size_t dim = kDefaultDim, std::uint64_t seed = 0, Lexicon lexicon = {});

    std::string name() const override;
    std::size_t dim() const override { return dim_; }
    std::vector<Embedding> embed(std::span<const std::string> texts) const override;

    std::uint64_t seed() const noexcept { return seed_; }
    const Lexicon& lexicon() const noexcept { return lexicon_; }

private:
    std::size_t dim_;
    std::uint64_t seed_;
    Lexicon lexicon_;
};

class BigramTable {
public:
    BigramTable() = default;

    /// Adds every sentence of `text`; bigrams never span a sentence boundary.
    void add_text(std::string_view text);
    void add_tokens(const std::vector<std::string>& tokens);

    std::uint64_t unigram(const std::string& w) const;
    std::uint64_t bigram(const std::string& a, const std::string& b) const;
    std::uint64_t total_tokens() const noexcept { return total_; }
    std::size_t vocabulary_size() const noexcept { return unigrams_.size(); }

    /// log(c(w)/N + 1e-10).
    double unigram_logprob(const std::string& w) const;
    /// log((c(a,b) + 1) / (c(a) + V) + 1e-10).
    double bigram_logprob(const std::string& a, const std::string& b) const;

    TokenLogProbs score(std::string_view phrase) const;

private:
    struct PairHash {
        std::size_t operator()(const std::pair<std::string, std::string>& p) const noexcept;
    };
    std::unordered_map<std::string, std::uint64_t> unigrams_;
    std::unordered_map<std::pair<std::string, std::string>, std::uint64_t, PairHash> bigrams_;
    std::uint64_t total_ = 0;
};

/// Thin wrapper used by tests and the scorer; mirrors the ref_mlm_score operation.
TokenLogProbs ref_mlm_score(std::string_view phrase, const BigramTable& lm);

class ReferenceMlmScorer final : public MlmScorerBackend {
public:
    explicit ReferenceMlmScorer(BigramTable table) : table_(std::move(table)) {}

    /// Builds the table from every .txt file under `dir` (sorted, recursive).
    static ReferenceMlmScorer from_directory(const std::filesystem::path& dir);

    std::string name() const override { return "ref-bigram"; }
    std::vector<TokenLogProbs> score_batch(std::span<const std::string> phrases) const override;

    const BigramTable& table() const noexcept { return table_; }

private:
    BigramTable table_;
};

}  // namespace tpf::backend
