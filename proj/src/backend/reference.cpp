#include "tpf/backend/reference.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "tpf/error.hpp"
#include "tpf/hash.hpp"
#include "tpf/io.hpp"
#include "tpf/text/textmodel.hpp"

namespace tpf::backend {

// ---------------------------------------------------------------------------
// Lexicon

std::vector<SwapEntry> parse_swap_entries(std::string_view tsv) {
    std::vector<SwapEntry> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= tsv.size()) {
        std::size_t eol = tsv.find('\n', pos);
        if (eol == std::string_view::npos) eol = tsv.size();
        std::string_view line = tsv.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos) {
            throw Error(ErrorKind::Format, "swap table line " + std::to_string(line_no) + ": expected original<TAB>tortured");
        }
        out.push_back({std::string(line.substr(0, tab)), std::string(line.substr(tab + 1))});
    }
    return out;
}

Lexicon Lexicon::parse_swap_table(std::string_view tsv) {
    Lexicon lex;
    for (const auto& e : parse_swap_entries(tsv)) lex.add(e.tortured, e.original);
    return lex;
}

Lexicon Lexicon::load_swap_table(const std::filesystem::path& path) {
    return parse_swap_table(io::read_file(path));
}

void Lexicon::add(std::string_view tortured, std::string_view original) {
    auto key = text::word_tokens(tortured);
    auto value = text::word_tokens(original);
    if (key.empty() || value.empty()) {
        throw Error(ErrorKind::Format, "lexicon entry has an empty side: '" + std::string(tortured) + "'");
    }
    max_key_len_ = std::max(max_key_len_, key.size());
    entries_[std::move(key)] = std::move(value);
}

std::vector<std::string> Lexicon::canonicalize(const std::vector<std::string>& tokens) const {
    if (entries_.empty()) return tokens;
    std::vector<std::string> out;
    out.reserve(tokens.size());
    std::size_t i = 0;
    std::vector<std::string> probe;
    while (i < tokens.size()) {
        bool matched = false;
        const std::size_t longest = std::min(max_key_len_, tokens.size() - i);
        for (std::size_t len = longest; len >= 1 && !matched; --len) {
            probe.assign(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                         tokens.begin() + static_cast<std::ptrdiff_t>(i + len));
            if (auto it = entries_.find(probe); it != entries_.end()) {
                out.insert(out.end(), it->second.begin(), it->second.end());
                i += len;
                matched = true;
            }
        }
        if (!matched) out.push_back(tokens[i++]);
    }
    return out;
}

std::uint64_t Lexicon::fingerprint() const noexcept {
    std::uint64_t h = kFnvOffset;
    for (const auto& [key, value] : entries_) {
        for (const auto& k : key) h = fnv1a64(std::string_view("\x1f"), fnv1a64(k, h));
        h = fnv1a64(std::string_view("\t"), h);
        for (const auto& v : value) h = fnv1a64(std::string_view("\x1f"), fnv1a64(v, h));
        h = fnv1a64(std::string_view("\n"), h);
    }
    return h;
}

// ---------------------------------------------------------------------------
// Embedder

std::vector<double> token_vector(std::string_view token, std::size_t dim, std::uint64_t seed) {
    SplitMix64 rng(fnv1a64(token) ^ (seed * 0x9e3779b97f4a7c15ULL));
    std::vector<double> v(dim);
    double sq = 0.0;
    for (double& c : v) {
        c = 2.0 * rng.next_unit() - 1.0;
        sq += c * c;
    }
    const double inv = 1.0 / std::sqrt(sq);
    for (double& c : v) c *= inv;
    return v;
}

Embedding ref_embed(std::string_view text, std::size_t dim, std::uint64_t seed, const Lexicon* lexicon) {
    if (dim < 8) throw Error(ErrorKind::InvalidArgument, "reference embedder requires dim >= 8");
    std::vector<std::string> tokens = text::word_tokens(text);
    if (lexicon != nullptr) tokens = lexicon->canonicalize(tokens);
    if (tokens.empty()) throw Error(ErrorKind::EmptyText, "no word tokens in text");

    std::map<std::string, std::size_t> counts;
    for (auto& t : tokens) ++counts[std::move(t)];

    std::vector<double> acc(dim, 0.0);
    for (const auto& [token, count] : counts) {
        const std::vector<double> tv = token_vector(token, dim, seed);
        const double w = static_cast<double>(count);
        for (std::size_t j = 0; j < dim; ++j) acc[j] += w * tv[j];
    }
    return Embedding::normalized(acc);
}

ReferenceEmbedder::ReferenceEmbedder(std::size_t dim, std::uint64_t seed, Lexicon lexicon)
    : dim_(dim), seed_(seed), lexicon_(std::move(lexicon)) {
    if (dim_ < 8) throw Error(ErrorKind::InvalidArgument, "reference embedder requires dim >= 8");
}

std::string ReferenceEmbedder::name() const {
    std::string n = "ref-" + std::to_string(dim_);
    if (seed_ != 0) n += "/seed=" + std::to_string(seed_);
    if (!lexicon_.empty()) {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(lexicon_.fingerprint()));
        n += "/lexicon=";
        n += buf;
    }
    return n;
}

std::vector<Embedding> ReferenceEmbedder::embed(std::span<const std::string> texts) const {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    const Lexicon* lex = lexicon_.empty() ? nullptr : &lexicon_;
    for (const auto& t : texts) out.push_back(ref_embed(t, dim_, seed_, lex));
    return out;
}

// ---------------------------------------------------------------------------
// Bigram scorer

std::size_t BigramTable::PairHash::operator()(const std::pair<std::string, std::string>& p) const noexcept {
    return static_cast<std::size_t>(fnv1a64(p.second, fnv1a64(std::string_view("\x1f"), fnv1a64(p.first))));
}

void BigramTable::add_tokens(const std::vector<std::string>& tokens) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        ++unigrams_[tokens[i]];
        ++total_;
        if (i > 0) ++bigrams_[{tokens[i - 1], tokens[i]}];
    }
}

void BigramTable::add_text(std::string_view raw) {
    const text::Utf8Text t{std::string(raw)};
    for (const auto& s : text::segment_sentences(t)) {
        std::vector<std::string> tokens;
        for (const auto& tok : text::tokenize_words(s, t)) tokens.push_back(text::lowercase(t.slice(tok)));
        add_tokens(tokens);
    }
}

std::uint64_t BigramTable::unigram(const std::string& w) const {
    auto it = unigrams_.find(w);
    return it == unigrams_.end() ? 0 : it->second;
}

std::uint64_t BigramTable::bigram(const std::string& a, const std::string& b) const {
    auto it = bigrams_.find({a, b});
    return it == bigrams_.end() ? 0 : it->second;
}

double BigramTable::unigram_logprob(const std::string& w) const {
    const double p = total_ == 0 ? 0.0 : static_cast<double>(unigram(w)) / static_cast<double>(total_);
    return std::log(p + kLogSmoothing);
}

double BigramTable::bigram_logprob(const std::string& a, const std::string& b) const {
    const double v = static_cast<double>(std::max<std::size_t>(vocabulary_size(), 1));
    const double p = (static_cast<double>(bigram(a, b)) + 1.0) / (static_cast<double>(unigram(a)) + v);
    return std::log(p + kLogSmoothing);
}

TokenLogProbs BigramTable::score(std::string_view phrase) const {
    const auto tokens = text::word_tokens(phrase);
    if (tokens.empty()) throw Error(ErrorKind::EmptyText, "phrase has no word tokens");
    TokenLogProbs out;
    out.logprobs.reserve(tokens.size());
    out.logprobs.push_back(unigram_logprob(tokens[0]));
    for (std::size_t i = 1; i < tokens.size(); ++i) out.logprobs.push_back(bigram_logprob(tokens[i - 1], tokens[i]));
    return out;
}

TokenLogProbs ref_mlm_score(std::string_view phrase, const BigramTable& lm) { return lm.score(phrase); }

ReferenceMlmScorer ReferenceMlmScorer::from_directory(const std::filesystem::path& dir) {
    BigramTable table;
    for (const auto& file : io::list_text_files(dir)) {
        try {
            table.add_text(io::read_file(file));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Io) throw;
            // Unreadable files are skipped, matching ingestion.
        }
    }
    return ReferenceMlmScorer(std::move(table));
}

std::vector<TokenLogProbs> ReferenceMlmScorer::score_batch(std::span<const std::string> phrases) const {
    std::vector<TokenLogProbs> out;
    out.reserve(phrases.size());
    for (const auto& p : phrases) out.push_back(table_.score(p));
    return out;
}

}  // namespace tpf::backend
