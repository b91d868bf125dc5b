#include "tpf/restore/restoration.hpp"

#include <cmath>

#include "tpf/error.hpp"

namespace tpf::restore {

void RestorationConfig::validate() const {
    auto unit = [](double x) { return std::isfinite(x) && x > 0.0 && x <= 1.0; };
    if (!unit(t_align)) throw Error(ErrorKind::InvalidArgument, "t_align must lie in (0, 1]");
    if (!unit(gamma)) throw Error(ErrorKind::InvalidArgument, "gamma must lie in (0, 1]");
    if (max_ngram < 1) throw Error(ErrorKind::InvalidArgument, "max_ngram must be at least 1");
}

PreparedSource::PreparedSource(text::AnalyzedDocument doc, const backend::EmbedderBackend& embedder)
    : doc_(std::move(doc)) {
    std::vector<std::string> texts;
    std::vector<std::size_t> which;
    for (std::size_t i = 0; i < doc_.sentences().size(); ++i) {
        if (doc_.sentences()[i].tokens.empty()) continue;
        texts.emplace_back(doc_.sentence_text(i));
        which.push_back(i);
    }
    emb_.resize(doc_.sentences().size());
    if (texts.empty()) return;
    auto vecs = embedder.embed(texts);
    if (vecs.size() != texts.size()) throw Error(ErrorKind::Backend, embedder.name() + ": wrong embedding count");
    for (std::size_t k = 0; k < which.size(); ++k) emb_[which[k]] = std::move(vecs[k]);
}

AlignmentResult align_sentence(const backend::Embedding& suspect_sentence, const PreparedSource& source,
                               const RestorationConfig& cfg) {
    std::optional<AlignmentResult> best;
    const auto& emb = source.sentence_embeddings();
    for (std::size_t i = 0; i < emb.size(); ++i) {
        if (!emb[i]) continue;
        const double sim = backend::cosine(suspect_sentence, *emb[i]);
        if (!best || sim > best->similarity) best = AlignmentResult{i, {}, sim, false};
    }
    if (!best) {
        throw Error(ErrorKind::EmptySource, "source document '" + source.doc().doc_id() + "' has no sentences");
    }
    best->source_sentence_text = std::string(source.doc().sentence_text(best->source_sentence_index));
    best->passed_gate = passes_gate(best->similarity, cfg.t_align);
    return *best;
}

AlignmentResult align_sentence(std::string_view suspect_sentence, const text::AnalyzedDocument& source,
                               const backend::EmbedderBackend& embedder, const RestorationConfig& cfg) {
    const PreparedSource prepared(source, embedder);
    return align_sentence(embedder.embed_one(suspect_sentence), prepared, cfg);
}

std::vector<RestorationCandidate> sentence_ngrams(std::string_view sentence, std::size_t max_n) {
    const text::Utf8Text t{std::string(sentence)};
    const auto tokens = text::tokenize_span(t, {0, t.size()});
    std::vector<RestorationCandidate> out;
    for (std::size_t n = 1; n <= max_n && n <= tokens.size(); ++n) {
        for (std::size_t s = 0; s + n <= tokens.size(); ++s) {
            RestorationCandidate c;
            c.n = n;
            c.token_start = s;
            c.span = {tokens[s].start, tokens[s + n - 1].end};
            c.ngram_text = std::string(t.slice(c.span));
            out.push_back(std::move(c));
        }
    }
    return out;
}

ScanResult scan_ngrams(const backend::Embedding& phrase, std::string_view matched_sentence,
                       const backend::EmbedderBackend& embedder, const RestorationConfig& cfg) {
    ScanResult r;
    r.candidates = sentence_ngrams(matched_sentence, cfg.max_ngram);
    if (r.candidates.empty()) return r;

    std::vector<std::string> texts;
    texts.reserve(r.candidates.size());
    for (const auto& c : r.candidates) texts.push_back(c.ngram_text);
    const auto vecs = embedder.embed(texts);
    if (vecs.size() != texts.size()) throw Error(ErrorKind::Backend, embedder.name() + ": wrong embedding count");

    std::size_t best = 0;
    for (std::size_t i = 0; i < r.candidates.size(); ++i) {
        r.candidates[i].similarity = backend::cosine(phrase, vecs[i]);
        r.candidates[i].accepted = passes_gate(r.candidates[i].similarity, cfg.gamma);
        // Candidates are already in (n, start) order, so strict > keeps the tie-break.
        if (r.candidates[i].similarity > r.candidates[best].similarity) best = i;
    }
    r.best = r.candidates[best];
    return r;
}

ScanResult scan_ngrams(std::string_view tortured_phrase, std::string_view matched_sentence,
                       const backend::EmbedderBackend& embedder, const RestorationConfig& cfg) {
    return scan_ngrams(embedder.embed_one(tortured_phrase), matched_sentence, embedder, cfg);
}

}  // namespace tpf::restore
