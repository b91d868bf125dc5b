#include "tpf/pipeline/pipeline.hpp"

#include <json.hpp>

#include "tpf/error.hpp"
#include "tpf/io.hpp"
#include "tpf/parallel.hpp"

namespace tpf::pipeline {

std::string_view to_string(FindingStatus s) noexcept {
    switch (s) {
        case FindingStatus::Restored: return "RESTORED";
        case FindingStatus::NoAlignment: return "NO_ALIGNMENT";
        case FindingStatus::LowConfidence: return "LOW_CONFIDENCE";
        case FindingStatus::RetrievalEmpty: return "RETRIEVAL_EMPTY";
    }
    return "?";
}

std::optional<std::string> DirectorySourceStore::text(const std::string& doc_id) const {
    const auto path = root_ / (doc_id + ".txt");
    try {
        return io::read_file(path);
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::optional<std::string> MemorySourceStore::text(const std::string& doc_id) const {
    auto it = docs_.find(doc_id);
    if (it == docs_.end()) return std::nullopt;
    return it->second;
}

Finding restore_phrase(const detect::PhraseScore& flagged, const text::AnalyzedDocument& suspect,
                       const SourceEvidence* evidence, const backend::EmbedderBackend& embedder,
                       const restore::RestorationConfig& cfg) {
    Finding f;
    f.char_span = flagged.window.char_span;
    f.phrase = flagged.window.text;
    f.s_phrase = flagged.s_phrase;
    f.token_count = flagged.token_count;
    if (!evidence) return f;

    const auto& source = evidence->source;
    f.source_doc_id = evidence->hit.doc_id;
    const auto align = restore::align_sentence(
        embedder.embed_one(suspect.sentence_text(flagged.window.sentence_index)), source, cfg);
    f.alignment_sim = align.similarity;
    if (!align.passed_gate) {
        f.status = FindingStatus::NoAlignment;
        return f;
    }
    f.source_sentence_index = align.source_sentence_index;
    f.source_sentence = align.source_sentence_text;

    const auto scan = restore::scan_ngrams(f.phrase, align.source_sentence_text, embedder, cfg);
    if (!scan.best || !scan.best->accepted) {
        f.status = FindingStatus::LowConfidence;
        if (scan.best) f.restoration_sim = scan.best->similarity;
        return f;
    }
    const std::size_t base = source.doc().sentences()[align.source_sentence_index].start;
    f.status = FindingStatus::Restored;
    f.restored_term = scan.best->ngram_text;
    f.restored_span = text::CharSpan{base + scan.best->span.start, base + scan.best->span.end};
    f.restoration_sim = scan.best->similarity;
    return f;
}

void AnalysisConfig::validate() const {
    detector.validate();
    restoration.validate();
    if (chunk_bytes == 0) throw Error(ErrorKind::InvalidArgument, "chunk_bytes must be positive");
    if (top_k == 0) throw Error(ErrorKind::InvalidArgument, "top_k must be at least 1");
}

std::size_t ForensicReport::count(FindingStatus s) const noexcept {
    std::size_t n = 0;
    for (const auto& f : findings) n += f.status == s;
    return n;
}

namespace {

bool has_tokens(const text::AnalyzedDocument& doc) {
    for (const auto& s : doc.sentences()) {
        if (!s.tokens.empty()) return true;
    }
    return false;
}

}  // namespace

ForensicReport analyze(const text::AnalyzedDocument& suspect, const index::CorpusIndex& index,
                       const SourceStore& sources, const backend::MlmScorerBackend& scorer,
                       const backend::EmbedderBackend& embedder, const AnalysisConfig& cfg) {
    cfg.validate();
    ForensicReport report;
    report.suspect_doc_id = suspect.doc_id();
    report.scorer_name = scorer.name();
    report.embedder_name = embedder.name();
    report.index_backend = index.backend_name();
    report.index_size = index.size();
    report.config = cfg;

    if (!index.empty() && index.backend_name() != embedder.name()) {
        throw Error(ErrorKind::InvalidArgument, "index was built with embedder '" + index.backend_name() +
                                                    "' but analysis uses '" + embedder.name() + "'");
    }

    const auto flagged = detect::detect_document(suspect, scorer, cfg.detector, cfg.jobs);

    std::optional<SourceEvidence> evidence;
    if (!index.empty() && has_tokens(suspect)) {
        const auto query = index::embed_document(suspect.raw_text(), embedder, cfg.chunk_bytes);
        report.retrieval = index.search(query, cfg.top_k);
        const auto& top = report.retrieval.front();
        if (!flagged.empty()) {
            auto text = sources.text(top.doc_id);
            if (!text) throw Error(ErrorKind::Io, "source text for retrieved document '" + top.doc_id + "' not found");
            evidence.emplace(SourceEvidence{top, restore::PreparedSource(
                                                     text::AnalyzedDocument(top.doc_id, std::move(*text)), embedder)});
        }
    }

    report.findings.resize(flagged.size());
    parallel_for(flagged.size(), cfg.jobs, [&](std::size_t i) {
        try {
            report.findings[i] =
                restore_phrase(flagged[i], suspect, evidence ? &*evidence : nullptr, embedder, cfg.restoration);
        } catch (const Error& e) {
            throw e.with_context("restoring '" + flagged[i].window.text + "'");
        }
    });
    return report;
}

std::string report_to_json(const ForensicReport& report,
                           const std::vector<std::pair<std::string, std::string>>& extra_config) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["suspect_doc_id"] = report.suspect_doc_id;
    j["backends"] = {{"scorer", report.scorer_name}, {"embedder", report.embedder_name}};

    ordered_json cfg;
    cfg["t_anomaly"] = report.config.detector.t_anomaly;
    cfg["min_window"] = report.config.detector.min_window;
    cfg["max_window"] = report.config.detector.max_window;
    cfg["t_align"] = report.config.restoration.t_align;
    cfg["gamma"] = report.config.restoration.gamma;
    cfg["max_ngram"] = report.config.restoration.max_ngram;
    cfg["chunk_bytes"] = report.config.chunk_bytes;
    cfg["top_k"] = report.config.top_k;
    for (const auto& [k, v] : extra_config) cfg[k] = v;
    j["config"] = cfg;

    ordered_json idx;
    idx["backend"] = report.index_backend;
    idx["entries"] = report.index_size;
    idx["hits"] = ordered_json::array();
    for (const auto& h : report.retrieval) {
        idx["hits"].push_back({{"rank", h.rank}, {"doc_id", h.doc_id}, {"cosine", h.cosine}});
    }
    j["retrieval"] = idx;

    j["findings"] = ordered_json::array();
    for (const auto& f : report.findings) {
        ordered_json o;
        o["char_span"] = {f.char_span.start, f.char_span.end};
        o["phrase"] = f.phrase;
        o["s_phrase"] = f.s_phrase;
        o["token_count"] = f.token_count;
        o["status"] = to_string(f.status);
        if (f.source_doc_id) o["source_doc_id"] = *f.source_doc_id;
        if (f.alignment_sim) o["alignment_sim"] = *f.alignment_sim;
        if (f.source_sentence_index) o["source_sentence_index"] = *f.source_sentence_index;
        if (f.source_sentence) o["source_sentence"] = *f.source_sentence;
        if (f.restored_term) o["restored_term"] = *f.restored_term;
        if (f.restored_span) o["restored_char_span"] = {f.restored_span->start, f.restored_span->end};
        if (f.restoration_sim) o["restoration_sim"] = *f.restoration_sim;
        j["findings"].push_back(std::move(o));
    }

    ordered_json summary;
    summary["findings"] = report.findings.size();
    for (auto s : {FindingStatus::Restored, FindingStatus::NoAlignment, FindingStatus::LowConfidence,
                   FindingStatus::RetrievalEmpty}) {
        summary[std::string(to_string(s))] = report.count(s);
    }
    j["summary"] = summary;
    return j.dump(2) + "\n";
}

}  // namespace tpf::pipeline
