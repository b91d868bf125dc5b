#pragma once

// detect -> retrieve -> align -> restore, and the JSON forensic report.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tpf/backend/backend.hpp"
#include "tpf/detect/detector.hpp"
#include "tpf/index/corpus_index.hpp"
#include "tpf/index/ingest.hpp"
#include "tpf/restore/restoration.hpp"
#include "tpf/text/textmodel.hpp"

namespace tpf::pipeline {

enum class FindingStatus { Restored, NoAlignment, LowConfidence, RetrievalEmpty };

std::string_view to_string(FindingStatus s) noexcept;

struct Finding {
    text::CharSpan char_span;
    std::string phrase;
    double s_phrase = 0.0;
    std::size_t token_count = 0;
    FindingStatus status = FindingStatus::RetrievalEmpty;

    std::optional<std::string> source_doc_id;
    std::optional<std::size_t> source_sentence_index;
    std::optional<std::string> source_sentence;
    std::optional<double> alignment_sim;
    std::optional<std::string> restored_term;
    std::optional<text::CharSpan> restored_span;  // code points in the source document
    std::optional<double> restoration_sim;
};

/// Full-text lookup for retrieved doc_ids; the index stores vectors only.
class SourceStore {
public:
    virtual ~SourceStore() = default;
    virtual std::optional<std::string> text(const std::string& doc_id) const = 0;
};

/// `<root>/<doc_id>.txt`, matching the ids produced by ingest_corpus.
class DirectorySourceStore final : public SourceStore {
public:
    explicit DirectorySourceStore(std::filesystem::path root) : root_(std::move(root)) {}
    std::optional<std::string> text(const std::string& doc_id) const override;

private:
    std::filesystem::path root_;
};

class MemorySourceStore final : public SourceStore {
public:
    void put(std::string doc_id, std::string text) { docs_[std::move(doc_id)] = std::move(text); }
    std::optional<std::string> text(const std::string& doc_id) const override;

private:
    std::map<std::string, std::string> docs_;
};

/// The retrieved document, prepared for alignment.
struct SourceEvidence {
    index::RetrievalHit hit;
    restore::PreparedSource source;
};

/// Decision flow for one merged flagged span. Without evidence the finding is
/// RETRIEVAL_EMPTY; otherwise the alignment gate and then the confidence gate decide.
Finding restore_phrase(const detect::PhraseScore& flagged, const text::AnalyzedDocument& suspect,
                       const SourceEvidence* evidence, const backend::EmbedderBackend& embedder,
                       const restore::RestorationConfig& cfg);

struct AnalysisConfig {
    detect::DetectorConfig detector;
    restore::RestorationConfig restoration;
    std::size_t chunk_bytes = index::kDefaultChunkBytes;
    std::size_t top_k = 1;  // hits reported; only rank 1 is aligned
    unsigned jobs = 1;

    void validate() const;
};

struct ForensicReport {
    std::string suspect_doc_id;
    std::string scorer_name;
    std::string embedder_name;
    std::string index_backend;
    std::size_t index_size = 0;
    AnalysisConfig config;
    std::vector<index::RetrievalHit> retrieval;  // empty when the index is empty
    std::vector<Finding> findings;

    std::size_t count(FindingStatus s) const noexcept;
};

/// Throws InvalidArgument when the index was built by a different embedder, Io when the
/// top-ranked document's text is unavailable; backend errors propagate with context.
ForensicReport analyze(const text::AnalyzedDocument& suspect, const index::CorpusIndex& index,
                       const SourceStore& sources, const backend::MlmScorerBackend& scorer,
                       const backend::EmbedderBackend& embedder, const AnalysisConfig& cfg);

/// Stable, pretty-printed JSON with a trailing newline. `extra_config` entries (for
/// example reference backend parameters) are merged into the config snapshot.
std::string report_to_json(const ForensicReport& report,
                           const std::vector<std::pair<std::string, std::string>>& extra_config = {});

}  // namespace tpf::pipeline
