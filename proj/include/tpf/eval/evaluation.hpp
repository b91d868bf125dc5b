#pragma once

// Restoration accuracy (EM@1), threshold sweep, and alignment robustness harnesses.
//
// Annotated pairs, one JSON object per line:
//   {"pair_id": str, "tortured_phrase": str, "expected_original": str,
//    "source_context": str, "tortured_sentence": str?, "suspect_text": str?}
// Parallel documents: <dir>/<id>.orig.txt next to <dir>/<id>.spun.txt.
// Labeled phrases for the sweep, one per line: {"phrase": str, "tortured": bool?}

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tpf/backend/backend.hpp"
#include "tpf/pipeline/pipeline.hpp"

namespace tpf::eval {

struct AnnotatedPair {
    std::string pair_id;
    std::string tortured_phrase;
    std::string expected_original;
    std::string source_context;
    std::optional<std::string> tortured_sentence;
    std::optional<std::string> suspect_text;
};

/// Throws Fixture on malformed lines, missing fields, duplicate ids, or an
/// expected_original that does not occur in source_context.
std::vector<AnnotatedPair> parse_pairs_jsonl(std::string_view jsonl);
std::vector<AnnotatedPair> load_pairs_jsonl(const std::filesystem::path& path);
std::string pairs_to_jsonl(const std::vector<AnnotatedPair>& pairs);

/// suspect_text if given; else tortured_sentence; else source_context with the first
/// word-aligned occurrence of expected_original replaced by tortured_phrase.
std::string suspect_text_for(const AnnotatedPair& pair);

enum class EvalMode { RetrievalAugmented, NoCorpus, StaticDictionary };
enum class CorpusScope { PerPair, Shared };

std::string_view to_string(EvalMode m) noexcept;
std::string_view to_string(CorpusScope s) noexcept;

struct PairOutcome {
    std::string pair_id;
    std::string expected;
    std::vector<std::string> predictions;  // restored terms (or dictionary picks), document order
    std::vector<std::string> statuses;     // one per finding
    std::optional<std::string> retrieved_doc_id;
    bool matched = false;
};

struct EvalRow {
    EvalMode mode = EvalMode::RetrievalAugmented;
    CorpusScope scope = CorpusScope::PerPair;
    std::size_t pairs = 0;
    std::size_t correct = 0;
    double em_at_1 = 0.0;
    std::vector<PairOutcome> outcomes;

    std::string label() const;
};

struct EvalOptions {
    EvalMode mode = EvalMode::RetrievalAugmented;
    CorpusScope scope = CorpusScope::PerPair;
    std::vector<std::string> dictionary;  // StaticDictionary only
    unsigned jobs = 1;
};

/// EM@1 = fraction of pairs where some prediction smart-matches expected_original.
/// RetrievalAugmented runs the full pipeline against the pair's own source (PerPair) or
/// against every source in the set (Shared). NoCorpus runs it against an empty index.
/// StaticDictionary embeds each flagged phrase and picks the nearest dictionary term.
EvalRow run_restoration_eval(const std::vector<AnnotatedPair>& pairs, const backend::MlmScorerBackend& scorer,
                             const backend::EmbedderBackend& embedder, const pipeline::AnalysisConfig& cfg,
                             const EvalOptions& opts);

std::string eval_rows_to_json(const std::vector<EvalRow>& rows);
/// Aligned plain-text table: Method | Corpus | Pairs | Correct | EM@1.
std::string eval_rows_to_table(const std::vector<EvalRow>& rows);

// ---------------------------------------------------------------------------

struct LabeledPhrase {
    std::string phrase;
    std::optional<bool> tortured;
};

/// Throws Fixture on malformed lines or when labels are present on only some lines.
std::vector<LabeledPhrase> parse_labeled_jsonl(std::string_view jsonl);
std::vector<LabeledPhrase> load_labeled_jsonl(const std::filesystem::path& path);

struct SweepPoint {
    double threshold = 0.0;
    std::size_t flagged_count = 0;
    // Present when the phrases carry labels.
    std::optional<std::size_t> tp, fp, tn, fn;
    std::optional<double> true_positive_rate, false_positive_rate, precision, f1;
};

struct SweepResult {
    std::vector<double> scores;  // s_phrase per input phrase
    std::vector<SweepPoint> points;
    std::optional<double> best_threshold;  // first F1 maximum in ascending order
};

/// Thresholds must be finite and strictly ascending (InvalidArgument otherwise).
SweepResult run_threshold_sweep(const std::vector<LabeledPhrase>& phrases, const backend::MlmScorerBackend& scorer,
                                const std::vector<double>& thresholds);

std::string sweep_to_json(const SweepResult& r);
std::string sweep_to_table(const SweepResult& r);

// ---------------------------------------------------------------------------

struct ParallelDocPair {
    std::string pair_id;
    std::string original_text;
    std::string spun_text;
};

/// Throws Fixture on an unpaired file, an empty text, or an empty directory.
std::vector<ParallelDocPair> load_parallel_pairs(const std::filesystem::path& dir);
void save_parallel_pairs(const std::vector<ParallelDocPair>& pairs, const std::filesystem::path& dir);

struct PairAlignment {
    std::string pair_id;
    std::vector<double> similarities;  // best alignment per spun sentence
    double median = 0.0;
};

struct AlignmentSummary {
    std::size_t pairs = 0;
    std::size_t sentences = 0;
    double min = 0.0, median = 0.0, max = 0.0, mean = 0.0;
    double fraction_passing = 0.0;  // similarity >= t_align
    double t_align = 0.0;
    std::vector<PairAlignment> per_pair;
};

AlignmentSummary run_alignment_robustness(const std::vector<ParallelDocPair>& pairs,
                                          const backend::EmbedderBackend& embedder,
                                          const restore::RestorationConfig& cfg, unsigned jobs = 1);

std::string alignment_to_json(const AlignmentSummary& s);
std::string alignment_to_table(const AlignmentSummary& s);

double median_of(std::vector<double> v);

}  // namespace tpf::eval
