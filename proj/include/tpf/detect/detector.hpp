#pragma once

// Phrase likelihood scoring and the static anomaly threshold.

#include <cstddef>
#include <vector>

#include "tpf/backend/backend.hpp"
#include "tpf/text/textmodel.hpp"

namespace tpf::detect {

struct DetectorConfig {
    double t_anomaly = -8.0;
    std::size_t min_window = 2;
    std::size_t max_window = 4;

    /// Throws InvalidArgument unless t_anomaly < 0 (finite) and 1 <= min_window <= max_window.
    void validate() const;
};

struct PhraseScore {
    text::PhraseWindow window;
    double s_phrase = 0.0;        // mean per-token log-probability
    std::size_t token_count = 0;  // N as tokenized by the scorer
    bool flagged = false;
};

/// Strict: a score equal to the threshold is not anomalous.
inline bool below_threshold(double s_phrase, double t_anomaly) noexcept { return s_phrase < t_anomaly; }

/// Mean of the token log-probabilities. Throws Backend on an empty, non-finite or positive result.
PhraseScore make_score(const text::PhraseWindow& window, const backend::TokenLogProbs& logprobs);

/// Scores one window. Scorer failures are rethrown with the window text and position attached.
PhraseScore score_phrase(const text::PhraseWindow& window, const backend::MlmScorerBackend& scorer);

PhraseScore apply_threshold(PhraseScore score, const DetectorConfig& cfg) noexcept;

/// Scores every window; identical window texts are sent to the scorer once. Batches run on
/// up to `jobs` threads; the result order matches `windows`.
std::vector<PhraseScore> score_windows(const std::vector<text::PhraseWindow>& windows,
                                       const backend::MlmScorerBackend& scorer, unsigned jobs = 1,
                                       std::size_t batch_size = 256);

/// Unions overlapping flagged windows within a sentence into maximal spans. Each merged
/// score keeps the minimum s_phrase of its members (and that member's token_count).
/// Input need not be sorted; output is in document order.
std::vector<PhraseScore> merge_flagged(const text::AnalyzedDocument& doc, std::vector<PhraseScore> flagged);

/// Windows -> scores -> threshold -> merge. Returns flagged spans only.
std::vector<PhraseScore> detect_document(const text::AnalyzedDocument& doc, const backend::MlmScorerBackend& scorer,
                                         const DetectorConfig& cfg, unsigned jobs = 1);

}  // namespace tpf::detect
