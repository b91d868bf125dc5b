#include "tpf/detect/detector.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tpf/error.hpp"
#include "tpf/parallel.hpp"

namespace tpf::detect {

void DetectorConfig::validate() const {
    if (!std::isfinite(t_anomaly) || !(t_anomaly < 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "t_anomaly must be a finite negative number");
    }
    if (min_window < 1 || min_window > max_window) {
        throw Error(ErrorKind::InvalidArgument, "window bounds must satisfy 1 <= min_window <= max_window");
    }
}

PhraseScore make_score(const text::PhraseWindow& window, const backend::TokenLogProbs& logprobs) {
    if (logprobs.logprobs.empty()) {
        throw Error(ErrorKind::Backend, "scorer returned no tokens for '" + window.text + "'");
    }
    // What a scorer computes for p = 1.
    const double ceiling = std::log(1.0 + backend::kLogSmoothing);
    double sum = 0.0;
    for (double lp : logprobs.logprobs) {
        if (!std::isfinite(lp) || lp > ceiling) {
            throw Error(ErrorKind::Backend, "scorer returned an invalid log-probability for '" + window.text + "'");
        }
        sum += lp;
    }
    PhraseScore s;
    s.window = window;
    s.token_count = logprobs.logprobs.size();
    s.s_phrase = sum / static_cast<double>(s.token_count);
    return s;
}

namespace {

std::string window_context(const text::PhraseWindow& w) {
    return "scoring window '" + w.text + "' (sentence " + std::to_string(w.sentence_index) + ", token " +
           std::to_string(w.token_start) + ")";
}

}  // namespace

PhraseScore score_phrase(const text::PhraseWindow& window, const backend::MlmScorerBackend& scorer) {
    try {
        return make_score(window, scorer.score_tokens(window.text));
    } catch (const Error& e) {
        throw e.with_context(window_context(window));
    }
}

PhraseScore apply_threshold(PhraseScore score, const DetectorConfig& cfg) noexcept {
    score.flagged = below_threshold(score.s_phrase, cfg.t_anomaly);
    return score;
}

std::vector<PhraseScore> score_windows(const std::vector<text::PhraseWindow>& windows,
                                       const backend::MlmScorerBackend& scorer, unsigned jobs,
                                       std::size_t batch_size) {
    std::map<std::string_view, std::size_t> slot;
    std::vector<std::string> unique;
    std::vector<std::size_t> first_window;
    std::vector<std::size_t> slot_of(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        auto [it, inserted] = slot.try_emplace(windows[i].text, unique.size());
        if (inserted) {
            unique.push_back(windows[i].text);
            first_window.push_back(i);
        }
        slot_of[i] = it->second;
    }

    batch_size = std::max<std::size_t>(batch_size, 1);
    const std::size_t batches = (unique.size() + batch_size - 1) / batch_size;
    std::vector<backend::TokenLogProbs> results(unique.size());
    parallel_for(batches, jobs, [&](std::size_t b) {
        const std::size_t lo = b * batch_size;
        const std::size_t hi = std::min(unique.size(), lo + batch_size);
        std::vector<backend::TokenLogProbs> out;
        try {
            out = scorer.score_batch(std::span<const std::string>(unique).subspan(lo, hi - lo));
        } catch (const Error& e) {
            throw e.with_context(window_context(windows[first_window[lo]]));
        }
        if (out.size() != hi - lo) {
            throw Error(ErrorKind::Backend, "scorer returned " + std::to_string(out.size()) + " results for " +
                                                std::to_string(hi - lo) + " phrases");
        }
        std::move(out.begin(), out.end(), results.begin() + static_cast<std::ptrdiff_t>(lo));
    });

    std::vector<PhraseScore> scores;
    scores.reserve(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        try {
            scores.push_back(make_score(windows[i], results[slot_of[i]]));
        } catch (const Error& e) {
            throw e.with_context(window_context(windows[i]));
        }
    }
    return scores;
}

std::vector<PhraseScore> merge_flagged(const text::AnalyzedDocument& doc, std::vector<PhraseScore> flagged) {
    std::sort(flagged.begin(), flagged.end(), [](const PhraseScore& a, const PhraseScore& b) {
        if (a.window.sentence_index != b.window.sentence_index) return a.window.sentence_index < b.window.sentence_index;
        if (a.window.token_start != b.window.token_start) return a.window.token_start < b.window.token_start;
        return a.window.token_len < b.window.token_len;
    });

    std::vector<PhraseScore> merged;
    for (PhraseScore& s : flagged) {
        if (!merged.empty()) {
            PhraseScore& cur = merged.back();
            const std::size_t cur_end = cur.window.token_start + cur.window.token_len;
            if (cur.window.sentence_index == s.window.sentence_index && s.window.token_start < cur_end) {
                const std::size_t end = std::max(cur_end, s.window.token_start + s.window.token_len);
                cur.window.token_len = end - cur.window.token_start;
                if (s.s_phrase < cur.s_phrase) {
                    cur.s_phrase = s.s_phrase;
                    cur.token_count = s.token_count;
                }
                continue;
            }
        }
        merged.push_back(std::move(s));
    }

    for (PhraseScore& m : merged) {
        if (m.window.sentence_index >= doc.sentences().size() ||
            m.window.token_start + m.window.token_len > doc.sentences()[m.window.sentence_index].tokens.size() ||
            m.window.token_len == 0) {
            throw Error(ErrorKind::InvalidArgument, "flagged window lies outside the document");
        }
        const auto& tokens = doc.sentences()[m.window.sentence_index].tokens;
        m.window.char_span = {tokens[m.window.token_start].start,
                              tokens[m.window.token_start + m.window.token_len - 1].end};
        m.window.text = std::string(doc.slice(m.window.char_span));
        m.flagged = true;
    }
    return merged;
}

std::vector<PhraseScore> detect_document(const text::AnalyzedDocument& doc, const backend::MlmScorerBackend& scorer,
                                         const DetectorConfig& cfg, unsigned jobs) {
    cfg.validate();
    const auto windows = text::extract_windows(doc, cfg.min_window, cfg.max_window);
    std::vector<PhraseScore> flagged;
    for (PhraseScore& s : score_windows(windows, scorer, jobs)) {
        s = apply_threshold(std::move(s), cfg);
        if (s.flagged) flagged.push_back(std::move(s));
    }
    return merge_flagged(doc, std::move(flagged));
}

}  // namespace tpf::detect
