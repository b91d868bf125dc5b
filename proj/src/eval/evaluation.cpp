#include "tpf/eval/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include <json.hpp>

#include "tpf/error.hpp"
#include "tpf/eval/smart_match.hpp"
#include "tpf/io.hpp"
#include "tpf/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace tpf::eval {

namespace {

template <typename Fn>
void for_each_jsonl(std::string_view jsonl, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < jsonl.size()) {
        std::size_t eol = jsonl.find('\n', pos);
        if (eol == std::string_view::npos) eol = jsonl.size();
        std::string_view line = jsonl.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::Fixture, "line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
        }
        if (!j.is_object()) throw Error(ErrorKind::Fixture, "line " + std::to_string(line_no) + ": not an object");
        try {
            fn(j, line_no);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::Fixture, "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

std::string required_string(const nlohmann::json& j, const char* key, std::size_t line_no) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string() || it->get<std::string>().empty()) {
        throw Error(ErrorKind::Fixture, "line " + std::to_string(line_no) + ": missing or empty \"" + key + "\"");
    }
    return it->get<std::string>();
}

std::optional<std::string> optional_string(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<std::string>();
}

bool contains_token_run(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
    if (needle.empty() || needle.size() > hay.size()) return false;
    return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

bool word_byte(unsigned char c) { return c >= 0x80 || std::isalnum(c) || c == '-' || c == '\''; }

std::string pct(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * x);
    return buf;
}

std::string fixed(double x, int digits = 4) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = text::Utf8Text(header[c]).size();
        for (const auto& r : rows) width[c] = std::max(width[c], text::Utf8Text(r[c]).size());
    }
    auto line = [&](const std::vector<std::string>& cells) {
        std::string out;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c) out += " | ";
            out += cells[c];
            if (c + 1 < cells.size()) out += std::string(width[c] - text::Utf8Text(cells[c]).size(), ' ');
        }
        return out + "\n";
    };
    std::string out = line(header);
    std::string rule;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c) rule += "-+-";
        rule += std::string(width[c], '-');
    }
    out += rule + "\n";
    for (const auto& r : rows) out += line(r);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Dataset A

std::vector<AnnotatedPair> parse_pairs_jsonl(std::string_view jsonl) {
    std::vector<AnnotatedPair> out;
    std::set<std::string> ids;
    for_each_jsonl(jsonl, [&](const nlohmann::json& j, std::size_t line_no) {
        AnnotatedPair p;
        p.pair_id = j.contains("pair_id") ? required_string(j, "pair_id", line_no) : "pair_" + std::to_string(line_no);
        p.tortured_phrase = required_string(j, "tortured_phrase", line_no);
        p.expected_original = required_string(j, "expected_original", line_no);
        p.source_context = required_string(j, "source_context", line_no);
        p.tortured_sentence = optional_string(j, "tortured_sentence");
        p.suspect_text = optional_string(j, "suspect_text");
        if (!contains_token_run(text::word_tokens(p.source_context), text::word_tokens(p.expected_original))) {
            throw Error(ErrorKind::Fixture, "line " + std::to_string(line_no) + ": expected_original '" +
                                                p.expected_original + "' does not occur in source_context");
        }
        if (!ids.insert(p.pair_id).second) {
            throw Error(ErrorKind::Fixture, "line " + std::to_string(line_no) + ": duplicate pair_id '" + p.pair_id + "'");
        }
        out.push_back(std::move(p));
    });
    return out;
}

std::vector<AnnotatedPair> load_pairs_jsonl(const fs::path& path) {
    try {
        return parse_pairs_jsonl(io::read_file(path));
    } catch (const Error& e) {
        throw e.with_context(path.string());
    }
}

std::string pairs_to_jsonl(const std::vector<AnnotatedPair>& pairs) {
    std::string out;
    for (const auto& p : pairs) {
        ordered_json j;
        j["pair_id"] = p.pair_id;
        j["tortured_phrase"] = p.tortured_phrase;
        j["expected_original"] = p.expected_original;
        j["source_context"] = p.source_context;
        if (p.tortured_sentence) j["tortured_sentence"] = *p.tortured_sentence;
        if (p.suspect_text) j["suspect_text"] = *p.suspect_text;
        out += j.dump() + "\n";
    }
    return out;
}

std::string suspect_text_for(const AnnotatedPair& pair) {
    if (pair.suspect_text) return *pair.suspect_text;
    if (pair.tortured_sentence) return *pair.tortured_sentence;
    // ASCII case folding keeps byte offsets aligned with the original text.
    auto fold = [](std::string s) {
        for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    };
    const std::string& src = pair.source_context;
    const std::string& term = pair.expected_original;
    const std::string folded_src = fold(src), folded_term = fold(term);
    const bool exact = src.find(term) != std::string::npos;
    const std::string& hay = exact ? src : folded_src;
    const std::string& needle = exact ? term : folded_term;
    for (std::size_t at = hay.find(needle); at != std::string::npos; at = hay.find(needle, at + 1)) {
        const bool left_ok = at == 0 || !word_byte(static_cast<unsigned char>(src[at - 1]));
        const std::size_t end = at + term.size();
        const bool right_ok = end == src.size() || !word_byte(static_cast<unsigned char>(src[end]));
        if (left_ok && right_ok) return src.substr(0, at) + pair.tortured_phrase + src.substr(end);
    }
    throw Error(ErrorKind::Fixture, "pair '" + pair.pair_id + "': cannot place the tortured phrase in source_context");
}

// ---------------------------------------------------------------------------
// Experiment I

std::string_view to_string(EvalMode m) noexcept {
    switch (m) {
        case EvalMode::RetrievalAugmented: return "retrieval";
        case EvalMode::NoCorpus: return "no-corpus";
        case EvalMode::StaticDictionary: return "dictionary";
    }
    return "?";
}

std::string_view to_string(CorpusScope s) noexcept {
    return s == CorpusScope::PerPair ? "per-pair" : "shared";
}

std::string EvalRow::label() const {
    switch (mode) {
        case EvalMode::RetrievalAugmented: return "Retrieval-augmented restoration";
        case EvalMode::NoCorpus: return "No-corpus baseline";
        case EvalMode::StaticDictionary: return "Static dictionary baseline";
    }
    return "?";
}

EvalRow run_restoration_eval(const std::vector<AnnotatedPair>& pairs, const backend::MlmScorerBackend& scorer,
                             const backend::EmbedderBackend& embedder, const pipeline::AnalysisConfig& cfg,
                             const EvalOptions& opts) {
    if (pairs.empty()) throw Error(ErrorKind::Fixture, "evaluation needs at least one pair");
    cfg.validate();
    if (opts.mode == EvalMode::StaticDictionary && opts.dictionary.empty()) {
        throw Error(ErrorKind::InvalidArgument, "dictionary mode needs a non-empty term dictionary");
    }

    const bool shared = opts.mode == EvalMode::RetrievalAugmented && opts.scope == CorpusScope::Shared;
    const index::CorpusIndex empty_index(embedder.dim(), embedder.name());
    std::optional<index::CorpusIndex> shared_index;
    pipeline::MemorySourceStore shared_store;
    if (shared) {
        std::vector<backend::Embedding> vecs(pairs.size());
        parallel_for(pairs.size(), opts.jobs, [&](std::size_t i) {
            vecs[i] = index::embed_document(pairs[i].source_context, embedder, cfg.chunk_bytes);
        });
        shared_index.emplace(embedder.dim(), embedder.name());
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            shared_index->add(pairs[i].pair_id, vecs[i]);
            shared_store.put(pairs[i].pair_id, pairs[i].source_context);
        }
    }

    std::vector<backend::Embedding> dict_vecs;
    if (opts.mode == EvalMode::StaticDictionary) dict_vecs = embedder.embed(opts.dictionary);

    pipeline::AnalysisConfig inner = cfg;
    inner.jobs = 1;

    EvalRow row;
    row.mode = opts.mode;
    row.scope = shared ? CorpusScope::Shared : CorpusScope::PerPair;
    row.pairs = pairs.size();
    row.outcomes.resize(pairs.size());
    parallel_for(pairs.size(), opts.jobs, [&](std::size_t i) {
        const AnnotatedPair& p = pairs[i];
        PairOutcome& out = row.outcomes[i];
        out.pair_id = p.pair_id;
        out.expected = p.expected_original;
        const text::AnalyzedDocument suspect(p.pair_id, suspect_text_for(p));
        try {
            if (opts.mode == EvalMode::StaticDictionary) {
                for (const auto& f : detect::detect_document(suspect, scorer, inner.detector)) {
                    const auto v = embedder.embed_one(f.window.text);
                    std::size_t best = 0;
                    double best_sim = -2.0;
                    for (std::size_t d = 0; d < dict_vecs.size(); ++d) {
                        const double s = backend::cosine(v, dict_vecs[d]);
                        if (s > best_sim) {
                            best_sim = s;
                            best = d;
                        }
                    }
                    out.predictions.push_back(opts.dictionary[best]);
                    out.statuses.emplace_back("DICTIONARY");
                }
            } else {
                pipeline::ForensicReport report;
                if (opts.mode == EvalMode::NoCorpus) {
                    report = pipeline::analyze(suspect, empty_index, shared_store, scorer, embedder, inner);
                } else if (shared) {
                    report = pipeline::analyze(suspect, *shared_index, shared_store, scorer, embedder, inner);
                } else {
                    index::CorpusIndex one(embedder.dim(), embedder.name());
                    one.add(p.pair_id, index::embed_document(p.source_context, embedder, inner.chunk_bytes));
                    pipeline::MemorySourceStore store;
                    store.put(p.pair_id, p.source_context);
                    report = pipeline::analyze(suspect, one, store, scorer, embedder, inner);
                }
                if (!report.retrieval.empty()) out.retrieved_doc_id = report.retrieval.front().doc_id;
                for (const auto& f : report.findings) {
                    out.statuses.emplace_back(pipeline::to_string(f.status));
                    if (f.status == pipeline::FindingStatus::Restored) out.predictions.push_back(*f.restored_term);
                }
            }
        } catch (const Error& e) {
            throw e.with_context("pair '" + p.pair_id + "'");
        }
        out.matched = std::any_of(out.predictions.begin(), out.predictions.end(),
                                  [&](const std::string& t) { return smart_match(t, p.expected_original); });
    });
    for (const auto& o : row.outcomes) row.correct += o.matched;
    row.em_at_1 = static_cast<double>(row.correct) / static_cast<double>(row.pairs);
    return row;
}

std::string eval_rows_to_json(const std::vector<EvalRow>& rows) {
    ordered_json j = ordered_json::array();
    for (const auto& r : rows) {
        ordered_json o;
        o["method"] = r.label();
        o["mode"] = to_string(r.mode);
        o["corpus"] = to_string(r.scope);
        o["pairs"] = r.pairs;
        o["correct"] = r.correct;
        o["em_at_1"] = r.em_at_1;
        o["outcomes"] = ordered_json::array();
        for (const auto& p : r.outcomes) {
            ordered_json po;
            po["pair_id"] = p.pair_id;
            po["expected"] = p.expected;
            po["predictions"] = p.predictions;
            po["statuses"] = p.statuses;
            if (p.retrieved_doc_id) po["retrieved_doc_id"] = *p.retrieved_doc_id;
            po["matched"] = p.matched;
            o["outcomes"].push_back(std::move(po));
        }
        j.push_back(std::move(o));
    }
    return ordered_json{{"rows", j}}.dump(2) + "\n";
}

std::string eval_rows_to_table(const std::vector<EvalRow>& rows) {
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows) {
        const char* corpus = r.mode == EvalMode::RetrievalAugmented ? (r.scope == CorpusScope::Shared ? "shared" : "per-pair")
                                                                    : "none";
        cells.push_back({r.label(), corpus, std::to_string(r.pairs), std::to_string(r.correct), pct(r.em_at_1)});
    }
    return render_table({"Method", "Corpus", "Pairs", "Correct", "EM@1"}, cells);
}

// ---------------------------------------------------------------------------
// Experiment II

std::vector<LabeledPhrase> parse_labeled_jsonl(std::string_view jsonl) {
    std::vector<LabeledPhrase> out;
    std::size_t labeled = 0;
    for_each_jsonl(jsonl, [&](const nlohmann::json& j, std::size_t line_no) {
        LabeledPhrase p;
        p.phrase = required_string(j, "phrase", line_no);
        if (auto it = j.find("tortured"); it != j.end() && !it->is_null()) {
            if (!it->is_boolean()) throw Error(ErrorKind::Fixture, "line " + std::to_string(line_no) + ": \"tortured\" must be a boolean");
            p.tortured = it->get<bool>();
            ++labeled;
        }
        out.push_back(std::move(p));
    });
    if (out.empty()) throw Error(ErrorKind::Fixture, "no labeled phrases");
    if (labeled != 0 && labeled != out.size()) {
        throw Error(ErrorKind::Fixture, "labels must be given for all phrases or none");
    }
    return out;
}

std::vector<LabeledPhrase> load_labeled_jsonl(const fs::path& path) {
    try {
        return parse_labeled_jsonl(io::read_file(path));
    } catch (const Error& e) {
        throw e.with_context(path.string());
    }
}

SweepResult run_threshold_sweep(const std::vector<LabeledPhrase>& phrases, const backend::MlmScorerBackend& scorer,
                                const std::vector<double>& thresholds) {
    if (thresholds.empty()) throw Error(ErrorKind::InvalidArgument, "sweep needs at least one threshold");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!std::isfinite(thresholds[i]) || (i > 0 && !(thresholds[i - 1] < thresholds[i]))) {
            throw Error(ErrorKind::InvalidArgument, "thresholds must be finite and strictly ascending");
        }
    }

    std::vector<text::PhraseWindow> windows;
    for (const auto& p : phrases) {
        text::PhraseWindow w;
        w.text = p.phrase;
        windows.push_back(std::move(w));
    }
    SweepResult r;
    for (const auto& s : detect::score_windows(windows, scorer)) r.scores.push_back(s.s_phrase);

    const bool labeled = !phrases.empty() && phrases.front().tortured.has_value();
    std::optional<double> best_f1;
    for (double t : thresholds) {
        detect::DetectorConfig cfg;
        cfg.t_anomaly = t;
        SweepPoint pt;
        pt.threshold = t;
        std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
        for (std::size_t i = 0; i < phrases.size(); ++i) {
            detect::PhraseScore s;
            s.s_phrase = r.scores[i];
            const bool flagged = detect::apply_threshold(s, cfg).flagged;
            pt.flagged_count += flagged;
            if (labeled) {
                const bool pos = *phrases[i].tortured;
                tp += flagged && pos;
                fp += flagged && !pos;
                tn += !flagged && !pos;
                fn += !flagged && pos;
            }
        }
        if (labeled) {
            pt.tp = tp, pt.fp = fp, pt.tn = tn, pt.fn = fn;
            auto ratio = [](std::size_t a, std::size_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / b; };
            pt.true_positive_rate = ratio(tp, tp + fn);
            pt.false_positive_rate = ratio(fp, fp + tn);
            pt.precision = ratio(tp, tp + fp);
            pt.f1 = ratio(2 * tp, 2 * tp + fp + fn);
            if (!best_f1 || *pt.f1 > *best_f1) {
                best_f1 = pt.f1;
                r.best_threshold = t;
            }
        }
        r.points.push_back(pt);
    }
    return r;
}

std::string sweep_to_json(const SweepResult& r) {
    ordered_json j;
    j["phrases"] = r.scores.size();
    j["points"] = ordered_json::array();
    for (const auto& p : r.points) {
        ordered_json o;
        o["threshold"] = p.threshold;
        o["flagged_count"] = p.flagged_count;
        if (p.f1) {
            o["tp"] = *p.tp;
            o["fp"] = *p.fp;
            o["tn"] = *p.tn;
            o["fn"] = *p.fn;
            o["true_positive_rate"] = *p.true_positive_rate;
            o["false_positive_rate"] = *p.false_positive_rate;
            o["precision"] = *p.precision;
            o["f1"] = *p.f1;
        }
        j["points"].push_back(std::move(o));
    }
    j["best_threshold"] = r.best_threshold ? ordered_json(*r.best_threshold) : ordered_json(nullptr);
    return j.dump(2) + "\n";
}

std::string sweep_to_table(const SweepResult& r) {
    std::vector<std::vector<std::string>> cells;
    for (const auto& p : r.points) {
        cells.push_back({fixed(p.threshold, 2), std::to_string(p.flagged_count),
                         p.f1 ? fixed(*p.true_positive_rate) : "-", p.f1 ? fixed(*p.false_positive_rate) : "-",
                         p.f1 ? fixed(*p.f1) : "-"});
    }
    return render_table({"Threshold", "Flagged", "TPR", "FPR", "F1"}, cells);
}

// ---------------------------------------------------------------------------
// Experiment III

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2.0;
}

std::vector<ParallelDocPair> load_parallel_pairs(const fs::path& dir) {
    std::map<std::string, std::pair<std::optional<fs::path>, std::optional<fs::path>>> found;
    for (const auto& f : io::list_text_files(dir)) {
        const std::string id = io::doc_id_for(dir, f);
        auto ends_with = [](const std::string& s, std::string_view suf) {
            return s.size() > suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
        };
        if (ends_with(id, ".orig")) {
            found[id.substr(0, id.size() - 5)].first = f;
        } else if (ends_with(id, ".spun")) {
            found[id.substr(0, id.size() - 5)].second = f;
        }
    }
    if (found.empty()) throw Error(ErrorKind::Fixture, "no <id>.orig.txt / <id>.spun.txt pairs under " + dir.string());
    std::vector<ParallelDocPair> out;
    for (const auto& [id, files] : found) {
        if (!files.first || !files.second) throw Error(ErrorKind::Fixture, "pair '" + id + "' is missing its partner file");
        ParallelDocPair p{id, io::read_file(*files.first), io::read_file(*files.second)};
        if (text::word_tokens(p.original_text).empty() || text::word_tokens(p.spun_text).empty()) {
            throw Error(ErrorKind::Fixture, "pair '" + id + "' has an empty document");
        }
        out.push_back(std::move(p));
    }
    return out;
}

void save_parallel_pairs(const std::vector<ParallelDocPair>& pairs, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
    for (const auto& p : pairs) {
        io::write_file_atomic(dir / (p.pair_id + ".orig.txt"), p.original_text);
        io::write_file_atomic(dir / (p.pair_id + ".spun.txt"), p.spun_text);
    }
}

AlignmentSummary run_alignment_robustness(const std::vector<ParallelDocPair>& pairs,
                                          const backend::EmbedderBackend& embedder,
                                          const restore::RestorationConfig& cfg, unsigned jobs) {
    if (pairs.empty()) throw Error(ErrorKind::Fixture, "alignment robustness needs at least one pair");
    cfg.validate();
    AlignmentSummary s;
    s.pairs = pairs.size();
    s.t_align = cfg.t_align;
    s.per_pair.resize(pairs.size());
    parallel_for(pairs.size(), jobs, [&](std::size_t i) {
        const auto& p = pairs[i];
        const restore::PreparedSource orig(text::AnalyzedDocument(p.pair_id + ".orig", p.original_text), embedder);
        const text::AnalyzedDocument spun(p.pair_id + ".spun", p.spun_text);
        std::vector<std::string> sentences;
        for (std::size_t k = 0; k < spun.sentences().size(); ++k) {
            if (!spun.sentences()[k].tokens.empty()) sentences.emplace_back(spun.sentence_text(k));
        }
        PairAlignment& pa = s.per_pair[i];
        pa.pair_id = p.pair_id;
        try {
            for (const auto& v : embedder.embed(sentences)) {
                pa.similarities.push_back(restore::align_sentence(v, orig, cfg).similarity);
            }
        } catch (const Error& e) {
            throw e.with_context("pair '" + p.pair_id + "'");
        }
        pa.median = median_of(pa.similarities);
    });

    std::vector<double> all;
    for (const auto& pa : s.per_pair) all.insert(all.end(), pa.similarities.begin(), pa.similarities.end());
    s.sentences = all.size();
    if (!all.empty()) {
        s.min = *std::min_element(all.begin(), all.end());
        s.max = *std::max_element(all.begin(), all.end());
        double sum = 0.0;
        std::size_t pass = 0;
        for (double x : all) {
            sum += x;
            pass += restore::passes_gate(x, cfg.t_align);
        }
        s.mean = sum / static_cast<double>(all.size());
        s.fraction_passing = static_cast<double>(pass) / static_cast<double>(all.size());
        s.median = median_of(std::move(all));
    }
    return s;
}

std::string alignment_to_json(const AlignmentSummary& s) {
    ordered_json j;
    j["pairs"] = s.pairs;
    j["sentences"] = s.sentences;
    j["min"] = s.min;
    j["median"] = s.median;
    j["max"] = s.max;
    j["mean"] = s.mean;
    j["t_align"] = s.t_align;
    j["fraction_passing"] = s.fraction_passing;
    j["per_pair"] = ordered_json::array();
    for (const auto& p : s.per_pair) {
        j["per_pair"].push_back({{"pair_id", p.pair_id}, {"median", p.median}, {"similarities", p.similarities}});
    }
    return j.dump(2) + "\n";
}

std::string alignment_to_table(const AlignmentSummary& s) {
    return render_table({"Pairs", "Sentences", "Min", "Median", "Max", "Mean", "Passing gate"},
                        {{std::to_string(s.pairs), std::to_string(s.sentences), fixed(s.min), fixed(s.median),
                          fixed(s.max), fixed(s.mean), pct(s.fraction_passing)}});
}

}  // namespace tpf::eval
