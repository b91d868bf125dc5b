// tpf: tortured-phrase forensics command line.
//
// Exit codes: 0 clean / success, 3 findings present (analyze), 10 usage or configuration,
// 11 I/O, 12 file format or dimension mismatch, 13 backend or transport, 14 fixture,
// 15 empty corpus or index.

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "tpf/backend/reference.hpp"
#include "tpf/backend/remote.hpp"
#include "tpf/error.hpp"
#include "tpf/eval/evaluation.hpp"
#include "tpf/eval/generate.hpp"
#include "tpf/index/ingest.hpp"
#include "tpf/io.hpp"
#include "tpf/pipeline/pipeline.hpp"
#include "tpf/simd/kernels.hpp"

namespace fs = std::filesystem;
using namespace tpf;

namespace {

constexpr int kExitFindings = 3;
constexpr int kExitUsage = 10;

int exit_code_for(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvalidArgument:
        case ErrorKind::EmptyText: return kExitUsage;
        case ErrorKind::Io: return 11;
        case ErrorKind::Format:
        case ErrorKind::DimensionMismatch: return 12;
        case ErrorKind::Transport:
        case ErrorKind::Protocol:
        case ErrorKind::Backend: return 13;
        case ErrorKind::Fixture: return 14;
        case ErrorKind::EmptyCorpus:
        case ErrorKind::EmptyIndex:
        case ErrorKind::EmptySource: return 15;
    }
    return kExitUsage;
}

struct BackendFlags {
    std::string backend = "reference";
    std::string endpoint;
    std::size_t dim = backend::ReferenceEmbedder::kDefaultDim;
    std::uint64_t seed = 0;
    std::string lexicon;
    std::size_t max_batch = 64;
    long timeout_ms = 30000;

    void add_to(CLI::App* app, bool with_embedder = true) {
        app->add_option("--backend", backend, "Model backend")
            ->check(CLI::IsMember({"reference", "remote"}))
            ->envname("TPF_BACKEND")
            ->capture_default_str();
        app->add_option("--endpoint", endpoint, "Sidecar base URL for --backend remote")->envname("TPF_ENDPOINT");
        app->add_option("--max-batch", max_batch, "Remote request batch cap")->envname("TPF_MAX_BATCH")->capture_default_str();
        app->add_option("--timeout-ms", timeout_ms, "Remote request timeout")->envname("TPF_TIMEOUT_MS")->capture_default_str();
        if (!with_embedder) return;
        app->add_option("--dim", dim, "Reference embedder dimension")->envname("TPF_DIM")->capture_default_str();
        app->add_option("--seed", seed, "Reference embedder seed")->envname("TPF_SEED")->capture_default_str();
        app->add_option("--lexicon", lexicon, "Swap table (original<TAB>tortured) for the reference embedder")
            ->envname("TPF_LEXICON");
    }

    backend::RemoteOptions remote() const {
        if (endpoint.empty()) throw Error(ErrorKind::InvalidArgument, "--backend remote requires --endpoint");
        backend::RemoteOptions o;
        o.endpoint = endpoint;
        o.max_batch = max_batch;
        o.timeout = std::chrono::milliseconds(timeout_ms);
        return o;
    }

    std::unique_ptr<backend::EmbedderBackend> embedder() const {
        if (backend == "remote") return std::make_unique<backend::RemoteEmbedder>(remote());
        backend::Lexicon lex;
        if (!lexicon.empty()) lex = backend::Lexicon::load_swap_table(lexicon);
        return std::make_unique<backend::ReferenceEmbedder>(dim, seed, std::move(lex));
    }

    /// `lm_texts` feeds the reference bigram table; ignored for the remote backend.
    std::unique_ptr<backend::MlmScorerBackend> scorer(const std::vector<std::string>& lm_texts) const {
        if (backend == "remote") return std::make_unique<backend::RemoteMlmScorer>(remote());
        backend::BigramTable table;
        for (const auto& t : lm_texts) table.add_text(t);
        return std::make_unique<backend::ReferenceMlmScorer>(std::move(table));
    }

    std::vector<std::pair<std::string, std::string>> snapshot() const {
        std::vector<std::pair<std::string, std::string>> out = {{"backend", backend}};
        if (backend == "remote") {
            out.emplace_back("endpoint", endpoint);
        } else {
            out.emplace_back("embedder_dim", std::to_string(dim));
            out.emplace_back("embedder_seed", std::to_string(seed));
        }
        return out;
    }
};

struct ThresholdFlags {
    pipeline::AnalysisConfig cfg;

    void add_to(CLI::App* app, bool detector = true, bool restoration = true) {
        if (detector) {
            app->add_option("--t-anomaly", cfg.detector.t_anomaly, "Flag phrases scoring strictly below this")
                ->envname("TPF_T_ANOMALY")
                ->capture_default_str();
            app->add_option("--min-window", cfg.detector.min_window)->envname("TPF_MIN_WINDOW")->capture_default_str();
            app->add_option("--max-window", cfg.detector.max_window)->envname("TPF_MAX_WINDOW")->capture_default_str();
        }
        if (restoration) {
            app->add_option("--t-align", cfg.restoration.t_align, "Sentence alignment gate (inclusive)")
                ->envname("TPF_T_ALIGN")
                ->capture_default_str();
            app->add_option("--gamma", cfg.restoration.gamma, "Restoration confidence gate (inclusive)")
                ->envname("TPF_GAMMA")
                ->capture_default_str();
            app->add_option("--max-ngram", cfg.restoration.max_ngram)->envname("TPF_MAX_NGRAM")->capture_default_str();
            app->add_option("--chunk-bytes", cfg.chunk_bytes)->envname("TPF_CHUNK_BYTES")->capture_default_str();
        }
    }
};

std::vector<std::string> read_corpus_texts(const fs::path& dir) {
    std::vector<std::string> out;
    for (const auto& f : io::list_text_files(dir)) {
        try {
            out.push_back(io::read_file(f));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Io) throw;
        }
    }
    return out;
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty() || out_path == "-") {
        std::cout << content;
        std::cout.flush();
    } else {
        io::write_file_atomic(out_path, content);
    }
}

std::vector<double> parse_thresholds(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error(ErrorKind::InvalidArgument, "bad threshold '" + item + "'");
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tortured-phrase detection, source retrieval and extractive restoration"};
    app.require_subcommand(1);
    app.fallthrough();
    unsigned jobs = 1;
    bool quiet = false;
    app.add_option("--jobs,-j", jobs, "Worker threads")->envname("TPF_JOBS")->capture_default_str();
    app.add_flag("--quiet,-q", quiet, "Suppress progress notes on standard error");

    // index
    auto* index_cmd = app.add_subcommand("index", "Embed a corpus directory into an index file");
    std::string corpus_dir, index_out, manifest_out;
    BackendFlags index_backend;
    ThresholdFlags index_flags;
    index_cmd->add_option("--corpus", corpus_dir, "Directory of .txt files")->required()->envname("TPF_CORPUS");
    index_cmd->add_option("--out", index_out, "Index file to write")->required();
    index_cmd->add_option("--manifest", manifest_out, "Manifest JSON (default: <out>.manifest.json)");
    index_cmd->add_option("--chunk-bytes", index_flags.cfg.chunk_bytes)->envname("TPF_CHUNK_BYTES")->capture_default_str();
    index_backend.add_to(index_cmd);

    // analyze
    auto* analyze_cmd = app.add_subcommand("analyze", "Detect, retrieve and restore in one suspect document");
    std::string suspect_path, index_path, source_dir, lm_dir, report_out;
    BackendFlags analyze_backend;
    ThresholdFlags analyze_flags;
    analyze_cmd->add_option("--suspect", suspect_path, "Suspect .txt document")->required();
    analyze_cmd->add_option("--index", index_path, "Index file from `tpf index`")->required()->envname("TPF_INDEX");
    analyze_cmd->add_option("--corpus", source_dir, "Corpus directory holding the indexed texts")
        ->required()
        ->envname("TPF_CORPUS");
    analyze_cmd->add_option("--lm-corpus", lm_dir, "Reference scorer training texts (default: --corpus)")
        ->envname("TPF_LM_CORPUS");
    analyze_cmd->add_option("--top-k", analyze_flags.cfg.top_k, "Retrieval hits to report")->capture_default_str();
    analyze_cmd->add_option("--out", report_out, "Report path (default: stdout)");
    analyze_backend.add_to(analyze_cmd);
    analyze_flags.add_to(analyze_cmd);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Restoration accuracy and alignment robustness");
    std::string eval_mode = "retrieval", pairs_path, pairs_dir, dictionary_path, scope = "both", eval_out, eval_lm;
    BackendFlags eval_backend;
    ThresholdFlags eval_flags;
    eval_cmd->add_option("--mode", eval_mode)
        ->check(CLI::IsMember({"retrieval", "no-corpus", "dictionary", "alignment"}))
        ->capture_default_str();
    eval_cmd->add_option("--pairs", pairs_path, "Annotated pairs (JSON lines)");
    eval_cmd->add_option("--pairs-dir", pairs_dir, "Directory of <id>.orig.txt / <id>.spun.txt (alignment mode)");
    eval_cmd->add_option("--dictionary", dictionary_path, "One term per line (dictionary mode)");
    eval_cmd->add_option("--corpus-scope", scope, "Retrieval corpus: each pair's own source, all sources, or both")
        ->check(CLI::IsMember({"per-pair", "shared", "both"}))
        ->capture_default_str();
    eval_cmd->add_option("--lm-corpus", eval_lm, "Reference scorer training texts (default: the pairs' sources)");
    eval_cmd->add_option("--out", eval_out, "JSON results path; the table goes to stdout");
    eval_backend.add_to(eval_cmd);
    eval_flags.add_to(eval_cmd);

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Flag counts and F1 across anomaly thresholds");
    std::string phrases_path, thresholds_csv = "-13,-8,-5", sweep_lm, sweep_out;
    BackendFlags sweep_backend;
    sweep_cmd->add_option("--phrases", phrases_path, "Labeled phrases (JSON lines)")->required();
    sweep_cmd->add_option("--thresholds", thresholds_csv, "Comma-separated, ascending")->capture_default_str();
    sweep_cmd->add_option("--lm-corpus", sweep_lm, "Reference scorer training texts")->envname("TPF_LM_CORPUS");
    sweep_cmd->add_option("--out", sweep_out, "JSON results path; the table goes to stdout");
    sweep_backend.add_to(sweep_cmd, false);

    // generate
    auto* gen_cmd = app.add_subcommand("generate", "Write seeded synthetic fixtures");
    gen_cmd->require_subcommand(1);
    gen_cmd->fallthrough();
    std::uint64_t gen_seed = 1;
    std::size_t gen_count = 50, gen_sentences = 8;
    double swap_fraction = 0.2;
    std::string swap_table, gen_out;
    auto* planted_cmd = gen_cmd->add_subcommand("planted", "Annotated pairs from the swap table");
    planted_cmd->add_option("--seed", gen_seed)->envname("TPF_SEED")->capture_default_str();
    planted_cmd->add_option("--count", gen_count)->capture_default_str();
    planted_cmd->add_option("--swap-table", swap_table)->required();
    planted_cmd->add_option("--out", gen_out, "JSON lines path")->required();
    auto* parallel_cmd = gen_cmd->add_subcommand("parallel", "Original/spun document pairs");
    parallel_cmd->add_option("--seed", gen_seed)->envname("TPF_SEED")->capture_default_str();
    parallel_cmd->add_option("--count", gen_count)->capture_default_str();
    parallel_cmd->add_option("--swap-fraction", swap_fraction)->capture_default_str();
    parallel_cmd->add_option("--sentences", gen_sentences)->capture_default_str();
    parallel_cmd->add_option("--out", gen_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    auto note = [&](const std::string& msg) {
        if (!quiet) std::cerr << msg << "\n";
    };

    try {
        if (index_cmd->parsed()) {
            const auto embedder = index_backend.embedder();
            index::IngestOptions opts;
            opts.chunk_bytes = index_flags.cfg.chunk_bytes;
            opts.jobs = jobs;
            const auto result = index::ingest_corpus(corpus_dir, *embedder, opts);
            index::save_index(result.index, index_out);
            io::write_file_atomic(manifest_out.empty() ? index_out + ".manifest.json" : manifest_out,
                                  result.manifest.to_json());
            note("indexed " + std::to_string(result.manifest.documents.size()) + " documents (" +
                 std::to_string(result.manifest.skipped.size()) + " skipped) with " + embedder->name() + " [" +
                 std::string(simd::to_string(simd::active_isa())) + "]");
            for (const auto& s : result.manifest.skipped) note("  skipped " + s.path + ": " + s.reason);
            return 0;
        }

        if (analyze_cmd->parsed()) {
            auto cfg = analyze_flags.cfg;
            cfg.jobs = jobs;
            cfg.validate();
            const auto embedder = analyze_backend.embedder();
            const auto scorer = analyze_backend.scorer(
                analyze_backend.backend == "reference" ? read_corpus_texts(lm_dir.empty() ? source_dir : lm_dir)
                                                       : std::vector<std::string>{});
            const auto idx = index::load_index(index_path);
            const pipeline::DirectorySourceStore store(source_dir);
            const text::AnalyzedDocument suspect(fs::path(suspect_path).stem().string(), io::read_file(suspect_path));
            const auto report = pipeline::analyze(suspect, idx, store, *scorer, *embedder, cfg);
            emit(report_out, pipeline::report_to_json(report, analyze_backend.snapshot()));
            note(std::to_string(report.findings.size()) + " finding(s), " +
                 std::to_string(report.count(pipeline::FindingStatus::Restored)) + " restored");
            return report.findings.empty() ? 0 : kExitFindings;
        }

        if (eval_cmd->parsed()) {
            auto cfg = eval_flags.cfg;
            cfg.jobs = 1;
            const auto embedder = eval_backend.embedder();
            if (eval_mode == "alignment") {
                if (pairs_dir.empty()) throw Error(ErrorKind::InvalidArgument, "--mode alignment requires --pairs-dir");
                const auto pairs = eval::load_parallel_pairs(pairs_dir);
                const auto summary = eval::run_alignment_robustness(pairs, *embedder, cfg.restoration, jobs);
                if (!eval_out.empty()) io::write_file_atomic(eval_out, eval::alignment_to_json(summary));
                std::cout << eval::alignment_to_table(summary);
                return 0;
            }
            if (pairs_path.empty()) throw Error(ErrorKind::InvalidArgument, "--mode " + eval_mode + " requires --pairs");
            const auto pairs = eval::load_pairs_jsonl(pairs_path);
            std::vector<std::string> lm_texts;
            if (eval_backend.backend == "reference") {
                if (!eval_lm.empty()) {
                    lm_texts = read_corpus_texts(eval_lm);
                } else {
                    for (const auto& p : pairs) lm_texts.push_back(p.source_context);
                }
            }
            const auto scorer = eval_backend.scorer(lm_texts);

            eval::EvalOptions opts;
            opts.jobs = jobs;
            std::vector<eval::EvalRow> rows;
            if (eval_mode == "retrieval") {
                opts.mode = eval::EvalMode::RetrievalAugmented;
                if (scope != "shared") {
                    opts.scope = eval::CorpusScope::PerPair;
                    rows.push_back(eval::run_restoration_eval(pairs, *scorer, *embedder, cfg, opts));
                }
                if (scope != "per-pair") {
                    opts.scope = eval::CorpusScope::Shared;
                    rows.push_back(eval::run_restoration_eval(pairs, *scorer, *embedder, cfg, opts));
                }
            } else if (eval_mode == "no-corpus") {
                opts.mode = eval::EvalMode::NoCorpus;
                rows.push_back(eval::run_restoration_eval(pairs, *scorer, *embedder, cfg, opts));
            } else {
                if (dictionary_path.empty()) throw Error(ErrorKind::InvalidArgument, "--mode dictionary requires --dictionary");
                opts.mode = eval::EvalMode::StaticDictionary;
                std::stringstream ss(io::read_file(dictionary_path));
                for (std::string line; std::getline(ss, line);) {
                    if (!line.empty() && line.back() == '\r') line.pop_back();
                    if (!line.empty() && line.front() != '#') opts.dictionary.push_back(line);
                }
                rows.push_back(eval::run_restoration_eval(pairs, *scorer, *embedder, cfg, opts));
            }
            if (!eval_out.empty()) io::write_file_atomic(eval_out, eval::eval_rows_to_json(rows));
            std::cout << eval::eval_rows_to_table(rows);
            return 0;
        }

        if (sweep_cmd->parsed()) {
            const auto phrases = eval::load_labeled_jsonl(phrases_path);
            if (sweep_backend.backend == "reference" && sweep_lm.empty()) {
                throw Error(ErrorKind::InvalidArgument, "the reference scorer needs --lm-corpus");
            }
            const auto scorer = sweep_backend.scorer(sweep_backend.backend == "reference" ? read_corpus_texts(sweep_lm)
                                                                                          : std::vector<std::string>{});
            const auto result = eval::run_threshold_sweep(phrases, *scorer, parse_thresholds(thresholds_csv));
            if (!sweep_out.empty()) io::write_file_atomic(sweep_out, eval::sweep_to_json(result));
            std::cout << eval::sweep_to_table(result);
            if (result.best_threshold) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "best F1 at threshold %.2f\n", *result.best_threshold);
                std::cout << buf;
            }
            return 0;
        }

        if (planted_cmd->parsed()) {
            const auto swaps = backend::parse_swap_entries(io::read_file(swap_table));
            const auto pairs = eval::generate_planted_pairs(gen_seed, gen_count, swaps);
            io::write_file_atomic(gen_out, eval::pairs_to_jsonl(pairs));
            note("wrote " + std::to_string(pairs.size()) + " planted pairs to " + gen_out);
            return 0;
        }

        if (parallel_cmd->parsed()) {
            const auto pairs = eval::generate_parallel_pairs(gen_seed, gen_count, swap_fraction, gen_sentences);
            eval::save_parallel_pairs(pairs, gen_out);
            note("wrote " + std::to_string(pairs.size()) + " document pairs to " + gen_out);
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "tpf: " << to_string(e.kind()) << ": " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "tpf: internal error: " << e.what() << "\n";
        return 19;
    }
    return kExitUsage;
}
