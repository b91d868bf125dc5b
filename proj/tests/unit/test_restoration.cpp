#include "tpf/restore/restoration.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "tpf/backend/reference.hpp"

using namespace tpf;
using namespace tpf::restore;

namespace {

backend::ReferenceEmbedder lexicon_embedder() {
    return backend::ReferenceEmbedder(64, 0, backend::Lexicon::parse_swap_table("cancer\tmalignant growth\n"));
}

}  // namespace

TEST(Gates, AreInclusive) {
    EXPECT_TRUE(passes_gate(0.45, 0.45));
    EXPECT_FALSE(passes_gate(std::nextafter(0.45, 0.0), 0.45));
    RestorationConfig c;
    EXPECT_NO_THROW(c.validate());
    c.t_align = 0.0;
    EXPECT_TPF_ERROR(c.validate(), ErrorKind::InvalidArgument);
    c = {};
    c.gamma = 1.5;
    EXPECT_TPF_ERROR(c.validate(), ErrorKind::InvalidArgument);
    c = {};
    c.max_ngram = 0;
    EXPECT_TPF_ERROR(c.validate(), ErrorKind::InvalidArgument);
}

TEST(AlignSentence, IdenticalSentenceWins) {
    const backend::ReferenceEmbedder emb;
    const text::AnalyzedDocument src("s", "Plants need water. Random forest models are popular. Bridges carry traffic.");
    const auto r = align_sentence("Random forest models are popular.", src, emb, {});
    EXPECT_EQ(r.source_sentence_index, 1u);
    EXPECT_EQ(r.source_sentence_text, "Random forest models are popular.");
    EXPECT_NEAR(r.similarity, 1.0, 1e-6);
    EXPECT_TRUE(r.passed_gate);
}

TEST(AlignSentence, DisjointVocabularyFailsTheGate) {
    const backend::ReferenceEmbedder emb;
    const text::AnalyzedDocument src("s", "Plants need water. Bridges carry traffic.");
    const auto r = align_sentence("Quantum qubits decohere quickly.", src, emb, {});
    EXPECT_FALSE(r.passed_gate);
    EXPECT_LT(r.similarity, 0.45);
}

TEST(AlignSentence, TiesGoToTheEarliestSentence) {
    const backend::ReferenceEmbedder emb;
    const text::AnalyzedDocument src("s", "Alpha beta. Gamma delta. Alpha beta.");
    EXPECT_EQ(align_sentence("alpha beta", src, emb, {}).source_sentence_index, 0u);
}

TEST(AlignSentence, EmptySourceIsAnError) {
    const backend::ReferenceEmbedder emb;
    EXPECT_TPF_ERROR(align_sentence("alpha", text::AnalyzedDocument("s", " ... !!! "), emb, {}),
                     ErrorKind::EmptySource);
    EXPECT_TPF_ERROR(align_sentence("alpha", text::AnalyzedDocument("s", ""), emb, {}), ErrorKind::EmptySource);
}

TEST(AlignSentence, TorturedSentenceFindsItsOriginal) {
    const auto emb = lexicon_embedder();
    const text::AnalyzedDocument src(
        "source_doc_14",
        "Tumor biology research relies on laboratory models. The study analyzed cancer cell lines to determine how "
        "they respond to a new drug. Cells were treated with increasing doses for three days.");
    const auto r = align_sentence(
        "The study analyzed malignant growth cell lines to determine how they respond to a new drug.", src, emb, {});
    EXPECT_EQ(r.source_sentence_index, 1u);
    EXPECT_TRUE(r.passed_gate);
}

TEST(SentenceNgrams, SixWordsGiveTwentyCandidates) {
    const auto c = sentence_ngrams("The study analyzed cancer cell lines.", 5);
    // 6 + 5 + 4 + 3 + 2 word n-grams.
    ASSERT_EQ(c.size(), 20u);
    EXPECT_EQ(c.front().ngram_text, "The");
    EXPECT_EQ(c[5].ngram_text, "lines");
    EXPECT_EQ(c[6].ngram_text, "The study");
    EXPECT_EQ(c.back().ngram_text, "study analyzed cancer cell lines");
    for (std::size_t i = 1; i < c.size(); ++i) {
        EXPECT_TRUE(c[i - 1].n < c[i].n || (c[i - 1].n == c[i].n && c[i - 1].token_start < c[i].token_start));
    }
}

TEST(SentenceNgrams, SpansAreVerbatimCodePointSlices) {
    const std::string s = "Caf\xc3\xa9 na\xc3\xafve r\xc3\xa9sum\xc3\xa9 works, mostly.";
    const text::Utf8Text t(s);
    for (const auto& c : sentence_ngrams(s, 3)) EXPECT_EQ(t.slice(c.span), c.ngram_text);
    EXPECT_TRUE(sentence_ngrams("  ...  ", 5).empty());
}

TEST(ScanNgrams, MatchesBruteForceArgmax) {
    const backend::ReferenceEmbedder emb(64, 1);
    const std::string sentence = "Gradient boosting was more accurate on most tabular datasets.";
    const char* phrases[] = {"boosting accuracy", "tabular data", "most", "accurate gradient", "datasets on most"};
    for (const char* phrase : phrases) {
        const auto scan = scan_ngrams(phrase, sentence, emb, {});
        ASSERT_TRUE(scan.best);
        const auto pv = emb.embed_one(phrase);
        const auto all = sentence_ngrams(sentence, 5);
        ASSERT_EQ(scan.candidates.size(), all.size());
        double best = -2.0;
        std::size_t best_i = 0;
        for (std::size_t i = 0; i < all.size(); ++i) {
            const double s = backend::cosine(pv, emb.embed_one(all[i].ngram_text));
            EXPECT_DOUBLE_EQ(scan.candidates[i].similarity, s);
            if (s > best) {
                best = s;
                best_i = i;
            }
        }
        EXPECT_EQ(scan.best->ngram_text, all[best_i].ngram_text) << phrase;
        EXPECT_EQ(scan.best->accepted, best >= 0.60);
    }
}

TEST(ScanNgrams, RestoresTheOriginalTerm) {
    const auto emb = lexicon_embedder();
    const auto scan =
        scan_ngrams("malignant growth", "The study analyzed cancer cell lines to determine how they respond.", emb, {});
    ASSERT_TRUE(scan.best);
    EXPECT_EQ(scan.best->ngram_text, "cancer");
    EXPECT_TRUE(scan.best->accepted);
    EXPECT_EQ(scan.best->n, 1u);
}

TEST(ScanNgrams, ShorterNgramWinsTies) {
    const backend::ReferenceEmbedder emb;
    // "data" and "data data" embed identically.
    const auto scan = scan_ngrams("data", "data data", emb, {});
    ASSERT_TRUE(scan.best);
    EXPECT_EQ(scan.best->n, 1u);
    EXPECT_EQ(scan.best->token_start, 0u);
}

TEST(ScanNgrams, EmptySentenceHasNoBest) {
    const backend::ReferenceEmbedder emb;
    const auto scan = scan_ngrams("big data", " -- ", emb, {});
    EXPECT_FALSE(scan.best);
    EXPECT_TRUE(scan.candidates.empty());
}

TEST(ScanNgrams, RaisingGammaNeverAcceptsMore) {
    const backend::ReferenceEmbedder emb;
    RestorationConfig lo, hi;
    hi.gamma = 0.80;
    const char* phrases[] = {"cell lines", "new drug", "malignant growth", "respond", "how they"};
    for (const char* p : phrases) {
        const auto a = scan_ngrams(p, "The study analyzed cancer cell lines to determine how they respond.", emb, lo);
        const auto b = scan_ngrams(p, "The study analyzed cancer cell lines to determine how they respond.", emb, hi);
        EXPECT_EQ(a.best->ngram_text, b.best->ngram_text);
        EXPECT_GE(a.best->accepted, b.best->accepted);
    }
}
