#include "tpf/backend/reference.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "tpf/error.hpp"

using namespace tpf::backend;

// Expected values below were produced by tests/oracles/ref_embed_oracle.py, an independent
// re-implementation of the published recipe, and frozen here.

TEST(TokenVector, MatchesOracle) {
    const std::vector<double> expect = {0.15883920530278731,  -0.038634233236227493, 0.54192304698435456,
                                        -0.017280502479043999, 0.612620675645559,     -0.14551600183744251,
                                        -0.42620106659799417, 0.31807538426267562};
    const auto v = token_vector("big", 8, 0);
    ASSERT_EQ(v.size(), 8u);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(v[i], expect[i], 1e-15) << i;
}

TEST(RefEmbed, ComponentsMatchOracle) {
    const auto e = ref_embed("big data", 64, 0);
    ASSERT_EQ(e.dim(), 64u);
    const float expect[] = {0.0463083014f, -0.135892898f, 0.065299958f, -0.138825774f};
    for (int i = 0; i < 4; ++i) EXPECT_FLOAT_EQ(e.values()[i], expect[i]);
    EXPECT_NEAR(e.norm(), 1.0, 1e-6);
}

TEST(RefEmbed, CosinesMatchOracle) {
    EXPECT_NEAR(cosine(ref_embed("big data x", 64, 0), ref_embed("big data y", 64, 0)), 0.53254010153465392, 1e-6);
    EXPECT_NEAR(cosine(ref_embed("big data", 64, 0), ref_embed("data", 64, 0)), 0.69421328972577567, 1e-6);
    EXPECT_NEAR(cosine(ref_embed("big data", 64, 7), ref_embed("big data x", 64, 7)), 0.83526487953386708, 1e-6);
}

TEST(RefEmbed, CaseAndPunctuationInsensitive) {
    EXPECT_EQ(ref_embed("Big Data!", 64, 0), ref_embed("big data", 64, 0));
    EXPECT_EQ(ref_embed("data big", 64, 0), ref_embed("big data", 64, 0));
}

TEST(RefEmbed, Errors) {
    try {
        ref_embed("  ... ", 64, 0);
        FAIL();
    } catch (const tpf::Error& e) {
        EXPECT_EQ(e.kind(), tpf::ErrorKind::EmptyText);
    }
    try {
        ref_embed("x", 4, 0);
        FAIL();
    } catch (const tpf::Error& e) {
        EXPECT_EQ(e.kind(), tpf::ErrorKind::InvalidArgument);
    }
}

TEST(Lexicon, ParsesSwapTableAndRewritesLongestMatch) {
    const auto lex = Lexicon::parse_swap_table(
        "# original\ttortured\n"
        "big data\tcolossal data\n"
        "cancer\tmalignant growth\n"
        "cancer\tmalignant\n"
        "\n");
    EXPECT_EQ(lex.size(), 3u);
    EXPECT_EQ(lex.canonicalize({"malignant", "growth", "cell", "lines"}),
              (std::vector<std::string>{"cancer", "cell", "lines"}));
    EXPECT_EQ(lex.canonicalize({"colossal", "data", "malignant"}),
              (std::vector<std::string>{"big", "data", "cancer"}));
    EXPECT_EQ(lex.canonicalize({"colossal"}), (std::vector<std::string>{"colossal"}));
}

TEST(Lexicon, MalformedLineIsFormatError) {
    try {
        Lexicon::parse_swap_table("only one column\n");
        FAIL();
    } catch (const tpf::Error& e) {
        EXPECT_EQ(e.kind(), tpf::ErrorKind::Format);
    }
}

TEST(Lexicon, EmbedderUsesCanonicalForm) {
    Lexicon lex;
    lex.add("malignant growth", "cancer");
    const ReferenceEmbedder emb(64, 0, lex);
    EXPECT_NEAR(cosine(emb.embed_one("malignant growth cell lines"), emb.embed_one("cancer cell lines")), 1.0, 1e-6);
    EXPECT_NE(emb.name(), ReferenceEmbedder().name());
    EXPECT_EQ(ReferenceEmbedder().name(), "ref-64");

    Lexicon same;
    same.add("malignant growth", "cancer");
    EXPECT_EQ(lex.fingerprint(), same.fingerprint());
}

TEST(Bigram, LaplaceExample) {
    BigramTable lm;
    lm.add_text("big data big data");
    EXPECT_EQ(lm.total_tokens(), 4u);
    EXPECT_EQ(lm.vocabulary_size(), 2u);
    EXPECT_EQ(lm.bigram("big", "data"), 2u);
    // (2 + 1) / (2 + 2)
    EXPECT_NEAR(lm.bigram_logprob("big", "data"), std::log(0.75 + 1e-10), 1e-15);
    EXPECT_NEAR(lm.unigram_logprob("big"), std::log(0.5 + 1e-10), 1e-15);
}

TEST(Bigram, PhraseScoreHandComputed) {
    BigramTable lm;
    for (int i = 0; i < 10; ++i) lm.add_text("Big data analytics.");
    const auto tl = ref_mlm_score("big data", lm);
    ASSERT_EQ(tl.token_count(), 2u);
    // c(big)=10, N=30; c(big,data)=10, V=3
    EXPECT_NEAR(tl.logprobs[0], std::log(10.0 / 30.0 + 1e-10), 1e-12);
    EXPECT_NEAR(tl.logprobs[1], std::log(11.0 / 13.0 + 1e-10), 1e-12);
}

TEST(Bigram, UnseenTokenHitsSmoothingFloor) {
    BigramTable lm;
    lm.add_text("Some text here.");
    const auto tl = ref_mlm_score("zzz", lm);
    ASSERT_EQ(tl.token_count(), 1u);
    EXPECT_NEAR(tl.logprobs[0], std::log(1e-10), 1e-9);
    for (double x : ref_mlm_score("some unseen", lm).logprobs) EXPECT_LE(x, 0.0);
}

TEST(Bigram, BigramsStopAtSentenceBoundary) {
    BigramTable lm;
    lm.add_text("Alpha beta. Gamma delta.");
    EXPECT_EQ(lm.bigram("beta", "gamma"), 0u);
    EXPECT_EQ(lm.bigram("alpha", "beta"), 1u);
}

TEST(Bigram, EmptyPhraseIsEmptyText) {
    BigramTable lm;
    lm.add_text("x y");
    try {
        ref_mlm_score("!!", lm);
        FAIL();
    } catch (const tpf::Error& e) {
        EXPECT_EQ(e.kind(), tpf::ErrorKind::EmptyText);
    }
}

TEST(ReferenceScorer, BatchPreservesOrder) {
    BigramTable lm;
    lm.add_text("Big data analytics. Cancer cell lines.");
    const ReferenceMlmScorer scorer(lm);
    const std::vector<std::string> phrases = {"cell lines", "big data", "cancer"};
    const auto out = scorer.score_batch(phrases);
    ASSERT_EQ(out.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(out[i].logprobs, ref_mlm_score(phrases[i], lm).logprobs);
}
