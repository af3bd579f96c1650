#include <gtest/gtest.h>

#include <set>

#include "logqa/baselines.hpp"
#include "logqa/error.hpp"
#include "support.hpp"

using namespace logqa;

TEST(Jaccard, Examples) {
  EXPECT_DOUBLE_EQ(jaccard({"a", "b"}, {"a", "b"}), 1.0);
  EXPECT_DOUBLE_EQ(jaccard({"a"}, {"b"}), 0.0);
  EXPECT_DOUBLE_EQ(jaccard({"a", "b", "c"}, {"b", "c", "d"}), 0.5);
  EXPECT_DOUBLE_EQ(jaccard({"a", "a", "b"}, {"a", "b"}), 1.0);
  EXPECT_DOUBLE_EQ(jaccard({}, {}), 0.0);
}

TEST(EditDistance, Examples) {
  EXPECT_EQ(edit_distance("abc", "abd"), 1u);
  EXPECT_EQ(edit_distance("", "abc"), 3u);
  EXPECT_EQ(edit_distance("kitten", "sitting"), 3u);
  EXPECT_EQ(edit_distance("flaw", "lawn"), 2u);
  EXPECT_EQ(edit_distance("same", "same"), 0u);
}

TEST(JaroWinkler, KnownValues) {
  EXPECT_NEAR(jaro("MARTHA", "MARHTA"), 0.944444, 1e-6);
  EXPECT_NEAR(jaro_winkler("MARTHA", "MARHTA"), 0.961111, 1e-6);
  EXPECT_NEAR(jaro_winkler("DWAYNE", "DUANE"), 0.84, 1e-6);
  EXPECT_NEAR(jaro_winkler("DIXON", "DICKSONX"), 0.813333, 1e-6);
  EXPECT_DOUBLE_EQ(jaro_winkler("abc", "abc"), 1.0);
  EXPECT_DOUBLE_EQ(jaro_winkler("abc", "xyz"), 0.0);
}

TEST(Bm25, MatchesReferenceTable) {
  // Reference values computed with an independent Okapi BM25 implementation
  // (k1 1.5, b 0.75, epsilon 0.25).
  const std::vector<Tokens> docs{{"received", "block", "blk_1", "of", "size", "67108864"},
                                 {"verification", "succeeded", "for", "blk_1"},
                                 {"packetresponder", "1", "for", "block", "blk_2", "terminating"}};
  const Bm25 bm(docs);
  EXPECT_NEAR(bm.idf("size"), 0.5108256237659907, 1e-12);
  EXPECT_NEAR(bm.idf("block"), 0.06876498781465258, 1e-12);
  EXPECT_NEAR(bm.idf("for"), 0.06876498781465258, 1e-12);

  const auto a = bm.scores({"size", "of", "block", "blk_1"});
  EXPECT_NEAR(a[0], 1.097449678733, 1e-9);
  EXPECT_NEAR(a[1], 0.077481676411, 1e-9);
  EXPECT_NEAR(a[2], 0.065102947043, 1e-9);

  const auto b = bm.scores({"blk_1", "blk_1", "for"});
  EXPECT_NEAR(b[0], 0.130205894087, 1e-9);
  EXPECT_NEAR(b[1], 0.232445029233, 1e-9);
  EXPECT_NEAR(b[2], 0.065102947043, 1e-9);

  const auto c = bm.scores({"terminating"});
  EXPECT_DOUBLE_EQ(c[0], 0.0);
  EXPECT_DOUBLE_EQ(c[1], 0.0);
  EXPECT_NEAR(c[2], 0.483621892323, 1e-9);
  EXPECT_DOUBLE_EQ(bm.score({"unseen"}, 0), 0.0);
}

TEST(BaselineRetriever, HigherIsBetterEverywhere) {
  const auto corpus = support::hdfs_toy_corpus();
  const std::string q = "Verification succeeded for blk_7701";
  const auto vocab = Vocab::build(corpus.all_tokens());
  const auto frozen = EncoderParams::random(vocab.size(), 16, 1);
  for (auto m : all_baseline_methods()) {
    BaselineRetriever r(m, corpus, 3, &vocab, &frozen);
    const auto s = r.scores(q);
    ASSERT_EQ(s.size(), corpus.size());
    if (m != BaselineMethod::kRandom) EXPECT_EQ(r.retrieve(q, 1).front(), 7) << baseline_name(m);
    const auto top = r.retrieve(q, corpus.size());
    EXPECT_EQ(top, rank_top_k(s, corpus.size()));
    EXPECT_EQ(std::set<LogId>(top.begin(), top.end()).size(), corpus.size());
  }
}

TEST(BaselineRetriever, EditDistanceNegated) {
  const Corpus c("x", {"abd", "zzzzzz"});
  BaselineRetriever r(BaselineMethod::kEditDistance, c, 0);
  const auto s = r.scores("abc");
  EXPECT_DOUBLE_EQ(s[0], -1.0);
  EXPECT_DOUBLE_EQ(s[1], -6.0);
}

TEST(BaselineRetriever, RandomIsSeeded) {
  const auto corpus = support::hdfs_toy_corpus();
  BaselineRetriever a(BaselineMethod::kRandom, corpus, 11), b(BaselineMethod::kRandom, corpus, 11);
  EXPECT_EQ(a.retrieve("q one", 8), b.retrieve("q one", 8));
  BaselineRetriever c(BaselineMethod::kRandom, corpus, 12);
  bool differs = false;
  for (int i = 0; i < 5 && !differs; ++i) {
    const std::string q = "question " + std::to_string(i);
    differs = a.retrieve(q, 8) != c.retrieve(q, 8);
  }
  EXPECT_TRUE(differs);
}

TEST(BaselineRetriever, Names) {
  for (auto m : all_baseline_methods()) EXPECT_EQ(parse_baseline_method(baseline_name(m)), m);
  EXPECT_EQ(all_baseline_methods().size(), 6u);
  EXPECT_THROW(parse_baseline_method("tfidf"), Error);
  EXPECT_THROW(BaselineRetriever(BaselineMethod::kFrozenCosine, support::hdfs_toy_corpus(), 1), Error);
}
