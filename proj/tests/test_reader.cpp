#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "logqa/error.hpp"
#include "logqa/parsing.hpp"
#include "logqa/reader.hpp"
#include "support.hpp"

using namespace logqa;
using support::central_difference;
using support::gradient_close;

namespace {

Vocab toy_vocab() {
  const std::vector<Tokens> streams{tokenize("what is the size of block blk_1 ? received 500 from host a b c d e f g h")};
  return Vocab::build(streams);
}

ReaderModel random_model(const Vocab& vocab, std::size_t dim, std::uint64_t seed, double range = 0.5) {
  const auto enc = EncoderParams::random(vocab.size(), dim, seed, range);
  return ReaderModel::warm_start(enc, seed + 1, 2, range);
}

PackedInput toy_input(const Vocab& vocab) {
  return pack_input(tokenize("what is the size of blk_1 ?"),
                    tokenize("received block blk_1 of size 500 from host 500"), vocab,
                    {false, false, true, false, false, true, false, true, true});
}

std::pair<std::size_t, std::size_t> brute_force(const std::vector<double>& ps,
                                                const std::vector<double>& pe, std::size_t max_len,
                                                double& best) {
  best = -1.0;
  std::pair<std::size_t, std::size_t> arg{0, 0};
  for (std::size_t s = 0; s < ps.size(); ++s)
    for (std::size_t e = 0; e < pe.size(); ++e) {
      if (e < s || e - s >= max_len) continue;
      const double v = ps[s] * pe[e];
      if (v > best || (v == best && std::make_pair(s, e) < arg)) {
        best = v;
        arg = {s, e};
      }
    }
  return arg;
}

// Corpus, parse, vocab and a reader-ready collection for the walkthrough.
struct ToyPipeline {
  Corpus corpus = support::hdfs_toy_corpus();
  ParsedCorpus parsed = parse_corpus(corpus);
  std::vector<QaPair> train{
      {"What is the size of block blk_5142679 ?", "67108864", 0},
      {"What is the size of block blk_8812 ?", "3542", 4},
      {"Which file was deleted for blk_9001 ?", "/mnt/hadoop/dfs/data/current/subdir4/blk_9001", 6},
      {"Which responder terminated block blk_8812 ?", "2", 5},
      {"Which responder terminated block blk_5142679 ?", "1", 2},
  };
  Vocab vocab = build_retriever_vocab(corpus, train);
  LogCollection logs{corpus, parsed, vocab};
};

}  // namespace

TEST(Pack, Layout) {
  const auto v = toy_vocab();
  const auto in = toy_input(v);
  EXPECT_EQ(in.question_len, 7u);
  EXPECT_EQ(in.ids[7], Vocab::kSep);
  EXPECT_EQ(in.log_begin(), 8u);
  EXPECT_EQ(in.log_len(), 9u);
  EXPECT_EQ(in.ids.size(), 17u);
  EXPECT_THROW(pack_input({"q"}, {}, v), Error);
  EXPECT_THROW(pack_input({"q"}, {"a", "b"}, v, {true}), Error);
}

TEST(States, DeterministicAndQuestionSensitive) {
  const auto v = toy_vocab();
  const auto m = random_model(v, 8, 3);
  const auto in = toy_input(v);
  const auto a = token_states(m, in);
  const auto b = token_states(m, in);
  ASSERT_EQ(a.size(), in.ids.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);

  auto changed = in;
  changed.ids[3] = v.id("host");
  const auto c = token_states(m, changed);
  for (std::size_t i = in.log_begin(); i < in.ids.size(); ++i) EXPECT_FALSE(c[i].isApprox(a[i], 1e-12));
}

TEST(States, DegenerateToProjectedEmbeddings) {
  const auto v = toy_vocab();
  auto m = random_model(v, 8, 3);
  m.window_radius = 0;
  m.mixer.setZero();
  const auto in = toy_input(v);
  const auto f = reader_forward(m, in);
  for (std::size_t i = 0; i < in.ids.size(); ++i) {
    const Vector projected = m.projection * m.embedding.row(in.ids[i]).transpose();
    EXPECT_TRUE(f.projected[i].isApprox(projected, 1e-14));
    EXPECT_TRUE(f.states[i].isApprox(Vector(projected.array().tanh()), 1e-14));
  }
}

TEST(States, WindowsStayInsideSegments) {
  const auto v = toy_vocab();
  auto m = random_model(v, 8, 3);
  m.mixer.setZero();
  const auto in = toy_input(v);
  auto q_changed = in;
  q_changed.ids[in.question_len - 1] = v.id("host");
  const auto a = token_states(m, in), b = token_states(m, q_changed);
  // Without the mixer the log segment cannot see question tokens.
  for (std::size_t i = in.log_begin(); i < in.ids.size(); ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(SpanDistributions, NormalizedOverLogPositions) {
  const auto v = toy_vocab();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = random_model(v, 8, seed, 2.0);
    const auto in = toy_input(v);
    const auto d = span_distributions(m, in, token_states(m, in));
    ASSERT_EQ(d.start.size(), in.log_len());
    EXPECT_NEAR(std::accumulate(d.start.begin(), d.start.end(), 0.0), 1.0, 1e-9);
    EXPECT_NEAR(std::accumulate(d.end.begin(), d.end.end(), 0.0), 1.0, 1e-9);
  }
}

TEST(SpanDistributions, SingleTokenAndZeroHead) {
  const auto v = toy_vocab();
  auto m = random_model(v, 8, 1);
  const auto one = pack_input(tokenize("what size"), {"500"}, v);
  const auto d1 = span_distributions(m, one, token_states(m, one));
  EXPECT_EQ(d1.start, std::vector<double>{1.0});
  EXPECT_EQ(d1.end, std::vector<double>{1.0});

  m.w_start.setZero();
  const auto in = toy_input(v);
  for (double p : span_distributions(m, in, token_states(m, in)).start) EXPECT_NEAR(p, 1.0 / 9.0, 1e-15);
}

TEST(SpanDistributions, ScalarOracleOnFourPositions) {
  ReaderModel m;
  m.w_start = Vector::Zero(2);
  m.w_end = Vector::Zero(2);
  m.w_start << 1.0, 0.0;
  m.w_end << 0.0, 2.0;
  PackedInput in;
  in.ids = {0, Vocab::kSep, 0, 0, 0, 0};
  in.question_len = 1;
  in.log_tokens = {"a", "b", "c", "d"};
  std::vector<Vector> states(6, Vector::Zero(2));
  const double xs[4] = {0.1, -0.3, 0.5, 0.0}, ys[4] = {0.2, 0.4, -0.1, 0.3};
  for (int i = 0; i < 4; ++i) states[2 + i] << xs[i], ys[i];
  const auto d = span_distributions(m, in, states);
  double zs = 0, ze = 0;
  for (int i = 0; i < 4; ++i) {
    zs += std::exp(xs[i]);
    ze += std::exp(2 * ys[i]);
  }
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(d.start[i], std::exp(xs[i]) / zs, 1e-15);
    EXPECT_NEAR(d.end[i], std::exp(2 * ys[i]) / ze, 1e-15);
  }
}

TEST(BestSpan, Examples) {
  const auto a = best_span({0.7, 0.3}, {0.2, 0.8}, 2);
  EXPECT_EQ(a.start, 0u);
  EXPECT_EQ(a.end, 1u);
  EXPECT_NEAR(a.span_score, 0.56, 1e-15);

  const auto b = best_span({0, 0, 1, 0}, {0, 0, 1, 0}, 10);
  EXPECT_EQ(b.start, 2u);
  EXPECT_EQ(b.end, 2u);
  EXPECT_EQ(b.span_score, 1.0);

  const auto c = best_span({0.5, 0.5}, {0.5, 0.5}, 2);
  EXPECT_EQ(c.start, 0u);
  EXPECT_EQ(c.end, 0u);
  EXPECT_THROW(best_span({}, {}, 3), Error);
}

TEST(BestSpan, EqualsBruteForceUpToThirtyPositions) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n = 1; n <= 30; ++n) {
    for (int t = 0; t < 40; ++t) {
      std::vector<double> ps(n), pe(n);
      const bool coarse = t % 4 == 0;  // coarse values force ties
      for (std::size_t i = 0; i < n; ++i) {
        ps[i] = coarse ? std::floor(u(rng) * 3) : u(rng);
        pe[i] = coarse ? std::floor(u(rng) * 3) : u(rng);
      }
      const std::size_t max_len = 1 + rng() % 12;
      double best;
      const auto want = brute_force(ps, pe, max_len, best);
      const auto got = best_span(ps, pe, max_len);
      EXPECT_EQ(got.start, want.first);
      EXPECT_EQ(got.end, want.second);
      EXPECT_EQ(got.span_score, best);
      EXPECT_LE(got.start, got.end);
      EXPECT_LT(got.end - got.start, max_len);
    }
  }
}

TEST(ReaderLoss, PerfectPredictionsApproachZero) {
  // Near one-hot states: identity projection, a scaled identity embedding
  // table, no window and no question mixing.
  const auto v = toy_vocab();
  const auto n = static_cast<Eigen::Index>(v.size());
  ReaderModel m;
  m.embedding = RowMatrix::Identity(n, n) * 20.0;
  m.projection = Matrix::Identity(n, n);
  m.mixer = Matrix::Zero(n, n);
  m.window_radius = 0;
  const auto in = toy_input(v);
  const auto unit = [&](const char* tok) { return Vector(Vector::Unit(n, v.id(tok))); };
  double prev = std::numeric_limits<double>::infinity();
  for (double c : {1.0, 10.0, 40.0}) {
    m.w_start = c * unit("blk_1");
    m.w_end = m.w_start;
    m.w_param = c * (unit("blk_1") + unit("500") + unit("host") - unit("received") - unit("block") -
                     unit("of") - unit("size") - unit("from"));
    const double total = reader_loss(m, in, {{2, 2}}).total();
    EXPECT_LT(total, prev);
    prev = total;
  }
  EXPECT_LT(prev, 1e-6);
}

TEST(ReaderLoss, MarginalizesOverOccurrences) {
  const auto v = toy_vocab();
  const auto m = random_model(v, 8, 6);
  const auto in = toy_input(v);
  const auto both = reader_loss(m, in, {{5, 5}, {8, 8}});
  const auto first = reader_loss(m, in, {{5, 5}});
  const auto second = reader_loss(m, in, {{8, 8}});
  EXPECT_LE(both.qa, first.qa);
  EXPECT_LE(both.qa, second.qa);
  const auto d = span_distributions(m, in, token_states(m, in));
  EXPECT_NEAR(both.qa, -std::log(d.start[5] * d.end[5] + d.start[8] * d.end[8]), 1e-12);
  EXPECT_NEAR(first.qa, -std::log(d.start[5]) - std::log(d.end[5]), 1e-12);
}

TEST(ReaderLoss, ParamTermIsMeanBce) {
  const auto v = toy_vocab();
  const auto m = random_model(v, 8, 6);
  const auto in = toy_input(v);
  const auto states = token_states(m, in);
  double want = 0.0;
  for (std::size_t k = 0; k < in.log_len(); ++k) {
    const double p = 1.0 / (1.0 + std::exp(-states[in.log_begin() + k].dot(m.w_param)));
    want -= in.param_mask[k] ? std::log(p) : std::log(1.0 - p);
  }
  EXPECT_NEAR(reader_loss(m, in, {{5, 5}}).param, want / 9.0, 1e-12);
  EXPECT_EQ(reader_loss(m, in, {{5, 5}}, nullptr, 1.0, false).param, 0.0);
}

TEST(ReaderLoss, Errors) {
  const auto v = toy_vocab();
  const auto m = random_model(v, 8, 6);
  const auto in = toy_input(v);
  EXPECT_THROW(reader_loss(m, in, {}), Error);
  EXPECT_THROW(reader_loss(m, in, {{3, 2}}), Error);
  EXPECT_THROW(reader_loss(m, in, {{0, 9}}), Error);
}

TEST(ReaderLoss, GradientMatchesFiniteDifferences) {
  const auto v = toy_vocab();
  auto m = random_model(v, 6, 21, 0.4);
  const auto in = toy_input(v);
  const std::vector<std::pair<std::size_t, std::size_t>> gold{{5, 5}, {8, 8}, {4, 5}};
  auto g = ReaderGrads::zeros_like(m);
  reader_loss(m, in, gold, &g);
  auto f = [&] { return reader_loss(m, in, gold).total(); };

  std::mt19937_64 rng(5);
  int checked = 0;
  auto check_block = [&](double* p, const double* a, Eigen::Index size, int samples, const char* name) {
    for (int t = 0; t < samples; ++t) {
      const auto i = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(size));
      const double num = central_difference(p + i, f);
      EXPECT_TRUE(gradient_close(a[i], num)) << name << "[" << i << "] " << a[i] << " vs " << num;
      ++checked;
    }
  };
  // Only rows of tokens that occur in the input carry gradient; sample those.
  for (TokenId id : in.ids)
    for (Eigen::Index c = 0; c < 6; c += 2) {
      const double num = central_difference(&m.embedding(id, c), f);
      EXPECT_TRUE(gradient_close(g.embedding(id, c), num)) << "E(" << id << "," << c << ")";
      ++checked;
    }
  check_block(m.projection.data(), g.projection.data(), m.projection.size(), 20, "P");
  check_block(m.mixer.data(), g.mixer.data(), m.mixer.size(), 20, "M");
  check_block(m.w_start.data(), g.w_start.data(), m.w_start.size(), 6, "ws");
  check_block(m.w_end.data(), g.w_end.data(), m.w_end.size(), 6, "we");
  check_block(m.w_param.data(), g.w_param.data(), m.w_param.size(), 6, "wp");
  EXPECT_GE(checked, 100);
}

TEST(ReaderModel, SerializeRoundTripAndWarmStart) {
  const auto v = toy_vocab();
  const auto enc = EncoderParams::random(v.size(), 8, 4);
  const auto m = ReaderModel::warm_start(enc, 9);
  EXPECT_EQ(m.embedding, enc.embedding);
  EXPECT_EQ(m.projection, enc.projection);
  EXPECT_TRUE(m.all_finite());
  const auto back = ReaderModel::deserialize(m.serialize());
  EXPECT_EQ(back.checksum(), m.checksum());
  EXPECT_EQ(back.serialize(), m.serialize());
  EXPECT_THROW(ReaderModel::deserialize("LQARDR01"), Error);
}

TEST(TrainReader, LossDecreasesOnToySet) {
  ToyPipeline t;
  auto pairs = t.train;
  pairs.push_back({"Which block was verified ?", "blk_7701", 7});
  pairs.push_back({"Where was blk_7701 received from ?", "/10.251.123.132:57542", 3});
  pairs.push_back({"Where was blk_8812 received from ?", "/10.251.31.5", 4});
  pairs.push_back({"Which block did verification succeed for ?", "blk_5142679", 1});
  pairs.push_back({"Where did blk_7701 go ?", "/10.251.123.132:50010", 3});
  ASSERT_EQ(pairs.size(), 10u);
  const auto examples = make_reader_examples(pairs, t.logs);
  const auto enc = EncoderParams::random(t.vocab.size(), 16, 3);
  ReaderTrainConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.epochs = 5;
  const auto trained = train_reader(examples, enc, cfg);
  ASSERT_EQ(trained.log.size(), 5u);
  for (std::size_t i = 1; i < 5; ++i) EXPECT_LT(trained.log[i].loss, trained.log[i - 1].loss);
  EXPECT_TRUE(trained.model.all_finite());

  const auto again = train_reader(examples, enc, cfg);
  EXPECT_EQ(again.model.serialize(), trained.model.serialize());
}

TEST(TrainReader, GoldLogsNeverRejected) {
  ToyPipeline t;
  const auto examples = make_reader_examples(t.train, t.logs);
  EXPECT_EQ(examples.size(), t.train.size());
  EXPECT_EQ(examples[0].gold_spans, (std::vector<std::pair<std::size_t, std::size_t>>{{5, 5}}));
  EXPECT_THROW(make_reader_examples({{"q ?", "absent", 0}}, t.logs), Error);
}

TEST(Answer, WalkthroughQuestion) {
  ToyPipeline t;
  const auto enc = EncoderParams::random(t.vocab.size(), 32, 1);
  ReaderTrainConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.epochs = 30;
  const auto reader = train_reader(make_reader_examples(t.train, t.logs), enc, cfg).model;
  const auto index = build_index(enc, t.logs);
  const auto a = answer_question(enc, index, reader, t.logs, "What is the size of block blk_5142679?", 5);
  EXPECT_EQ(a.text, "67108864");
  EXPECT_EQ(a.source_log_id, 0);
  EXPECT_EQ(a.alternatives.size(), 5u);
  for (std::size_t i = 1; i < a.alternatives.size(); ++i)
    EXPECT_GE(a.alternatives[i - 1].combined_score, a.alternatives[i].combined_score);
}

TEST(Answer, TopOneOnlyReadsTheRetrievedLog) {
  ToyPipeline t;
  const auto enc = EncoderParams::random(t.vocab.size(), 16, 2);
  const auto reader = ReaderModel::warm_start(enc, 3);
  const auto index = build_index(enc, t.logs);
  for (const auto& qa : t.train) {
    const auto a = answer_question(enc, index, reader, t.logs, qa.question, 1);
    const auto top = retrieve_topk(enc, t.vocab.encode(tokenize(qa.question)), index, 1);
    EXPECT_EQ(a.source_log_id, top.ids[0]);
    ASSERT_EQ(a.alternatives.size(), 1u);
    EXPECT_TRUE(contains_subsequence(t.corpus.tokens(a.source_log_id), tokenize(a.text)));
  }
}

TEST(Answer, AnswersAreVerbatimLogSpans) {
  ToyPipeline t;
  const auto enc = EncoderParams::random(t.vocab.size(), 16, 4);
  const auto reader = ReaderModel::warm_start(enc, 5, 2, 1.0);
  const auto index = build_index(enc, t.logs);
  for (const auto& qa : t.train) {
    const auto a = answer_question(enc, index, reader, t.logs, qa.question, 8);
    for (const auto& c : a.alternatives) {
      const auto toks = tokenize(c.text);
      ASSERT_FALSE(toks.empty());
      EXPECT_EQ(find_subsequence(t.corpus.tokens(c.log_id), toks, c.start), static_cast<long>(c.start));
      EXPECT_NEAR(c.combined_score, c.retrieval_prob * c.span_score, 1e-15);
    }
  }
}

TEST(Answer, WinnerCanComeFromLowerRankedLog) {
  // Retriever ranks a wrong log first, but its best span is weak; the second
  // log's confident span wins on the combined score.
  const std::vector<double> probs{0.40, 0.30, 0.12, 0.10, 0.08};
  const std::vector<double> spans{0.20, 0.90, 0.50, 0.30, 0.95};
  std::vector<AnswerCandidate> cands;
  for (std::size_t i = 0; i < 5; ++i) {
    AnswerCandidate c;
    c.log_id = static_cast<LogId>(i);
    c.retrieval_prob = probs[i];
    c.span_score = spans[i];
    c.combined_score = probs[i] * spans[i];
    c.text = "answer" + std::to_string(i);
    cands.push_back(c);
  }
  const auto a = combine_candidates("q", cands);
  EXPECT_EQ(a.source_log_id, 1);
  EXPECT_EQ(a.text, "answer1");
  EXPECT_NEAR(a.combined_score, 0.27, 1e-15);
  EXPECT_EQ(a.alternatives[1].log_id, 0);
  EXPECT_EQ(a.alternatives.back().log_id, 3);
  EXPECT_THROW(combine_candidates("q", {}), Error);
}

TEST(Answer, JsonRecord) {
  Answer a;
  a.question = "q";
  a.text = "500";
  a.source_log_id = 3;
  a.combined_score = 0.5;
  const auto j = answer_to_json(a);
  EXPECT_EQ(j.rfind(R"({"question":"q","answer":"500","source_log_id":3,"combined_score":0.5,"alternatives":[])", 0), 0u);
}

TEST(ReaderBaselines, SlidingWindowUniqueMaximum) {
  const std::vector<Tokens> logs{tokenize("x y z size of block w v u")};
  EXPECT_EQ(sliding_window_answer("what size of", logs), "z size of");
  const std::vector<Tokens> two{tokenize("a b c"), tokenize("d size of e")};
  EXPECT_EQ(sliding_window_answer("size of", two), "d size of");
}

TEST(ReaderBaselines, RandomTokenReproducible) {
  const std::vector<Tokens> logs{tokenize("alpha beta gamma delta epsilon"), tokenize("zeta")};
  const auto a = random_token_answer("q?", logs, 4);
  EXPECT_EQ(a, random_token_answer("q?", logs, 4));
  EXPECT_NE(std::find(logs[0].begin(), logs[0].end(), a), logs[0].end());
  EXPECT_THROW(random_token_answer("q", {}, 1), Error);
}

TEST(ReaderBaselines, Names) {
  for (auto b : {ReaderBaseline::kRandomToken, ReaderBaseline::kSlidingWindow, ReaderBaseline::kLogisticRegression})
    EXPECT_EQ(parse_reader_baseline(reader_baseline_name(b)), b);
  EXPECT_THROW(parse_reader_baseline("bert"), Error);
}

TEST(LogisticRegression, SeparableDataReachesFullAccuracy) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Vector> xs;
  std::vector<int> ys;
  for (int i = 0; i < 200; ++i) {
    Vector x(3);
    x << n(rng), n(rng), n(rng);
    const double margin = 2.0 * x[0] - x[1];
    if (std::abs(margin) < 0.3) continue;
    xs.push_back(x);
    ys.push_back(margin > 0 ? 1 : 0);
  }
  LogisticRegression lr;
  lr.fit(xs, ys, {2000, 0.5, 0.0});
  EXPECT_EQ(lr.accuracy(xs, ys), 1.0);
  EXPECT_THROW(LogisticRegression().predict_proba(xs[0]), Error);
}

TEST(SpanClassifier, PicksAnswerSpanOnTrainingData) {
  ToyPipeline t;
  const auto enc = EncoderParams::random(t.vocab.size(), 16, 2);
  const auto index = build_index(enc, t.logs);
  SpanClassifier clf(enc, t.logs);
  clf.train(t.train, index, 3);
  const auto& qa = t.train[0];
  const auto text = clf.answer(qa.question, {0}, {0.9});
  EXPECT_TRUE(contains_subsequence(t.corpus.tokens(0), tokenize(text)));
  EXPECT_EQ(clf.model().weights().size(), 9);
}
