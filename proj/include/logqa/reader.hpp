#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "logqa/corpus.hpp"
#include "logqa/encoder.hpp"
#include "logqa/numeric.hpp"
#include "logqa/parsing.hpp"
#include "logqa/retriever.hpp"
#include "logqa/text.hpp"

namespace logqa {

// Question ids, SEP, log ids as one sequence. Only log positions may hold
// an answer.
struct PackedInput {
  TokenIds ids;
  std::size_t question_len = 0;
  Tokens log_tokens;
  std::vector<bool> param_mask;  // over log positions; empty when unknown

  std::size_t log_begin() const { return question_len + 1; }
  std::size_t log_len() const { return log_tokens.size(); }
};

PackedInput pack_input(const Tokens& question, const Tokens& log_tokens, const Vocab& vocab,
                       std::vector<bool> param_mask = {});

struct ReaderModel {
  RowMatrix embedding;  // |vocab| x d
  Matrix projection;    // d x d
  Matrix mixer;         // d x d, applied to the pooled question vector
  Vector w_start, w_end, w_param;
  int window_radius = 2;

  std::size_t dim() const { return static_cast<std::size_t>(projection.rows()); }
  bool all_finite() const;
  std::uint64_t checksum() const;

  // Embedding table and projection copied from the retriever; mixer and
  // heads drawn uniformly from [-init_range, init_range].
  static ReaderModel warm_start(const EncoderParams& retriever, std::uint64_t seed,
                                int window_radius = 2, double init_range = 0.05);

  // "LQARDR01", u32 version, u32 d, u64 |vocab|, i32 radius, then
  // embedding, projection, mixer, w_start, w_end, w_param.
  std::string serialize() const;
  static ReaderModel deserialize(std::string_view blob);
};

struct ReaderGrads {
  RowMatrix embedding;
  Matrix projection, mixer;
  Vector w_start, w_end, w_param;

  static ReaderGrads zeros_like(const ReaderModel& m);
  void set_zero();
};

struct ReaderForward {
  std::vector<Vector> projected;  // P * E[id] per position
  Vector question_summary;
  std::vector<Vector> states;  // h_i per position
};

ReaderForward reader_forward(const ReaderModel& model, const PackedInput& input);

// h_i = tanh(window mean of projected embeddings within i's segment +
// mixer * pooled question).
inline std::vector<Vector> token_states(const ReaderModel& model, const PackedInput& input) {
  return reader_forward(model, input).states;
}

struct SpanDistributions {
  std::vector<double> start;  // over log positions
  std::vector<double> end;
};

SpanDistributions span_distributions(const ReaderModel& model, const PackedInput& input,
                                     const std::vector<Vector>& states);

struct SpanPrediction {
  std::size_t start = 0;  // log-relative, inclusive
  std::size_t end = 0;
  double span_score = 0.0;
  LogId log_id = -1;
  double combined_score = 0.0;
};

// argmax of start[s] * end[e] over s <= e < s + max_span_len; ties go to the
// smaller s, then the smaller e.
SpanPrediction best_span(const std::vector<double>& start, const std::vector<double>& end,
                         std::size_t max_span_len);

struct ReaderLoss {
  double qa = 0.0;
  double param = 0.0;
  double total() const { return qa + param; }
};

// L_QA = -log sum over gold spans of P_start,s * P_end,e; L_param = mean
// BCE of sigmoid(h_i . w_param) against the parameter mask over log
// positions. Gradients accumulate into grads (scaled by `scale`) when
// non-null.
ReaderLoss reader_loss(const ReaderModel& model, const PackedInput& input,
                       const std::vector<std::pair<std::size_t, std::size_t>>& gold_spans,
                       ReaderGrads* grads = nullptr, double scale = 1.0,
                       bool use_param_loss = true);

struct ReaderTrainConfig {
  int epochs = 15;
  double learning_rate = 3e-5;
  std::size_t batch_size = 1;
  std::size_t max_span_len = 10;
  int window_radius = 2;
  double init_range = 0.05;
  bool param_loss = true;
  std::uint64_t seed = 29;
};

struct ReaderExample {
  PackedInput input;
  std::vector<std::pair<std::size_t, std::size_t>> gold_spans;
};

// Packs each pair against its gold (positive) log. Pairs whose answer is
// not a token span of that log are rejected with an error.
std::vector<ReaderExample> make_reader_examples(const std::vector<QaPair>& pairs,
                                                const LogCollection& logs);

struct ReaderEpochLog {
  int epoch = 0;
  double loss = 0.0;
};

struct TrainedReader {
  ReaderModel model;
  std::vector<ReaderEpochLog> log;
};

TrainedReader train_reader(const std::vector<ReaderExample>& examples, const EncoderParams& warm,
                           const ReaderTrainConfig& config,
                           const std::function<void(const ReaderEpochLog&)>& progress = {});

struct ReaderSettings {
  std::size_t max_span_len = 10;
  double temperature = 0.05;
};

struct AnswerCandidate {
  LogId log_id = -1;
  double retrieval_prob = 0.0;
  std::size_t start = 0, end = 0;
  double span_score = 0.0;
  double combined_score = 0.0;
  std::string text;
};

struct Answer {
  std::string question;
  std::string text;
  LogId source_log_id = -1;
  double combined_score = 0.0;
  std::vector<AnswerCandidate> alternatives;  // ranked, winner first
};

// Sorts candidates by combined score (ties keep retrieval order) and picks
// the winner.
Answer combine_candidates(std::string question, std::vector<AnswerCandidate> candidates);

// Best span in one log, scored by the reader alone.
AnswerCandidate read_log(const ReaderModel& model, const Tokens& question, LogId log_id,
                         const LogCollection& logs, std::size_t max_span_len);

// Retrieve top-k, read each log, rank by p(z|x) * span score.
Answer answer_question(const EncoderParams& retriever, const LogIndex& index,
                       const ReaderModel& reader, const LogCollection& logs,
                       const std::string& question, std::size_t k,
                       const ReaderSettings& settings = {});

// `question, answer, source_log_id, combined_score, alternatives` as one
// JSON object.
std::string answer_to_json(const Answer& a);

// ---- non-neural reader baselines ----

enum class ReaderBaseline { kRandomToken, kSlidingWindow, kLogisticRegression };
ReaderBaseline parse_reader_baseline(std::string_view name);
std::string_view reader_baseline_name(ReaderBaseline b);

// Uniform token from the first log.
std::string random_token_answer(const std::string& question, const std::vector<Tokens>& logs,
                                std::uint64_t seed);

// Window of `width` log tokens with the largest count of distinct question
// tokens; ties go to the earlier log, then the earlier window.
std::string sliding_window_answer(const std::string& question, const std::vector<Tokens>& logs,
                                  std::size_t width = 3);

class LogisticRegression {
 public:
  struct Config {
    int epochs = 300;
    double learning_rate = 0.1;
    double l2 = 1e-4;
  };

  // Full-batch gradient descent on mean log-loss.
  void fit(const std::vector<Vector>& features, const std::vector<int>& labels, Config cfg);
  void fit(const std::vector<Vector>& features, const std::vector<int>& labels) {
    fit(features, labels, Config{});
  }
  double predict_proba(const Vector& x) const;
  double accuracy(const std::vector<Vector>& features, const std::vector<int>& labels) const;
  const Vector& weights() const { return weights_; }

 private:
  Vector weights_;
  double bias_ = 0.0;
  Vector mean_, scale_;
};

// Span classifier over hand-built features: question overlap of the span's
// context, parameter flag, position, length, and cosines under the frozen
// retriever encoder.
class SpanClassifier {
 public:
  static constexpr std::size_t kMaxSpan = 3;

  SpanClassifier(const EncoderParams& retriever, const LogCollection& logs)
      : retriever_(&retriever), logs_(&logs) {}

  Vector features(const Tokens& question, const TokenIds& question_ids, const Vector& q_enc,
                  LogId log_id, double retrieval_score, std::size_t s, std::size_t e) const;

  // Positives are the answer spans inside each question's retrieved logs.
  void train(const std::vector<QaPair>& pairs, const LogIndex& index, std::size_t k);

  std::string answer(const std::string& question, const std::vector<LogId>& retrieved,
                     const std::vector<double>& retrieval_scores) const;

  const LogisticRegression& model() const { return lr_; }

 private:
  const EncoderParams* retriever_;
  const LogCollection* logs_;
  LogisticRegression lr_;
};

}  // namespace logqa
