#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "logqa/corpus.hpp"
#include "logqa/encoder.hpp"
#include "logqa/parsing.hpp"
#include "logqa/text.hpp"

namespace logqa {

// Everything the retriever needs to know about the log universe: raw
// corpus, its parse and the vocabulary-encoded token ids of every log.
class LogCollection {
 public:
  LogCollection(const Corpus& corpus, const ParsedCorpus& parsed, const Vocab& vocab);

  const Corpus& corpus() const { return *corpus_; }
  const ParsedCorpus& parsed() const { return *parsed_; }
  const Vocab& vocab() const { return *vocab_; }
  const TokenIds& ids(LogId id) const { return ids_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return ids_.size(); }

 private:
  const Corpus* corpus_;
  const ParsedCorpus* parsed_;
  const Vocab* vocab_;
  std::vector<TokenIds> ids_;
};

// Vocabulary over every corpus log plus the training questions.
Vocab build_retriever_vocab(const Corpus& corpus, const std::vector<QaPair>& train);

// Unit-normalized encodings of every corpus log, tied to the parameters
// that produced them.
struct LogIndex {
  RowMatrix unit_vectors;  // |corpus| x d
  std::uint64_t model_checksum = 0;

  std::size_t size() const { return static_cast<std::size_t>(unit_vectors.rows()); }
  void check_fresh(const EncoderParams& params) const;

  // "LQAIDX01", u32 version, u64 rows, u32 d, u64 model checksum, matrix.
  std::string serialize() const;
  static LogIndex deserialize(std::string_view blob);
};

LogIndex build_index(const EncoderParams& params, const LogCollection& logs);

// f(x, z): cosine of the two tower outputs.
double score(const EncoderParams& params, std::span<const TokenId> question,
             std::span<const TokenId> log);

// Cosine of the question against every indexed log.
std::vector<double> similarities(const EncoderParams& params, std::span<const TokenId> question,
                                 const LogIndex& index);

// softmax(f / temperature) over the whole corpus.
std::vector<double> retrieval_distribution(const EncoderParams& params,
                                           std::span<const TokenId> question,
                                           const LogIndex& index, double temperature);

struct RetrievalResult {
  std::vector<LogId> ids;
  std::vector<double> scores;
};

// Ids of the k best scores; ties go to the smaller log id.
std::vector<LogId> rank_top_k(std::span<const double> scores, std::size_t k);

RetrievalResult retrieve_topk(const EncoderParams& params, std::span<const TokenId> question,
                              const LogIndex& index, std::size_t k);

inline constexpr double kDefaultAlpha = 0.2;

// 1 if the log contains the answer, alpha if one of the log's parameter
// values is a question token, 0 otherwise.
double target_value(const Tokens& question, const Tokens& answer, const Tokens& log_tokens,
                    const ParsedLog& parsed, double alpha = kDefaultAlpha);

struct RetrieverTrainConfig {
  double learning_rate = 5e-5;
  int iterations = 4;
  int epochs_per_iteration = 5;  // picked on validation Acc@5
  std::size_t batch_size = 16;
  double hard_negative_weight = 2.0;
  std::size_t mining_k = 20;
  bool mine_hard_negatives = true;
  double alpha = kDefaultAlpha;
  double temperature = 0.05;
  std::size_t dim = 128;
  double init_range = 0.05;
  std::uint64_t seed = 13;

  // Mining contributes nothing when its weight is zero, so w = 0 and
  // mining off are the same configuration.
  bool mining_active() const { return mine_hard_negatives && hard_negative_weight > 0.0; }
};

// One training question with its positive log and accumulated hard
// negatives, which grow each mining round.
struct RetrieverExample {
  Tokens question_tokens;
  TokenIds question_ids;
  Tokens answer_tokens;
  LogId positive = 0;
  std::vector<LogId> hard_negatives;
};

std::vector<RetrieverExample> make_retriever_examples(const std::vector<QaPair>& pairs,
                                                      const LogCollection& logs);

using HardNegativeSet = std::vector<std::vector<LogId>>;

// For each example: top mining_k logs minus every log that contains the
// answer.
HardNegativeSet mine_hard_negatives(const EncoderParams& params,
                                    const std::vector<RetrieverExample>& examples,
                                    const LogCollection& logs, const LogIndex& index,
                                    std::size_t mining_k);

// Mean over the batch of the soft-target cross-entropy. Candidates per
// question are the batch's positive logs plus that question's hard
// negatives (denominator weight w). When grads is non-null the gradient is
// accumulated into it. Throws when a question has no target-1 candidate.
double batch_loss(const EncoderParams& params, const std::vector<const RetrieverExample*>& batch,
                  const LogCollection& logs, const RetrieverTrainConfig& config,
                  EncoderGrads* grads = nullptr);

struct TrainingLogRow {
  int iteration = 0;
  int epoch = 0;
  double loss = 0.0;
  double val_acc1 = 0.0;
  double val_acc5 = 0.0;
};

struct TrainedRetriever {
  EncoderParams params;
  std::vector<TrainingLogRow> log;
};

// `iteration,epoch,loss,val_acc1,val_acc5` with a header line.
std::string training_log_csv(const std::vector<TrainingLogRow>& rows);

using RetrieverProgress = std::function<void(const TrainingLogRow&)>;

TrainedRetriever train_retriever(const DatasetSplit& split, const LogCollection& logs,
                                 const RetrieverTrainConfig& config,
                                 const RetrieverProgress& progress = {});

}  // namespace logqa
