#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "logqa/baselines.hpp"
#include "logqa/corpus.hpp"
#include "logqa/parsing.hpp"
#include "logqa/reader.hpp"
#include "logqa/retriever.hpp"

namespace logqa {

// A corpus with its parse, QA pairs, split and retriever vocabulary. Held
// behind a pointer because LogCollection refers into the other members.
struct LoadedDataset {
  Corpus corpus;
  ParsedCorpus parsed;
  QaLoadResult qa;
  DatasetSplit split;
  Vocab vocab;
  std::unique_ptr<LogCollection> logs;

  LoadedDataset(Corpus c, ParsedCorpus p, QaLoadResult q, DatasetSplit s);
  LoadedDataset(const LoadedDataset&) = delete;
  LoadedDataset& operator=(const LoadedDataset&) = delete;
};

std::unique_ptr<LoadedDataset> load_dataset(const std::filesystem::path& log_path,
                                            const std::filesystem::path& qa_path,
                                            const std::string& name, std::uint64_t split_seed,
                                            const ParseTreeConfig& parse_config = {},
                                            SplitRatios ratios = kDefaultSplit);

std::unique_ptr<LoadedDataset> make_dataset(Corpus corpus, const std::string& qa_jsonl,
                                            std::uint64_t split_seed,
                                            const ParseTreeConfig& parse_config = {},
                                            SplitRatios ratios = kDefaultSplit);

// ---- retrieval ----

// Returns the ranked top-k ids for one question.
using Ranker = std::function<std::vector<LogId>(const QaPair&, std::size_t k)>;

struct NamedRanker {
  std::string name;
  Ranker rank;
};

Ranker baseline_ranker(const BaselineRetriever& baseline);
Ranker dense_ranker(const EncoderParams& params, const LogIndex& index, const Vocab& vocab);

struct RetrievalRow {
  std::string method;
  std::vector<double> accuracy;  // aligned with RetrievalEvalReport::ks
};

struct RetrievalEvalReport {
  std::string dataset;
  std::uint64_t split_seed = 0;
  std::size_t question_count = 0;
  std::vector<std::size_t> ks;
  std::vector<RetrievalRow> rows;

  const RetrievalRow& row(const std::string& method) const;
  double accuracy(const std::string& method, std::size_t k) const;
  // Acc@K non-decreasing along ks in every row.
  bool monotone() const;
  // `method,acc@1,acc@5,acc@20`
  std::string to_csv() const;
  std::string to_table() const;
};

inline const std::vector<std::size_t> kDefaultKs{1, 5, 20};

// Each question is ranked once at the largest k; smaller k read prefixes.
RetrievalEvalReport evaluate_retrieval(const std::vector<NamedRanker>& methods,
                                       const std::vector<QaPair>& questions,
                                       const Corpus& corpus, std::string dataset,
                                       std::uint64_t split_seed,
                                       std::vector<std::size_t> ks = kDefaultKs);

// Every baseline plus, when given, the trained retriever (row "logqa").
RetrievalEvalReport evaluate_retriever(const LoadedDataset& data,
                                       const std::vector<BaselineMethod>& baselines,
                                       const EncoderParams* trained, const LogIndex* index,
                                       std::uint64_t seed,
                                       std::vector<std::size_t> ks = kDefaultKs);

// ---- reading ----

struct ReaderRow {
  std::string method;
  double em = 0.0;
  double f1 = 0.0;
};

struct ReaderEvalReport {
  std::string dataset;
  std::size_t k = 5;
  std::size_t question_count = 0;
  std::vector<ReaderRow> rows;

  const ReaderRow& row(const std::string& method) const;
  std::string to_csv() const;
  std::string to_table() const;
};

using Answerer = std::function<std::string(const QaPair&)>;

struct NamedAnswerer {
  std::string name;
  Answerer answer;
};

ReaderEvalReport evaluate_answers(const std::vector<NamedAnswerer>& methods,
                                  const std::vector<QaPair>& questions, std::string dataset,
                                  std::size_t k);

struct ReaderEvalInputs {
  const LoadedDataset* data = nullptr;
  const EncoderParams* retriever = nullptr;
  const LogIndex* index = nullptr;
  const ReaderModel* reader = nullptr;
  const SpanClassifier* classifier = nullptr;  // optional
  std::size_t k = 5;
  std::uint64_t seed = 0;
  ReaderSettings settings;
};

// Rows: random_token, sliding_window, logistic_regression (when a
// classifier is given), logqa (retrieve top-k then read) and gold_log (the
// reader on the annotated log, retrieval bypassed).
ReaderEvalReport evaluate_reader(const std::vector<QaPair>& questions, const ReaderEvalInputs& in);

// ---- hard-negative ablation ----

// Trains one retriever and evaluates it on split.test under `name`.
RetrievalRow train_and_evaluate(const LoadedDataset& data, const RetrieverTrainConfig& config,
                                std::string name, const std::vector<std::size_t>& ks);

// Two rows, with_hard_negatives and without_hard_negatives, trained from
// identical seeds and splits.
RetrievalEvalReport ablate_hard_negatives(const LoadedDataset& data,
                                          const RetrieverTrainConfig& config,
                                          std::vector<std::size_t> ks = kDefaultKs);

inline const std::vector<double> kDefaultWeightSweep{0.5, 1.0, 2.0, 4.0};

// One single-row report per hard-negative weight.
std::vector<RetrievalEvalReport> sweep_hard_negative_weight(
    const LoadedDataset& data, const RetrieverTrainConfig& config,
    const std::vector<double>& weights = kDefaultWeightSweep,
    std::vector<std::size_t> ks = kDefaultKs);

}  // namespace logqa
