#pragma once

#include <cstdint>
#include <map>
#include <unordered_map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "logqa/corpus.hpp"
#include "logqa/encoder.hpp"
#include "logqa/retriever.hpp"

namespace logqa {

enum class BaselineMethod { kRandom, kEditDistance, kJaccard, kBm25, kJaroWinkler, kFrozenCosine };

BaselineMethod parse_baseline_method(std::string_view name);
std::string_view baseline_name(BaselineMethod m);
const std::vector<BaselineMethod>& all_baseline_methods();

// Character-level Levenshtein distance.
std::size_t edit_distance(std::string_view a, std::string_view b);

// |A ∩ B| / |A ∪ B| over token sets. Two empty sets give 0.
double jaccard(const Tokens& a, const Tokens& b);

double jaro(std::string_view a, std::string_view b);
// Jaro with the Winkler prefix bonus (scale 0.1, prefix capped at 4).
double jaro_winkler(std::string_view a, std::string_view b);

// Okapi BM25 in the gensim formulation: idf = ln((N - n + 0.5) / (n + 0.5)),
// negative idf replaced by epsilon times the mean idf; query tokens counted
// with multiplicity.
class Bm25 {
 public:
  explicit Bm25(const std::vector<Tokens>& docs, double k1 = 1.5, double b = 0.75,
                double epsilon = 0.25);
  double score(const Tokens& query, std::size_t doc) const;
  std::vector<double> scores(const Tokens& query) const;
  double idf(const std::string& term) const;

 private:
  double k1_, b_;
  double avgdl_ = 0.0;
  std::vector<std::unordered_map<std::string, int>> tf_;
  std::vector<std::size_t> len_;
  std::unordered_map<std::string, double> idf_;
};

// Scores every corpus log for a question; higher is better for every
// method (edit distance is negated). Rankings reuse rank_top_k.
class BaselineRetriever {
 public:
  // frozen_params are the untrained encoder used by kFrozenCosine; vocab
  // maps question tokens for it.
  BaselineRetriever(BaselineMethod method, const Corpus& corpus, std::uint64_t seed,
                    const Vocab* vocab = nullptr, const EncoderParams* frozen_params = nullptr);

  std::vector<double> scores(const std::string& question) const;
  std::vector<LogId> retrieve(const std::string& question, std::size_t k) const;
  BaselineMethod method() const { return method_; }

 private:
  BaselineMethod method_;
  const Corpus* corpus_;
  std::uint64_t seed_;
  const Vocab* vocab_;
  const EncoderParams* frozen_;
  std::optional<Bm25> bm25_;
  std::optional<LogIndex> frozen_index_;
};

}  // namespace logqa
