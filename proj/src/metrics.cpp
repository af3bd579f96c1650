#include "logqa/metrics.hpp"

#include <algorithm>
#include <map>

#include "logqa/error.hpp"

namespace logqa {

double acc_at_k(const std::vector<std::vector<LogId>>& retrieved,
                const std::vector<Tokens>& answers, const Corpus& corpus, std::size_t k) {
  if (retrieved.empty()) throw Error("acc_at_k: empty question set");
  if (retrieved.size() != answers.size()) throw Error("acc_at_k: result/answer count mismatch");
  std::size_t hits = 0;
  for (std::size_t q = 0; q < retrieved.size(); ++q) {
    const auto n = std::min(k, retrieved[q].size());
    for (std::size_t i = 0; i < n; ++i) {
      if (contains_subsequence(corpus.tokens(retrieved[q][i]), answers[q])) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(retrieved.size());
}

int exact_match(const std::string& prediction, const std::string& gold) {
  return tokenize(prediction) == tokenize(gold) ? 1 : 0;
}

PrecisionRecallF1 f1_score(const std::string& prediction, const std::string& gold) {
  const auto pred = tokenize(prediction);
  const auto ref = tokenize(gold);
  if (ref.empty()) throw Error("f1_score: empty gold answer");
  std::map<std::string, long> counts;
  for (const auto& t : ref) ++counts[t];
  long same = 0;
  for (const auto& t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++same;
    }
  }
  if (same == 0) return {};
  PrecisionRecallF1 r;
  r.precision = static_cast<double>(same) / static_cast<double>(pred.size());
  r.recall = static_cast<double>(same) / static_cast<double>(ref.size());
  r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

}  // namespace logqa
