#pragma once

#include <span>
#include <string>
#include <vector>

#include "logqa/corpus.hpp"
#include "logqa/text.hpp"

namespace logqa {

// Fraction of questions whose retrieved set holds at least one log
// containing the answer as a contiguous token run. Only the first k ids of
// each list are considered. Throws on an empty question set.
double acc_at_k(const std::vector<std::vector<LogId>>& retrieved,
                const std::vector<Tokens>& answers, const Corpus& corpus, std::size_t k);

// 1 iff token sequences are identical (case-sensitive).
int exact_match(const std::string& prediction, const std::string& gold);

struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Multiset token overlap. Throws on an empty gold answer.
PrecisionRecallF1 f1_score(const std::string& prediction, const std::string& gold);

}  // namespace logqa
