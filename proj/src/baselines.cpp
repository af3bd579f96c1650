#include "logqa/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "logqa/checksum.hpp"
#include "logqa/error.hpp"

namespace logqa {

namespace {
const std::vector<std::pair<BaselineMethod, std::string_view>> kNames = {
    {BaselineMethod::kRandom, "random"},
    {BaselineMethod::kEditDistance, "edit_distance"},
    {BaselineMethod::kJaccard, "jaccard"},
    {BaselineMethod::kBm25, "bm25"},
    {BaselineMethod::kJaroWinkler, "jaro_winkler"},
    {BaselineMethod::kFrozenCosine, "frozen_cosine"},
};
}  // namespace

BaselineMethod parse_baseline_method(std::string_view name) {
  for (auto& [m, n] : kNames)
    if (n == name) return m;
  throw Error("unknown baseline method: " + std::string(name));
}

std::string_view baseline_name(BaselineMethod m) {
  for (auto& [mm, n] : kNames)
    if (mm == m) return n;
  return "?";
}

const std::vector<BaselineMethod>& all_baseline_methods() {
  static const std::vector<BaselineMethod> all = [] {
    std::vector<BaselineMethod> v;
    for (auto& [m, n] : kNames) v.push_back(m);
    return v;
  }();
  return all;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double jaccard(const Tokens& a, const Tokens& b) {
  std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double jaro(std::string_view a, std::string_view b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  const std::size_t window = std::max<std::size_t>(1, std::max(a.size(), b.size()) / 2) - 1;
  std::vector<bool> ma(a.size()), mb(b.size());
  std::size_t matches = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t lo = i > window ? i - window : 0;
    const std::size_t hi = std::min(b.size(), i + window + 1);
    for (std::size_t j = lo; j < hi; ++j) {
      if (!mb[j] && a[i] == b[j]) {
        ma[i] = mb[j] = true;
        ++matches;
        break;
      }
    }
  }
  if (matches == 0) return 0.0;
  std::size_t transpositions = 0, j = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!ma[i]) continue;
    while (!mb[j]) ++j;
    if (a[i] != b[j]) ++transpositions;
    ++j;
  }
  const double m = static_cast<double>(matches);
  const double t = static_cast<double>(transpositions) / 2.0;
  return (m / static_cast<double>(a.size()) + m / static_cast<double>(b.size()) + (m - t) / m) / 3.0;
}

double jaro_winkler(std::string_view a, std::string_view b) {
  const double j = jaro(a, b);
  std::size_t prefix = 0;
  while (prefix < 4 && prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
  return j + static_cast<double>(prefix) * 0.1 * (1.0 - j);
}

Bm25::Bm25(const std::vector<Tokens>& docs, double k1, double b, double epsilon) : k1_(k1), b_(b) {
  if (docs.empty()) throw Error("bm25: empty corpus");
  std::map<std::string, std::size_t> df;
  std::size_t total = 0;
  for (const auto& d : docs) {
    std::unordered_map<std::string, int> tf;
    for (const auto& t : d) ++tf[t];
    for (const auto& [t, n] : tf) ++df[t];
    total += d.size();
    len_.push_back(d.size());
    tf_.push_back(std::move(tf));
  }
  const double n_docs = static_cast<double>(docs.size());
  avgdl_ = static_cast<double>(total) / n_docs;
  double idf_sum = 0.0;
  std::vector<std::string> negative;
  for (const auto& [t, n] : df) {
    const double v = std::log(n_docs - static_cast<double>(n) + 0.5) - std::log(static_cast<double>(n) + 0.5);
    idf_[t] = v;
    idf_sum += v;
    if (v < 0) negative.push_back(t);
  }
  const double floor = epsilon * idf_sum / static_cast<double>(df.size());
  for (const auto& t : negative) idf_[t] = floor;
}

double Bm25::idf(const std::string& term) const {
  auto it = idf_.find(term);
  return it == idf_.end() ? 0.0 : it->second;
}

double Bm25::score(const Tokens& query, std::size_t doc) const {
  const auto& tf = tf_.at(doc);
  const double norm = k1_ * (1.0 - b_ + b_ * static_cast<double>(len_[doc]) / avgdl_);
  double s = 0.0;
  for (const auto& q : query) {
    auto it = tf.find(q);
    if (it == tf.end()) continue;
    const double f = it->second;
    s += idf(q) * f * (k1_ + 1.0) / (f + norm);
  }
  return s;
}

std::vector<double> Bm25::scores(const Tokens& query) const {
  std::vector<double> out(tf_.size());
  for (std::size_t d = 0; d < tf_.size(); ++d) out[d] = score(query, d);
  return out;
}

BaselineRetriever::BaselineRetriever(BaselineMethod method, const Corpus& corpus,
                                     std::uint64_t seed, const Vocab* vocab,
                                     const EncoderParams* frozen_params)
    : method_(method), corpus_(&corpus), seed_(seed), vocab_(vocab), frozen_(frozen_params) {
  if (method == BaselineMethod::kBm25) bm25_.emplace(corpus.all_tokens());
  if (method == BaselineMethod::kFrozenCosine) {
    if (!vocab || !frozen_params) throw Error("frozen_cosine baseline needs a vocabulary and encoder");
    frozen_index_.emplace();
    frozen_index_->model_checksum = frozen_params->checksum();
    frozen_index_->unit_vectors.resize(static_cast<Eigen::Index>(corpus.size()),
                                       static_cast<Eigen::Index>(frozen_params->dim()));
    for (const auto& r : corpus.records()) {
      Vector v = embed_sequence(*frozen_params, vocab->encode(corpus.tokens(r.id)));
      frozen_index_->unit_vectors.row(r.id) = (v / v.norm()).transpose();
    }
  }
}

std::vector<double> BaselineRetriever::scores(const std::string& question) const {
  const auto& corpus = *corpus_;
  std::vector<double> s(corpus.size());
  switch (method_) {
    case BaselineMethod::kRandom: {
      // Seeded per question so results do not depend on evaluation order.
      Fnv1a h;
      h.update(question);
      Rng rng(seed_ ^ h.digest());
      for (auto& v : s) v = uniform01(rng);
      break;
    }
    case BaselineMethod::kEditDistance:
      for (const auto& r : corpus.records())
        s[static_cast<std::size_t>(r.id)] = -static_cast<double>(edit_distance(question, r.text));
      break;
    case BaselineMethod::kJaccard: {
      const auto q = tokenize(question);
      for (const auto& r : corpus.records()) s[static_cast<std::size_t>(r.id)] = jaccard(q, corpus.tokens(r.id));
      break;
    }
    case BaselineMethod::kBm25:
      s = bm25_->scores(tokenize(question));
      break;
    case BaselineMethod::kJaroWinkler:
      for (const auto& r : corpus.records())
        s[static_cast<std::size_t>(r.id)] = jaro_winkler(question, r.text);
      break;
    case BaselineMethod::kFrozenCosine:
      s = similarities(*frozen_, vocab_->encode(tokenize(question)), *frozen_index_);
      break;
  }
  return s;
}

std::vector<LogId> BaselineRetriever::retrieve(const std::string& question, std::size_t k) const {
  return rank_top_k(scores(question), k);
}

}  // namespace logqa
