#include "logqa/retriever.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "logqa/binary_io.hpp"
#include "logqa/error.hpp"
#include "logqa/metrics.hpp"

namespace logqa {
namespace {
constexpr std::string_view kIndexMagic = "LQAIDX01";
constexpr std::uint32_t kIndexVersion = 1;
}  // namespace

LogCollection::LogCollection(const Corpus& corpus, const ParsedCorpus& parsed, const Vocab& vocab)
    : corpus_(&corpus), parsed_(&parsed), vocab_(&vocab) {
  if (parsed.logs.size() != corpus.size())
    throw Error("log collection: parse does not cover the corpus");
  ids_.reserve(corpus.size());
  for (const auto& toks : corpus.all_tokens()) ids_.push_back(vocab.encode(toks));
}

Vocab build_retriever_vocab(const Corpus& corpus, const std::vector<QaPair>& train) {
  std::vector<Tokens> streams = corpus.all_tokens();
  for (const auto& p : train) streams.push_back(tokenize(p.question));
  return Vocab::build(streams, 1);
}

void LogIndex::check_fresh(const EncoderParams& params) const {
  if (model_checksum != params.checksum())
    throw Error("stale index: built from different encoder parameters; rerun build-index");
  if (static_cast<std::size_t>(unit_vectors.cols()) != params.dim())
    throw Error("stale index: dimension mismatch");
}

std::string LogIndex::serialize() const {
  BinaryWriter w;
  w.put_bytes(kIndexMagic);
  w.put<std::uint32_t>(kIndexVersion);
  w.put<std::uint64_t>(static_cast<std::uint64_t>(unit_vectors.rows()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(unit_vectors.cols()));
  w.put<std::uint64_t>(model_checksum);
  w.put_matrix(unit_vectors);
  return w.str();
}

LogIndex LogIndex::deserialize(std::string_view blob) {
  BinaryReader r(blob, "index artifact");
  r.expect_magic(kIndexMagic);
  if (auto v = r.get<std::uint32_t>(); v != kIndexVersion)
    throw Error("index artifact: unsupported version " + std::to_string(v));
  LogIndex idx;
  const auto rows = static_cast<Eigen::Index>(r.get<std::uint64_t>());
  const auto cols = static_cast<Eigen::Index>(r.get<std::uint32_t>());
  idx.model_checksum = r.get<std::uint64_t>();
  idx.unit_vectors.resize(rows, cols);
  r.get_matrix(idx.unit_vectors);
  r.expect_end();
  return idx;
}

LogIndex build_index(const EncoderParams& params, const LogCollection& logs) {
  LogIndex idx;
  idx.model_checksum = params.checksum();
  idx.unit_vectors.resize(static_cast<Eigen::Index>(logs.size()),
                          static_cast<Eigen::Index>(params.dim()));
  for (std::size_t i = 0; i < logs.size(); ++i) {
    Vector v = embed_sequence(params, logs.ids(static_cast<LogId>(i)));
    const double n = v.norm();
    if (n == 0.0) throw Error("build_index: zero-norm log encoding");
    idx.unit_vectors.row(static_cast<Eigen::Index>(i)) = (v / n).transpose();
  }
  return idx;
}

double score(const EncoderParams& params, std::span<const TokenId> question,
             std::span<const TokenId> log) {
  return cosine(embed_sequence(params, question), embed_sequence(params, log));
}

std::vector<double> similarities(const EncoderParams& params, std::span<const TokenId> question,
                                 const LogIndex& index) {
  index.check_fresh(params);
  Vector q = embed_sequence(params, question);
  const double n = q.norm();
  if (n == 0.0) throw Error("similarities: zero-norm question encoding");
  Vector s = index.unit_vectors * (q / n);
  std::vector<double> out(static_cast<std::size_t>(s.size()));
  for (Eigen::Index i = 0; i < s.size(); ++i) out[static_cast<std::size_t>(i)] = std::clamp(s[i], -1.0, 1.0);
  return out;
}

std::vector<double> retrieval_distribution(const EncoderParams& params,
                                           std::span<const TokenId> question,
                                           const LogIndex& index, double temperature) {
  if (!(temperature > 0.0)) throw Error("retrieval_distribution: temperature must be positive");
  auto s = similarities(params, question, index);
  for (auto& v : s) v /= temperature;
  return softmax(s);
}

std::vector<LogId> rank_top_k(std::span<const double> scores, std::size_t k) {
  if (k < 1 || k > scores.size())
    throw Error("retrieve: k must be in [1, " + std::to_string(scores.size()) + "]");
  std::vector<LogId> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  auto better = [&](LogId a, LogId b) {
    const double sa = scores[static_cast<std::size_t>(a)], sb = scores[static_cast<std::size_t>(b)];
    if (sa != sb) return sa > sb;
    return a < b;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(k), order.end(), better);
  order.resize(k);
  return order;
}

RetrievalResult retrieve_topk(const EncoderParams& params, std::span<const TokenId> question,
                              const LogIndex& index, std::size_t k) {
  const auto s = similarities(params, question, index);
  RetrievalResult r;
  r.ids = rank_top_k(s, k);
  for (LogId id : r.ids) r.scores.push_back(s[static_cast<std::size_t>(id)]);
  return r;
}

double target_value(const Tokens& question, const Tokens& answer, const Tokens& log_tokens,
                    const ParsedLog& parsed, double alpha) {
  if (contains_subsequence(log_tokens, answer)) return 1.0;
  for (const auto& param : parsed.parameters)
    if (std::find(question.begin(), question.end(), param) != question.end()) return alpha;
  return 0.0;
}

std::vector<RetrieverExample> make_retriever_examples(const std::vector<QaPair>& pairs,
                                                      const LogCollection& logs) {
  std::vector<RetrieverExample> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    auto pos = positive_log(p, logs.corpus());
    if (!pos) throw Error("retriever: no corpus log contains the answer of: " + p.question);
    RetrieverExample ex;
    ex.question_tokens = tokenize(p.question);
    ex.question_ids = logs.vocab().encode(ex.question_tokens);
    ex.answer_tokens = tokenize(p.answer);
    ex.positive = *pos;
    out.push_back(std::move(ex));
  }
  return out;
}

HardNegativeSet mine_hard_negatives(const EncoderParams& params,
                                    const std::vector<RetrieverExample>& examples,
                                    const LogCollection& logs, const LogIndex& index,
                                    std::size_t mining_k) {
  HardNegativeSet out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    auto top = retrieve_topk(params, ex.question_ids, index, std::min(mining_k, index.size()));
    std::vector<LogId> hard;
    for (LogId id : top.ids)
      if (!contains_subsequence(logs.corpus().tokens(id), ex.answer_tokens)) hard.push_back(id);
    out.push_back(std::move(hard));
  }
  return out;
}

double batch_loss(const EncoderParams& params, const std::vector<const RetrieverExample*>& batch,
                  const LogCollection& logs, const RetrieverTrainConfig& config,
                  EncoderGrads* grads) {
  if (batch.empty()) throw Error("batch_loss: empty batch");

  // Each distinct log is encoded once per batch; its output gradient is
  // accumulated and backpropagated once.
  std::vector<LogId> in_batch;
  std::unordered_map<LogId, std::size_t> slot;
  std::vector<Encoded> encoded;
  auto slot_of = [&](LogId id) {
    auto [it, inserted] = slot.emplace(id, encoded.size());
    if (inserted) encoded.push_back(encode(params, logs.ids(id)));
    return it->second;
  };
  for (const auto* ex : batch) {
    if (std::find(in_batch.begin(), in_batch.end(), ex->positive) == in_batch.end())
      in_batch.push_back(ex->positive);
  }
  for (LogId id : in_batch) slot_of(id);

  const bool use_hard = config.mining_active();
  std::vector<Vector> d_logs;
  double total = 0.0;
  const double scale = 1.0 / static_cast<double>(batch.size());

  for (const auto* ex : batch) {
    std::vector<LogId> cand = in_batch;
    std::vector<double> weights(cand.size(), 1.0);
    if (use_hard) {
      for (LogId h : ex->hard_negatives) {
        cand.push_back(h);
        weights.push_back(config.hard_negative_weight);
      }
    }
    std::vector<double> targets;
    double tsum = 0.0;
    bool has_positive = false;
    for (LogId id : cand) {
      const double t = target_value(ex->question_tokens, ex->answer_tokens, logs.corpus().tokens(id),
                                    logs.parsed().log(id), config.alpha);
      has_positive = has_positive || t == 1.0;
      targets.push_back(t);
      tsum += t;
    }
    if (!has_positive) throw Error("batch_loss: question without a positive candidate");
    for (auto& t : targets) t /= tsum;

    const Encoded q = encode(params, ex->question_ids);
    std::vector<std::size_t> slots;
    std::vector<double> logits;
    for (LogId id : cand) {
      slots.push_back(slot_of(id));
      logits.push_back(cosine(q.output, encoded[slots.back()].output) / config.temperature);
    }
    const auto ce = weighted_soft_cross_entropy(logits, targets, weights);
    total += ce.loss;

    if (grads) {
      if (d_logs.size() < encoded.size()) d_logs.resize(encoded.size(), Vector::Zero(static_cast<Eigen::Index>(params.dim())));
      Vector d_q = Vector::Zero(static_cast<Eigen::Index>(params.dim()));
      Vector du, dv;
      for (std::size_t i = 0; i < cand.size(); ++i) {
        cosine_backward(q.output, encoded[slots[i]].output,
                        scale * ce.dlogits[i] / config.temperature, du, dv);
        d_q += du;
        d_logs[slots[i]] += dv;
      }
      backward(params, q, d_q, *grads);
    }
  }
  if (grads) {
    for (std::size_t i = 0; i < d_logs.size(); ++i) backward(params, encoded[i], d_logs[i], *grads);
  }
  return total * scale;
}

std::string training_log_csv(const std::vector<TrainingLogRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "iteration,epoch,loss,val_acc1,val_acc5\n";
  for (const auto& r : rows)
    os << r.iteration << ',' << r.epoch << ',' << r.loss << ',' << r.val_acc1 << ',' << r.val_acc5
       << '\n';
  return os.str();
}

namespace {

std::pair<double, double> validation_accuracy(const EncoderParams& params,
                                              const std::vector<RetrieverExample>& val,
                                              const LogCollection& logs, const LogIndex& index) {
  if (val.empty()) return {0.0, 0.0};
  std::vector<std::vector<LogId>> retrieved;
  std::vector<Tokens> answers;
  const std::size_t k = std::min<std::size_t>(5, index.size());
  for (const auto& ex : val) {
    retrieved.push_back(retrieve_topk(params, ex.question_ids, index, k).ids);
    answers.push_back(ex.answer_tokens);
  }
  return {acc_at_k(retrieved, answers, logs.corpus(), 1),
          acc_at_k(retrieved, answers, logs.corpus(), 5)};
}

}  // namespace

TrainedRetriever train_retriever(const DatasetSplit& split, const LogCollection& logs,
                                 const RetrieverTrainConfig& config,
                                 const RetrieverProgress& progress) {
  if (split.train.empty()) throw Error("train_retriever: empty training split");
  if (config.iterations < 1 || config.epochs_per_iteration < 1 || config.batch_size < 1)
    throw Error("train_retriever: iterations, epochs and batch size must be positive");

  TrainedRetriever out;
  out.params = EncoderParams::random(logs.vocab().size(), config.dim, config.seed, config.init_range);
  auto& params = out.params;
  auto examples = make_retriever_examples(split.train, logs);
  const auto val = make_retriever_examples(split.validation, logs);

  Adam adam({config.learning_rate});
  adam.add_block(static_cast<std::size_t>(params.embedding.size()));
  adam.add_block(static_cast<std::size_t>(params.projection.size()));
  auto grads = EncoderGrads::zeros_like(params);

  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);

  for (int it = 0; it < config.iterations; ++it) {
    for (int ep = 0; ep < config.epochs_per_iteration; ++ep) {
      shuffle(order, rng);
      double loss_sum = 0.0;
      std::size_t n_batches = 0;
      for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
        std::vector<const RetrieverExample*> batch;
        for (std::size_t i = b; i < std::min(order.size(), b + config.batch_size); ++i)
          batch.push_back(&examples[order[i]]);
        grads.set_zero();
        const double loss = batch_loss(params, batch, logs, config, &grads);
        if (!std::isfinite(loss) || !grads.embedding.allFinite() || !grads.projection.allFinite()) {
          std::ostringstream msg;
          msg << "train_retriever: non-finite loss at iteration " << it << " epoch " << ep
              << " batch " << n_batches << "; lower the learning rate or temperature";
          throw Error(msg.str());
        }
        adam.begin_step();
        adam.update(0, params.embedding.data(), grads.embedding.data());
        adam.update(1, params.projection.data(), grads.projection.data());
        loss_sum += loss;
        ++n_batches;
      }
      const auto index = build_index(params, logs);
      const auto [acc1, acc5] = validation_accuracy(params, val, logs, index);
      TrainingLogRow row{it, ep, loss_sum / static_cast<double>(n_batches), acc1, acc5};
      out.log.push_back(row);
      if (progress) progress(row);
    }

    // Mining after the final iteration would not feed any further update.
    if (config.mining_active() && it + 1 < config.iterations) {
      const auto index = build_index(params, logs);
      auto mined = mine_hard_negatives(params, examples, logs, index, config.mining_k);
      for (std::size_t i = 0; i < examples.size(); ++i) {
        auto& hard = examples[i].hard_negatives;
        for (LogId id : mined[i])
          if (std::find(hard.begin(), hard.end(), id) == hard.end()) hard.push_back(id);
      }
    }
  }
  return out;
}

}  // namespace logqa
