#include "logqa/reader.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

#include "logqa/binary_io.hpp"
#include "logqa/checksum.hpp"
#include "logqa/error.hpp"

namespace logqa {
namespace {

constexpr std::string_view kMagic = "LQARDR01";
constexpr std::uint32_t kVersion = 1;

// [begin, end) of the segment holding position i.
std::pair<std::size_t, std::size_t> segment_of(const PackedInput& in, std::size_t i) {
  if (i < in.question_len) return {0, in.question_len};
  if (i == in.question_len) return {i, i + 1};
  return {in.log_begin(), in.ids.size()};
}

std::pair<std::size_t, std::size_t> window_of(const PackedInput& in, std::size_t i, int radius) {
  auto [b, e] = segment_of(in, i);
  const auto r = static_cast<std::size_t>(std::max(0, radius));
  const std::size_t lo = i >= b + r ? i - r : b;
  const std::size_t hi = std::min(e, i + r + 1);
  return {lo, hi};
}

double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

std::vector<double> head_logits(const std::vector<Vector>& states, std::size_t begin,
                                const Vector& w) {
  std::vector<double> out;
  out.reserve(states.size() - begin);
  for (std::size_t i = begin; i < states.size(); ++i) out.push_back(states[i].dot(w));
  return out;
}

}  // namespace

PackedInput pack_input(const Tokens& question, const Tokens& log_tokens, const Vocab& vocab,
                       std::vector<bool> param_mask) {
  if (log_tokens.empty()) throw Error("pack_input: empty log");
  if (!param_mask.empty() && param_mask.size() != log_tokens.size())
    throw Error("pack_input: parameter mask length differs from log length");
  PackedInput p;
  p.ids = vocab.encode(question);
  p.question_len = p.ids.size();
  p.ids.push_back(Vocab::kSep);
  for (auto id : vocab.encode(log_tokens)) p.ids.push_back(id);
  p.log_tokens = log_tokens;
  p.param_mask = std::move(param_mask);
  return p;
}

bool ReaderModel::all_finite() const {
  return embedding.allFinite() && projection.allFinite() && mixer.allFinite() &&
         w_start.allFinite() && w_end.allFinite() && w_param.allFinite();
}

std::uint64_t ReaderModel::checksum() const {
  Fnv1a h;
  auto add = [&](const auto& m) {
    h.update(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
  };
  add(embedding);
  add(projection);
  add(mixer);
  add(w_start);
  add(w_end);
  add(w_param);
  h.update_value(window_radius);
  return h.digest();
}

ReaderModel ReaderModel::warm_start(const EncoderParams& retriever, std::uint64_t seed,
                                    int window_radius, double init_range) {
  ReaderModel m;
  m.embedding = retriever.embedding;
  m.projection = retriever.projection;
  const auto d = static_cast<Eigen::Index>(retriever.dim());
  m.mixer.resize(d, d);
  m.w_start.resize(d);
  m.w_end.resize(d);
  m.w_param.resize(d);
  Rng rng(seed);
  fill_uniform(m.mixer, rng, -init_range, init_range);
  fill_uniform(m.w_start, rng, -init_range, init_range);
  fill_uniform(m.w_end, rng, -init_range, init_range);
  fill_uniform(m.w_param, rng, -init_range, init_range);
  m.window_radius = window_radius;
  return m;
}

std::string ReaderModel::serialize() const {
  BinaryWriter w;
  w.put_bytes(kMagic);
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(dim()));
  w.put<std::uint64_t>(static_cast<std::uint64_t>(embedding.rows()));
  w.put<std::int32_t>(window_radius);
  w.put_matrix(embedding);
  w.put_matrix(projection);
  w.put_matrix(mixer);
  w.put_matrix(w_start);
  w.put_matrix(w_end);
  w.put_matrix(w_param);
  return w.str();
}

ReaderModel ReaderModel::deserialize(std::string_view blob) {
  BinaryReader r(blob, "reader artifact");
  r.expect_magic(kMagic);
  if (auto v = r.get<std::uint32_t>(); v != kVersion)
    throw Error("reader artifact: unsupported version " + std::to_string(v));
  const auto d = static_cast<Eigen::Index>(r.get<std::uint32_t>());
  const auto n = static_cast<Eigen::Index>(r.get<std::uint64_t>());
  ReaderModel m;
  m.window_radius = r.get<std::int32_t>();
  m.embedding.resize(n, d);
  m.projection.resize(d, d);
  m.mixer.resize(d, d);
  m.w_start.resize(d);
  m.w_end.resize(d);
  m.w_param.resize(d);
  r.get_matrix(m.embedding);
  r.get_matrix(m.projection);
  r.get_matrix(m.mixer);
  r.get_matrix(m.w_start);
  r.get_matrix(m.w_end);
  r.get_matrix(m.w_param);
  r.expect_end();
  return m;
}

ReaderGrads ReaderGrads::zeros_like(const ReaderModel& m) {
  return {RowMatrix::Zero(m.embedding.rows(), m.embedding.cols()),
          Matrix::Zero(m.projection.rows(), m.projection.cols()),
          Matrix::Zero(m.mixer.rows(), m.mixer.cols()),
          Vector::Zero(m.w_start.size()),
          Vector::Zero(m.w_end.size()),
          Vector::Zero(m.w_param.size())};
}

void ReaderGrads::set_zero() {
  embedding.setZero();
  projection.setZero();
  mixer.setZero();
  w_start.setZero();
  w_end.setZero();
  w_param.setZero();
}

ReaderForward reader_forward(const ReaderModel& model, const PackedInput& input) {
  if (input.ids.empty()) throw Error("token_states: empty input");
  const auto d = static_cast<Eigen::Index>(model.dim());
  ReaderForward f;
  f.projected.reserve(input.ids.size());
  for (TokenId id : input.ids) {
    if (id < 0 || id >= model.embedding.rows()) throw Error("reader: token id out of range");
    f.projected.push_back(model.projection * model.embedding.row(id).transpose());
  }
  f.question_summary = Vector::Zero(d);
  for (std::size_t j = 0; j < input.question_len; ++j) f.question_summary += f.projected[j];
  if (input.question_len > 0) f.question_summary /= static_cast<double>(input.question_len);
  const Vector mixed = model.mixer * f.question_summary;

  f.states.reserve(input.ids.size());
  for (std::size_t i = 0; i < input.ids.size(); ++i) {
    auto [lo, hi] = window_of(input, i, model.window_radius);
    Vector c = Vector::Zero(d);
    for (std::size_t j = lo; j < hi; ++j) c += f.projected[j];
    c /= static_cast<double>(hi - lo);
    f.states.push_back((c + mixed).array().tanh().matrix());
  }
  return f;
}

SpanDistributions span_distributions(const ReaderModel& model, const PackedInput& input,
                                     const std::vector<Vector>& states) {
  if (input.log_len() == 0 || states.size() != input.ids.size())
    throw Error("span_distributions: no log positions");
  const auto a = head_logits(states, input.log_begin(), model.w_start);
  const auto b = head_logits(states, input.log_begin(), model.w_end);
  return {softmax(a), softmax(b)};
}

SpanPrediction best_span(const std::vector<double>& start, const std::vector<double>& end,
                         std::size_t max_span_len) {
  if (start.empty() || start.size() != end.size() || max_span_len < 1)
    throw Error("best_span: invalid distributions");
  SpanPrediction best;
  best.span_score = -1.0;
  for (std::size_t s = 0; s < start.size(); ++s) {
    for (std::size_t e = s; e < end.size() && e - s < max_span_len; ++e) {
      const double v = start[s] * end[e];
      if (v > best.span_score) {
        best.start = s;
        best.end = e;
        best.span_score = v;
      }
    }
  }
  return best;
}

ReaderLoss reader_loss(const ReaderModel& model, const PackedInput& input,
                       const std::vector<std::pair<std::size_t, std::size_t>>& gold_spans,
                       ReaderGrads* grads, double scale, bool use_param_loss) {
  if (gold_spans.empty()) throw Error("reader_loss: gold span missing");
  const std::size_t n_log = input.log_len();
  for (auto [s, e] : gold_spans)
    if (s > e || e >= n_log) throw Error("reader_loss: gold span outside the log segment");

  const auto fwd = reader_forward(model, input);
  const std::size_t lb = input.log_begin();
  const auto a = head_logits(fwd.states, lb, model.w_start);
  const auto b = head_logits(fwd.states, lb, model.w_end);
  const auto ps = softmax(a);
  const auto pe = softmax(b);

  ReaderLoss loss;
  double z = 0.0;
  for (auto [s, e] : gold_spans) z += ps[s] * pe[e];
  loss.qa = -std::log(z);

  const bool with_param = use_param_loss && !input.param_mask.empty();
  std::vector<double> g;
  if (with_param) {
    g = head_logits(fwd.states, lb, model.w_param);
    for (std::size_t i = 0; i < n_log; ++i)
      loss.param += softplus(g[i]) - (input.param_mask[i] ? g[i] : 0.0);
    loss.param /= static_cast<double>(n_log);
  }
  if (!grads) return loss;

  std::vector<double> da(ps), db(pe);
  for (auto [s, e] : gold_spans) {
    const double w = ps[s] * pe[e] / z;
    da[s] -= w;
    db[e] -= w;
  }
  std::vector<double> dg(n_log, 0.0);
  if (with_param)
    for (std::size_t i = 0; i < n_log; ++i)
      dg[i] = (sigmoid(g[i]) - (input.param_mask[i] ? 1.0 : 0.0)) / static_cast<double>(n_log);

  const auto d = static_cast<Eigen::Index>(model.dim());
  const std::size_t n = input.ids.size();
  std::vector<Vector> d_pre(n, Vector::Zero(d));
  for (std::size_t k = 0; k < n_log; ++k) {
    const auto& h = fwd.states[lb + k];
    grads->w_start += scale * da[k] * h;
    grads->w_end += scale * db[k] * h;
    if (with_param) grads->w_param += scale * dg[k] * h;
    Vector dh = scale * (da[k] * model.w_start + db[k] * model.w_end);
    if (with_param) dh += scale * dg[k] * model.w_param;
    d_pre[lb + k] = dh.array() * (1.0 - h.array().square());
  }

  Vector d_pre_sum = Vector::Zero(d);
  std::vector<Vector> dx(n, Vector::Zero(d));
  for (std::size_t i = 0; i < n; ++i) {
    d_pre_sum += d_pre[i];
    auto [lo, hi] = window_of(input, i, model.window_radius);
    const double inv = 1.0 / static_cast<double>(hi - lo);
    for (std::size_t j = lo; j < hi; ++j) dx[j] += inv * d_pre[i];
  }
  grads->mixer.noalias() += d_pre_sum * fwd.question_summary.transpose();
  if (input.question_len > 0) {
    const Vector dq = model.mixer.transpose() * d_pre_sum / static_cast<double>(input.question_len);
    for (std::size_t j = 0; j < input.question_len; ++j) dx[j] += dq;
  }
  for (std::size_t j = 0; j < n; ++j) {
    const TokenId id = input.ids[j];
    grads->projection.noalias() += dx[j] * model.embedding.row(id);
    grads->embedding.row(id) += (model.projection.transpose() * dx[j]).transpose();
  }
  return loss;
}

std::vector<ReaderExample> make_reader_examples(const std::vector<QaPair>& pairs,
                                                const LogCollection& logs) {
  std::vector<ReaderExample> out;
  for (const auto& p : pairs) {
    auto pos = positive_log(p, logs.corpus());
    if (!pos) throw Error("reader: no log contains the answer of: " + p.question);
    const auto& toks = logs.corpus().tokens(*pos);
    const auto answer = tokenize(p.answer);
    ReaderExample ex;
    ex.input = pack_input(tokenize(p.question), toks, logs.vocab(),
                          parameter_token_mask(logs.parsed().log(*pos), logs.parsed().template_of(*pos), toks));
    for (auto s : all_occurrences(toks, answer)) ex.gold_spans.emplace_back(s, s + answer.size() - 1);
    if (ex.gold_spans.empty())
      throw Error("reader: answer '" + p.answer + "' is not a token span of its log");
    out.push_back(std::move(ex));
  }
  return out;
}

TrainedReader train_reader(const std::vector<ReaderExample>& examples, const EncoderParams& warm,
                           const ReaderTrainConfig& config,
                           const std::function<void(const ReaderEpochLog&)>& progress) {
  if (examples.empty()) throw Error("train_reader: no training examples");
  if (config.batch_size < 1 || config.epochs < 0) throw Error("train_reader: bad configuration");
  TrainedReader out;
  out.model = ReaderModel::warm_start(warm, config.seed, config.window_radius, config.init_range);
  auto& m = out.model;
  auto grads = ReaderGrads::zeros_like(m);

  Adam adam({config.learning_rate});
  adam.add_block(static_cast<std::size_t>(m.embedding.size()));
  adam.add_block(static_cast<std::size_t>(m.projection.size()));
  adam.add_block(static_cast<std::size_t>(m.mixer.size()));
  adam.add_block(static_cast<std::size_t>(m.w_start.size()));
  adam.add_block(static_cast<std::size_t>(m.w_end.size()));
  adam.add_block(static_cast<std::size_t>(m.w_param.size()));

  Rng rng(config.seed ^ 0x5851f42d4c957f2dULL);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  for (int ep = 0; ep < config.epochs; ++ep) {
    shuffle(order, rng);
    double total = 0.0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const std::size_t end = std::min(order.size(), b + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - b);
      grads.set_zero();
      for (std::size_t i = b; i < end; ++i) {
        const auto& ex = examples[order[i]];
        total += reader_loss(m, ex.input, ex.gold_spans, &grads, scale, config.param_loss).total();
      }
      if (!std::isfinite(total) || !grads.embedding.allFinite() || !grads.mixer.allFinite())
        throw Error("train_reader: non-finite loss at epoch " + std::to_string(ep) +
                    "; lower the learning rate");
      adam.begin_step();
      adam.update(0, m.embedding.data(), grads.embedding.data());
      adam.update(1, m.projection.data(), grads.projection.data());
      adam.update(2, m.mixer.data(), grads.mixer.data());
      adam.update(3, m.w_start.data(), grads.w_start.data());
      adam.update(4, m.w_end.data(), grads.w_end.data());
      adam.update(5, m.w_param.data(), grads.w_param.data());
    }
    ReaderEpochLog row{ep, total / static_cast<double>(examples.size())};
    out.log.push_back(row);
    if (progress) progress(row);
  }
  return out;
}

Answer combine_candidates(std::string question, std::vector<AnswerCandidate> candidates) {
  if (candidates.empty()) throw Error("answer: empty retrieval");
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const auto& a, const auto& b) { return a.combined_score > b.combined_score; });
  Answer a;
  a.question = std::move(question);
  a.text = candidates.front().text;
  a.source_log_id = candidates.front().log_id;
  a.combined_score = candidates.front().combined_score;
  a.alternatives = std::move(candidates);
  return a;
}

AnswerCandidate read_log(const ReaderModel& model, const Tokens& question, LogId log_id,
                         const LogCollection& logs, std::size_t max_span_len) {
  const auto& toks = logs.corpus().tokens(log_id);
  const auto input = pack_input(question, toks, logs.vocab());
  const auto states = token_states(model, input);
  const auto dist = span_distributions(model, input, states);
  const auto span = best_span(dist.start, dist.end, max_span_len);
  AnswerCandidate c;
  c.log_id = log_id;
  c.start = span.start;
  c.end = span.end;
  c.span_score = span.span_score;
  c.text = join_tokens(std::span<const Token>(toks).subspan(span.start, span.end - span.start + 1));
  return c;
}

Answer answer_question(const EncoderParams& retriever, const LogIndex& index,
                       const ReaderModel& reader, const LogCollection& logs,
                       const std::string& question, std::size_t k,
                       const ReaderSettings& settings) {
  const auto q_tokens = tokenize(question);
  if (q_tokens.empty()) throw Error("ask: empty question");
  const auto q_ids = logs.vocab().encode(q_tokens);
  const auto probs = retrieval_distribution(retriever, q_ids, index, settings.temperature);
  const auto top = retrieve_topk(retriever, q_ids, index, std::min(k, index.size()));
  std::vector<AnswerCandidate> cands;
  for (LogId id : top.ids) {
    auto c = read_log(reader, q_tokens, id, logs, settings.max_span_len);
    c.retrieval_prob = probs[static_cast<std::size_t>(id)];
    c.combined_score = c.retrieval_prob * c.span_score;
    cands.push_back(std::move(c));
  }
  return combine_candidates(question, std::move(cands));
}

std::string answer_to_json(const Answer& a) {
  nlohmann::ordered_json j;
  j["question"] = a.question;
  j["answer"] = a.text;
  j["source_log_id"] = a.source_log_id;
  j["combined_score"] = a.combined_score;
  auto alts = nlohmann::ordered_json::array();
  for (const auto& c : a.alternatives) {
    nlohmann::ordered_json x;
    x["answer"] = c.text;
    x["log_id"] = c.log_id;
    x["retrieval_prob"] = c.retrieval_prob;
    x["span_score"] = c.span_score;
    x["combined_score"] = c.combined_score;
    alts.push_back(std::move(x));
  }
  j["alternatives"] = std::move(alts);
  return j.dump();
}

// ---- baselines ----

ReaderBaseline parse_reader_baseline(std::string_view name) {
  if (name == "random_token") return ReaderBaseline::kRandomToken;
  if (name == "sliding_window") return ReaderBaseline::kSlidingWindow;
  if (name == "logistic_regression") return ReaderBaseline::kLogisticRegression;
  throw Error("unknown reader baseline: " + std::string(name));
}

std::string_view reader_baseline_name(ReaderBaseline b) {
  switch (b) {
    case ReaderBaseline::kRandomToken: return "random_token";
    case ReaderBaseline::kSlidingWindow: return "sliding_window";
    case ReaderBaseline::kLogisticRegression: return "logistic_regression";
  }
  return "?";
}

std::string random_token_answer(const std::string& question, const std::vector<Tokens>& logs,
                                std::uint64_t seed) {
  if (logs.empty() || logs.front().empty()) throw Error("random_token: no logs");
  Fnv1a h;
  h.update(question);
  Rng rng(seed ^ h.digest());
  return logs.front()[uniform_index(rng, logs.front().size())];
}

std::string sliding_window_answer(const std::string& question, const std::vector<Tokens>& logs,
                                  std::size_t width) {
  if (logs.empty()) throw Error("sliding_window: no logs");
  if (width < 1) throw Error("sliding_window: width must be positive");
  const auto q = tokenize(question);
  const std::set<std::string> qset(q.begin(), q.end());
  long best = -1;
  std::string answer;
  for (const auto& log : logs) {
    if (log.empty()) continue;
    const std::size_t w = std::min(width, log.size());
    for (std::size_t s = 0; s + w <= log.size(); ++s) {
      std::set<std::string> seen;
      for (std::size_t i = s; i < s + w; ++i)
        if (qset.count(log[i])) seen.insert(log[i]);
      const auto score = static_cast<long>(seen.size());
      if (score > best) {
        best = score;
        answer = join_tokens(std::span<const Token>(log).subspan(s, w));
      }
    }
  }
  return answer;
}

void LogisticRegression::fit(const std::vector<Vector>& features, const std::vector<int>& labels,
                             Config cfg) {
  if (features.empty() || features.size() != labels.size())
    throw Error("logistic regression: bad training data");
  const auto d = features.front().size();
  const double n = static_cast<double>(features.size());
  mean_ = Vector::Zero(d);
  for (const auto& x : features) mean_ += x;
  mean_ /= n;
  scale_ = Vector::Zero(d);
  for (const auto& x : features) scale_ += (x - mean_).array().square().matrix();
  scale_ = (scale_ / n).array().sqrt();
  for (Eigen::Index i = 0; i < d; ++i)
    if (scale_[i] < 1e-12) scale_[i] = 1.0;

  std::vector<Vector> z;
  z.reserve(features.size());
  for (const auto& x : features) z.push_back((x - mean_).cwiseQuotient(scale_));
  weights_ = Vector::Zero(d);
  bias_ = 0.0;
  for (int ep = 0; ep < cfg.epochs; ++ep) {
    Vector gw = cfg.l2 * weights_;
    double gb = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double err = sigmoid(weights_.dot(z[i]) + bias_) - labels[i];
      gw += err * z[i] / n;
      gb += err / n;
    }
    weights_ -= cfg.learning_rate * gw;
    bias_ -= cfg.learning_rate * gb;
  }
}

double LogisticRegression::predict_proba(const Vector& x) const {
  if (weights_.size() == 0) throw Error("logistic regression: not trained");
  return sigmoid(weights_.dot((x - mean_).cwiseQuotient(scale_)) + bias_);
}

double LogisticRegression::accuracy(const std::vector<Vector>& features,
                                    const std::vector<int>& labels) const {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < features.size(); ++i)
    ok += static_cast<int>(predict_proba(features[i]) >= 0.5) == labels[i];
  return static_cast<double>(ok) / static_cast<double>(features.size());
}

Vector SpanClassifier::features(const Tokens& question, const TokenIds& question_ids,
                                const Vector& q_enc, LogId log_id, double retrieval_score,
                                std::size_t s, std::size_t e) const {
  (void)question_ids;
  const auto& toks = logs_->corpus().tokens(log_id);
  const auto& ids = logs_->ids(log_id);
  const auto& tmpl = logs_->parsed().template_of(log_id);
  const std::set<std::string> qset(question.begin(), question.end());
  const std::size_t lo = s >= 2 ? s - 2 : 0;
  const std::size_t hi = std::min(toks.size(), e + 3);

  std::set<std::string> ctx_overlap;
  for (std::size_t i = lo; i < hi; ++i)
    if ((i < s || i > e) && qset.count(toks[i])) ctx_overlap.insert(toks[i]);
  double in_question = 0.0, params = 0.0;
  for (std::size_t i = s; i <= e; ++i) {
    in_question += qset.count(toks[i]) ? 1.0 : 0.0;
    params += tmpl.tokens[i].wildcard ? 1.0 : 0.0;
  }
  const double len = static_cast<double>(e - s + 1);
  const TokenIds span_ids(ids.begin() + static_cast<long>(s), ids.begin() + static_cast<long>(e) + 1);
  const TokenIds ctx_ids(ids.begin() + static_cast<long>(lo), ids.begin() + static_cast<long>(hi));

  Vector f(9);
  f << static_cast<double>(ctx_overlap.size()), in_question / len, params / len,
      static_cast<double>(s) / static_cast<double>(toks.size()), len,
      cosine(q_enc, embed_sequence(*retriever_, span_ids)),
      cosine(q_enc, embed_sequence(*retriever_, ctx_ids)), retrieval_score,
      (s > 0 && qset.count(toks[s - 1])) ? 1.0 : 0.0;
  return f;
}

void SpanClassifier::train(const std::vector<QaPair>& pairs, const LogIndex& index, std::size_t k) {
  std::vector<Vector> xs;
  std::vector<int> ys;
  for (const auto& p : pairs) {
    const auto q = tokenize(p.question);
    const auto q_ids = logs_->vocab().encode(q);
    const auto answer = tokenize(p.answer);
    const Vector q_enc = embed_sequence(*retriever_, q_ids);
    auto top = retrieve_topk(*retriever_, q_ids, index, std::min(k, index.size()));
    const auto sims = similarities(*retriever_, q_ids, index);
    if (auto pos = positive_log(p, logs_->corpus());
        pos && std::find(top.ids.begin(), top.ids.end(), *pos) == top.ids.end())
      top.ids.push_back(*pos);
    for (LogId id : top.ids) {
      const auto& toks = logs_->corpus().tokens(id);
      for (std::size_t s = 0; s < toks.size(); ++s) {
        for (std::size_t e = s; e < toks.size() && e - s < kMaxSpan; ++e) {
          xs.push_back(features(q, q_ids, q_enc, id, sims[static_cast<std::size_t>(id)], s, e));
          const bool match = e - s + 1 == answer.size() &&
                             std::equal(answer.begin(), answer.end(), toks.begin() + static_cast<long>(s));
          ys.push_back(match ? 1 : 0);
        }
      }
    }
  }
  lr_.fit(xs, ys);
}

std::string SpanClassifier::answer(const std::string& question, const std::vector<LogId>& retrieved,
                                   const std::vector<double>& retrieval_scores) const {
  if (retrieved.empty()) throw Error("logistic_regression: no logs");
  const auto q = tokenize(question);
  const auto q_ids = logs_->vocab().encode(q);
  const Vector q_enc = embed_sequence(*retriever_, q_ids);
  double best = -1.0;
  std::string out;
  for (std::size_t r = 0; r < retrieved.size(); ++r) {
    const auto& toks = logs_->corpus().tokens(retrieved[r]);
    for (std::size_t s = 0; s < toks.size(); ++s) {
      for (std::size_t e = s; e < toks.size() && e - s < kMaxSpan; ++e) {
        const double p = lr_.predict_proba(
            features(q, q_ids, q_enc, retrieved[r], retrieval_scores[r], s, e));
        if (p > best) {
          best = p;
          out = join_tokens(std::span<const Token>(toks).subspan(s, e - s + 1));
        }
      }
    }
  }
  return out;
}

}  // namespace logqa
