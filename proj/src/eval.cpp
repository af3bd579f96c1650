#include "logqa/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "logqa/error.hpp"
#include "logqa/metrics.hpp"

namespace logqa {
namespace {

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string render_table(const std::string& title, const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& body) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& r : body) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  out << title << '\n';
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c)
      out << (c ? "  " : "") << (c + 1 < cells.size() ? pad(cells[c], width[c]) : cells[c]);
    out << '\n';
  };
  line(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
  for (const auto& r : body) line(r);
  return out.str();
}

}  // namespace

LoadedDataset::LoadedDataset(Corpus c, ParsedCorpus p, QaLoadResult q, DatasetSplit s)
    : corpus(std::move(c)), parsed(std::move(p)), qa(std::move(q)), split(std::move(s)) {
  vocab = build_retriever_vocab(corpus, split.train);
  logs = std::make_unique<LogCollection>(corpus, parsed, vocab);
}

namespace {

std::unique_ptr<LoadedDataset> assemble(Corpus corpus, QaLoadResult qa, std::uint64_t split_seed,
                                        const ParseTreeConfig& parse_config, SplitRatios ratios) {
  if (qa.pairs.empty()) throw Error("dataset " + corpus.name() + ": no usable QA pairs");
  auto parsed = parse_corpus(corpus, parse_config);
  auto split = split_dataset(qa.pairs, ratios, split_seed);
  return std::make_unique<LoadedDataset>(std::move(corpus), std::move(parsed), std::move(qa),
                                         std::move(split));
}

}  // namespace

std::unique_ptr<LoadedDataset> load_dataset(const std::filesystem::path& log_path,
                                            const std::filesystem::path& qa_path,
                                            const std::string& name, std::uint64_t split_seed,
                                            const ParseTreeConfig& parse_config,
                                            SplitRatios ratios) {
  auto corpus = load_log_corpus(log_path, name);
  auto qa = load_qa_pairs(qa_path, corpus);
  return assemble(std::move(corpus), std::move(qa), split_seed, parse_config, ratios);
}

std::unique_ptr<LoadedDataset> make_dataset(Corpus corpus, const std::string& qa_jsonl,
                                            std::uint64_t split_seed,
                                            const ParseTreeConfig& parse_config,
                                            SplitRatios ratios) {
  auto qa = parse_qa_lines(qa_jsonl, corpus);
  return assemble(std::move(corpus), std::move(qa), split_seed, parse_config, ratios);
}

Ranker baseline_ranker(const BaselineRetriever& baseline) {
  return [&baseline](const QaPair& q, std::size_t k) { return baseline.retrieve(q.question, k); };
}

Ranker dense_ranker(const EncoderParams& params, const LogIndex& index, const Vocab& vocab) {
  return [&params, &index, &vocab](const QaPair& q, std::size_t k) {
    const auto ids = vocab.encode(tokenize(q.question));
    return retrieve_topk(params, ids, index, std::min(k, index.size())).ids;
  };
}

const RetrievalRow& RetrievalEvalReport::row(const std::string& method) const {
  for (const auto& r : rows)
    if (r.method == method) return r;
  throw Error("retrieval report has no row " + method);
}

double RetrievalEvalReport::accuracy(const std::string& method, std::size_t k) const {
  const auto it = std::find(ks.begin(), ks.end(), k);
  if (it == ks.end()) throw Error("retrieval report has no column Acc@" + std::to_string(k));
  return row(method).accuracy[static_cast<std::size_t>(it - ks.begin())];
}

bool RetrievalEvalReport::monotone() const {
  for (const auto& r : rows)
    for (std::size_t i = 1; i < r.accuracy.size(); ++i)
      if (r.accuracy[i] < r.accuracy[i - 1]) return false;
  return true;
}

std::string RetrievalEvalReport::to_csv() const {
  std::ostringstream out;
  out << "method";
  for (auto k : ks) out << ",acc@" << k;
  out << '\n';
  for (const auto& r : rows) {
    out << r.method;
    for (double a : r.accuracy) out << ',' << fmt4(a);
    out << '\n';
  }
  return out.str();
}

std::string RetrievalEvalReport::to_table() const {
  std::vector<std::string> header{"Method"};
  for (auto k : ks) header.push_back("Acc@" + std::to_string(k));
  std::vector<std::vector<std::string>> body;
  for (const auto& r : rows) {
    std::vector<std::string> cells{r.method};
    for (double a : r.accuracy) cells.push_back(fmt4(a));
    body.push_back(std::move(cells));
  }
  return render_table("Log retrieval: " + dataset + " (" + std::to_string(question_count) +
                          " questions, split seed " + std::to_string(split_seed) + ")",
                      header, body);
}

RetrievalEvalReport evaluate_retrieval(const std::vector<NamedRanker>& methods,
                                       const std::vector<QaPair>& questions,
                                       const Corpus& corpus, std::string dataset,
                                       std::uint64_t split_seed, std::vector<std::size_t> ks) {
  if (questions.empty()) throw Error("evaluate_retrieval: empty question set");
  if (ks.empty()) throw Error("evaluate_retrieval: no k values");
  std::sort(ks.begin(), ks.end());
  const std::size_t k_max = std::min(ks.back(), corpus.size());

  std::vector<Tokens> answers;
  for (const auto& q : questions) answers.push_back(tokenize(q.answer));

  RetrievalEvalReport report;
  report.dataset = std::move(dataset);
  report.split_seed = split_seed;
  report.question_count = questions.size();
  report.ks = ks;
  for (const auto& m : methods) {
    std::vector<std::vector<LogId>> ranked;
    ranked.reserve(questions.size());
    for (const auto& q : questions) ranked.push_back(m.rank(q, k_max));
    RetrievalRow row{m.name, {}};
    for (auto k : ks) row.accuracy.push_back(acc_at_k(ranked, answers, corpus, k));
    report.rows.push_back(std::move(row));
  }
  return report;
}

RetrievalEvalReport evaluate_retriever(const LoadedDataset& data,
                                       const std::vector<BaselineMethod>& baselines,
                                       const EncoderParams* trained, const LogIndex* index,
                                       std::uint64_t seed, std::vector<std::size_t> ks) {
  const std::size_t dim = trained ? trained->dim() : RetrieverTrainConfig{}.dim;
  const auto frozen = EncoderParams::random(data.vocab.size(), dim, seed);
  std::vector<BaselineRetriever> retrievers;
  retrievers.reserve(baselines.size());
  for (auto m : baselines) retrievers.emplace_back(m, data.corpus, seed, &data.vocab, &frozen);

  std::vector<NamedRanker> methods;
  for (const auto& r : retrievers)
    methods.push_back({std::string(baseline_name(r.method())), baseline_ranker(r)});
  if (trained) {
    if (!index) throw Error("evaluate_retriever: trained encoder given without an index");
    index->check_fresh(*trained);
    methods.push_back({"logqa", dense_ranker(*trained, *index, data.vocab)});
  }
  return evaluate_retrieval(methods, data.split.test, data.corpus, data.corpus.name(),
                            data.split.seed, std::move(ks));
}

const ReaderRow& ReaderEvalReport::row(const std::string& method) const {
  for (const auto& r : rows)
    if (r.method == method) return r;
  throw Error("reader report has no row " + method);
}

std::string ReaderEvalReport::to_csv() const {
  std::ostringstream out;
  out << "method,em,f1\n";
  for (const auto& r : rows) out << r.method << ',' << fmt4(r.em) << ',' << fmt4(r.f1) << '\n';
  return out.str();
}

std::string ReaderEvalReport::to_table() const {
  std::vector<std::vector<std::string>> body;
  for (const auto& r : rows) body.push_back({r.method, fmt4(r.em), fmt4(r.f1)});
  return render_table("Log reading: " + dataset + " (" + std::to_string(question_count) +
                          " questions, top-" + std::to_string(k) + " logs)",
                      {"Method", "EM (exact match)", "F1"}, body);
}

ReaderEvalReport evaluate_answers(const std::vector<NamedAnswerer>& methods,
                                  const std::vector<QaPair>& questions, std::string dataset,
                                  std::size_t k) {
  if (questions.empty()) throw Error("evaluate_reader: empty question set");
  ReaderEvalReport report;
  report.dataset = std::move(dataset);
  report.k = k;
  report.question_count = questions.size();
  for (const auto& m : methods) {
    double em = 0.0, f1 = 0.0;
    for (const auto& q : questions) {
      const auto pred = m.answer(q);
      em += exact_match(pred, q.answer);
      f1 += f1_score(pred, q.answer).f1;
    }
    const auto n = static_cast<double>(questions.size());
    report.rows.push_back({m.name, em / n, f1 / n});
  }
  return report;
}

ReaderEvalReport evaluate_reader(const std::vector<QaPair>& questions, const ReaderEvalInputs& in) {
  if (!in.data || !in.retriever || !in.index || !in.reader)
    throw Error("evaluate_reader: retriever, index and reader are required");
  in.index->check_fresh(*in.retriever);
  const auto& data = *in.data;
  const std::size_t k = std::min(in.k, in.index->size());

  auto top = [&](const QaPair& q) {
    const auto ids = data.vocab.encode(tokenize(q.question));
    return retrieve_topk(*in.retriever, ids, *in.index, k);
  };
  auto top_tokens = [&](const QaPair& q) {
    std::vector<Tokens> logs;
    for (LogId id : top(q).ids) logs.push_back(data.corpus.tokens(id));
    return logs;
  };

  std::vector<NamedAnswerer> methods;
  methods.push_back({"random_token", [&](const QaPair& q) {
                       return random_token_answer(q.question, top_tokens(q), in.seed);
                     }});
  methods.push_back({"sliding_window", [&](const QaPair& q) {
                       return sliding_window_answer(q.question, top_tokens(q));
                     }});
  if (in.classifier)
    methods.push_back({"logistic_regression", [&](const QaPair& q) {
                         const auto r = top(q);
                         return in.classifier->answer(q.question, r.ids, r.scores);
                       }});
  methods.push_back({"logqa", [&](const QaPair& q) {
                       return answer_question(*in.retriever, *in.index, *in.reader, *data.logs,
                                              q.question, k, in.settings)
                           .text;
                     }});
  methods.push_back({"gold_log", [&](const QaPair& q) {
                       const auto gold = positive_log(q, data.corpus);
                       if (!gold) throw Error("evaluate_reader: no gold log for: " + q.question);
                       return read_log(*in.reader, tokenize(q.question), *gold, *data.logs,
                                       in.settings.max_span_len)
                           .text;
                     }});
  return evaluate_answers(methods, questions, data.corpus.name(), k);
}

RetrievalRow train_and_evaluate(const LoadedDataset& data, const RetrieverTrainConfig& config,
                                std::string name, const std::vector<std::size_t>& ks) {
  const auto trained = train_retriever(data.split, *data.logs, config);
  const auto index = build_index(trained.params, *data.logs);
  auto report = evaluate_retrieval({{name, dense_ranker(trained.params, index, data.vocab)}},
                                   data.split.test, data.corpus, data.corpus.name(),
                                   data.split.seed, ks);
  return std::move(report.rows.front());
}

RetrievalEvalReport ablate_hard_negatives(const LoadedDataset& data,
                                          const RetrieverTrainConfig& config,
                                          std::vector<std::size_t> ks) {
  std::sort(ks.begin(), ks.end());
  RetrievalEvalReport report;
  report.dataset = data.corpus.name();
  report.split_seed = data.split.seed;
  report.question_count = data.split.test.size();
  report.ks = ks;

  auto with = config;
  with.mine_hard_negatives = true;
  auto without = config;
  without.mine_hard_negatives = false;
  report.rows.push_back(train_and_evaluate(data, with, "with_hard_negatives", ks));
  report.rows.push_back(train_and_evaluate(data, without, "without_hard_negatives", ks));
  return report;
}

std::vector<RetrievalEvalReport> sweep_hard_negative_weight(const LoadedDataset& data,
                                                            const RetrieverTrainConfig& config,
                                                            const std::vector<double>& weights,
                                                            std::vector<std::size_t> ks) {
  std::sort(ks.begin(), ks.end());
  std::vector<RetrievalEvalReport> out;
  for (double w : weights) {
    auto cfg = config;
    cfg.hard_negative_weight = w;
    cfg.mine_hard_negatives = true;
    RetrievalEvalReport r;
    r.dataset = data.corpus.name();
    r.split_seed = data.split.seed;
    r.question_count = data.split.test.size();
    r.ks = ks;
    char name[32];
    std::snprintf(name, sizeof name, "w=%g", w);
    r.rows.push_back(train_and_evaluate(data, cfg, name, ks));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace logqa
