#include "logqa/cli.hpp"

#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "logqa/baselines.hpp"
#include "logqa/config.hpp"
#include "logqa/error.hpp"
#include "logqa/eval.hpp"

namespace logqa {
namespace {

namespace fs = std::filesystem;

struct Paths {
  fs::path dir;
  fs::path vocab() const { return dir / "vocab.tsv"; }
  fs::path templates() const { return dir / "templates.tsv"; }
  fs::path parsed() const { return dir / "parsed.tsv"; }
  fs::path rejected() const { return dir / "qa_rejected.txt"; }
  fs::path encoder() const { return dir / "encoder.bin"; }
  fs::path training_log() const { return dir / "training_log.csv"; }
  fs::path index() const { return dir / "index.bin"; }
  fs::path reader() const { return dir / "reader.bin"; }
  fs::path reader_log() const { return dir / "reader_log.csv"; }
};

class Session {
 public:
  Session(RunConfig cfg, std::ostream& out, std::ostream& err, bool quiet)
      : cfg_(std::move(cfg)), paths_{cfg_.out_dir}, out_(out), err_(err), quiet_(quiet) {}

  const RunConfig& config() const { return cfg_; }
  const Paths& paths() const { return paths_; }
  std::ostream& out() { return out_; }

  void note(const std::string& msg) {
    if (!quiet_) err_ << msg << '\n';
  }

  const LoadedDataset& data() {
    if (!data_) {
      data_ = load_dataset(cfg_.log_path(), cfg_.qa_path(), cfg_.dataset, cfg_.split_seed, cfg_.parse);
      if (!data_->qa.rejected.empty())
        note(std::to_string(data_->qa.rejected.size()) + " QA records rejected; see " +
             paths_.rejected().string());
    }
    return *data_;
  }

  // The recorded vocabulary must match the one the dataset yields now.
  void check_vocab() {
    const auto text = read_artifact(paths_.vocab(), "vocab", cfg_.checksum(Stage::kData), "logqa parse");
    if (Vocab::from_tsv(text).checksum() != data().vocab.checksum())
      throw Error("vocab.tsv no longer matches the dataset; re-run `logqa parse`");
  }

  const EncoderParams& encoder() {
    if (!encoder_) {
      check_vocab();
      encoder_ = EncoderParams::deserialize(read_artifact(
          paths_.encoder(), "encoder", cfg_.checksum(Stage::kRetriever), "logqa train-retriever"));
      if (encoder_->vocab_size() != data().vocab.size())
        throw Error("encoder.bin vocabulary size differs from vocab.tsv; re-run `logqa train-retriever`");
    }
    return *encoder_;
  }

  const LogIndex& index() {
    if (!index_) {
      const auto& enc = encoder();
      index_ = LogIndex::deserialize(read_artifact(paths_.index(), "index", cfg_.checksum(Stage::kRetriever),
                                                   "logqa build-index"));
      try {
        index_->check_fresh(enc);
      } catch (const Error& e) {
        throw Error(std::string(e.what()) + "; re-run `logqa build-index`");
      }
      if (index_->size() != data().corpus.size())
        throw Error("index.bin covers a different corpus; re-run `logqa build-index`");
    }
    return *index_;
  }

  const ReaderModel& reader() {
    if (!reader_) {
      reader_ = ReaderModel::deserialize(
          read_artifact(paths_.reader(), "reader", cfg_.checksum(Stage::kReader), "logqa train-reader"));
      if (static_cast<std::size_t>(reader_->embedding.rows()) != data().vocab.size())
        throw Error("reader.bin vocabulary size differs from vocab.tsv; re-run `logqa train-reader`");
    }
    return *reader_;
  }

  void write_report(const fs::path& path, const std::string& content) {
    write_artifact(path, content, "report", cfg_.checksum(Stage::kReader));
  }

 private:
  RunConfig cfg_;
  Paths paths_;
  std::ostream& out_;
  std::ostream& err_;
  bool quiet_;
  std::unique_ptr<LoadedDataset> data_;
  std::optional<EncoderParams> encoder_;
  std::optional<LogIndex> index_;
  std::optional<ReaderModel> reader_;
};

void cmd_parse(Session& s) {
  const auto& d = s.data();
  const auto& p = s.paths();
  const auto data_sum = s.config().checksum(Stage::kData);
  write_artifact(p.templates(), d.parsed.templates_tsv(), "report", data_sum);
  write_artifact(p.parsed(), d.parsed.parsed_tsv(), "report", data_sum);
  write_artifact(p.rejected(), d.qa.validation_report(), "report", data_sum);
  write_artifact(p.vocab(), d.vocab.to_tsv(), "vocab", data_sum);
  s.out() << d.corpus.name() << ": " << d.corpus.size() << " logs, " << d.parsed.templates.size()
          << " templates, " << d.qa.pairs.size() << " QA pairs (" << d.qa.rejected.size()
          << " rejected), split " << d.split.train.size() << "/" << d.split.validation.size() << "/"
          << d.split.test.size() << ", vocabulary " << d.vocab.size() << '\n';
}

void cmd_train_retriever(Session& s) {
  s.check_vocab();
  const auto& d = s.data();
  const auto trained = train_retriever(d.split, *d.logs, s.config().retriever, [&](const TrainingLogRow& r) {
    std::ostringstream msg;
    msg << "iteration " << r.iteration << " epoch " << r.epoch << " loss " << r.loss << " val acc@1 "
        << r.val_acc1 << " acc@5 " << r.val_acc5;
    s.note(msg.str());
  });
  const auto sum = s.config().checksum(Stage::kRetriever);
  write_artifact(s.paths().encoder(), trained.params.serialize(), "encoder", sum);
  write_artifact(s.paths().training_log(), training_log_csv(trained.log), "report", sum);
  const auto& last = trained.log.back();
  s.out() << "wrote " << s.paths().encoder().string() << " (final val acc@1 " << last.val_acc1
          << ", acc@5 " << last.val_acc5 << ")\n";
}

void cmd_build_index(Session& s) {
  const auto index = build_index(s.encoder(), *s.data().logs);
  write_artifact(s.paths().index(), index.serialize(), "index", s.config().checksum(Stage::kRetriever));
  s.out() << "wrote " << s.paths().index().string() << " (" << index.size() << " logs)\n";
}

void cmd_train_reader(Session& s) {
  const auto& enc = s.encoder();
  const auto& d = s.data();
  const auto examples = make_reader_examples(d.split.train, *d.logs);
  const auto trained = train_reader(examples, enc, s.config().reader, [&](const ReaderEpochLog& r) {
    s.note("epoch " + std::to_string(r.epoch) + " loss " + std::to_string(r.loss));
  });
  std::string csv = "epoch,loss\n";
  for (const auto& r : trained.log) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%d,%.17g\n", r.epoch, r.loss);
    csv += buf;
  }
  const auto sum = s.config().checksum(Stage::kReader);
  write_artifact(s.paths().reader(), trained.model.serialize(), "reader", sum);
  write_artifact(s.paths().reader_log(), csv, "report", sum);
  s.out() << "wrote " << s.paths().reader().string() << " (" << examples.size() << " training examples)\n";
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void cmd_eval_retriever(Session& s, const std::string& methods_arg) {
  std::vector<BaselineMethod> baselines;
  bool dense = false;
  for (const auto& m : split_list(methods_arg)) {
    if (m == "all") {
      baselines = all_baseline_methods();
      dense = true;
    } else if (m == "logqa") {
      dense = true;
    } else {
      baselines.push_back(parse_baseline_method(m));
    }
  }
  const EncoderParams* enc = dense ? &s.encoder() : nullptr;
  const LogIndex* idx = dense ? &s.index() : nullptr;
  const auto report = evaluate_retriever(s.data(), baselines, enc, idx, s.config().eval_seed);
  s.write_report(s.paths().dir / "retrieval_report.csv", report.to_csv());
  s.write_report(s.paths().dir / "retrieval_report.txt", report.to_table());
  s.out() << report.to_table();
}

void cmd_eval_reader(Session& s) {
  const auto& d = s.data();
  const auto& enc = s.encoder();
  const auto& idx = s.index();
  const auto& rdr = s.reader();
  SpanClassifier classifier(enc, *d.logs);
  classifier.train(d.split.train, idx, s.config().k);
  ReaderEvalInputs in;
  in.data = &d;
  in.retriever = &enc;
  in.index = &idx;
  in.reader = &rdr;
  in.classifier = &classifier;
  in.k = s.config().k;
  in.seed = s.config().eval_seed;
  in.settings = {s.config().reader.max_span_len, s.config().retriever.temperature};
  const auto report = evaluate_reader(d.split.test, in);
  s.write_report(s.paths().dir / "reader_report.csv", report.to_csv());
  s.write_report(s.paths().dir / "reader_report.txt", report.to_table());
  s.out() << report.to_table();
}

void cmd_ablate(Session& s, bool sweep) {
  const auto& d = s.data();
  const auto report = ablate_hard_negatives(d, s.config().retriever);
  s.write_report(s.paths().dir / "ablation_report.csv", report.to_csv());
  s.write_report(s.paths().dir / "ablation_report.txt", report.to_table());
  s.out() << report.to_table();
  if (!sweep) return;
  RetrievalEvalReport merged;
  for (auto& r : sweep_hard_negative_weight(d, s.config().retriever)) {
    if (merged.ks.empty()) merged = r;
    else merged.rows.push_back(r.rows.front());
  }
  s.write_report(s.paths().dir / "weight_sweep.csv", merged.to_csv());
  s.out() << merged.to_table();
}

void print_answer(std::ostream& out, const Answer& a, const Corpus& corpus, bool json) {
  if (json) {
    out << answer_to_json(a) << '\n';
    return;
  }
  out << "answer: " << a.text << '\n'
      << "source log " << a.source_log_id << ": " << corpus.record(a.source_log_id).text << '\n'
      << "combined score: " << a.combined_score << '\n';
}

void cmd_ask(Session& s, const std::string& question, bool repl, bool json, std::istream& in,
             std::ostream& err) {
  if (question.empty() && !repl) throw Error("ask needs --question or --repl");
  const auto& d = s.data();
  const auto& enc = s.encoder();
  const auto& idx = s.index();
  const auto& rdr = s.reader();
  const ReaderSettings settings{s.config().reader.max_span_len, s.config().retriever.temperature};
  auto answer = [&](const std::string& q) {
    print_answer(s.out(), answer_question(enc, idx, rdr, *d.logs, q, s.config().k, settings), d.corpus, json);
  };
  if (!question.empty()) answer(question);
  if (!repl) return;
  std::string line;
  while (err << "> " << std::flush, std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      answer(line);
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
    }
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            std::istream& in) {
  CLI::App app{"LogQA: answer natural-language questions over raw logs", "logqa"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file;
  bool quiet = false;
  app.add_option("--config", config_file, "flat key = value config file")->check(CLI::ExistingFile);
  app.add_flag("-q,--quiet", quiet, "suppress progress output");
  std::map<std::string, std::string> overrides;
  for (const auto& key : RunConfig::keys())
    app.add_option_function<std::string>("--" + key, [&overrides, key](const std::string& v) { overrides[key] = v; },
                                         RunConfig::describe(key))
        ->group("Configuration");

  auto* parse = app.add_subcommand("parse", "parse logs, split QA pairs and build the vocabulary");
  auto* train_ret = app.add_subcommand("train-retriever", "train the log retriever");
  auto* build_idx = app.add_subcommand("build-index", "encode every log with the trained retriever");
  auto* train_rdr = app.add_subcommand("train-reader", "train the log reader on gold logs");
  auto* eval_ret = app.add_subcommand("eval-retriever", "compare retrievers by Acc@1/5/20");
  std::string methods = "all";
  eval_ret->add_option("--methods", methods,
                       "comma list of random, edit_distance, jaccard, bm25, jaro_winkler, frozen_cosine, logqa; or all");
  auto* eval_rdr = app.add_subcommand("eval-reader", "compare readers by EM and F1");
  auto* ablate = app.add_subcommand("ablate", "retriever with and without hard negatives");
  bool sweep = false;
  ablate->add_flag("--sweep", sweep, "also sweep the hard negative weight over 0.5, 1, 2, 4");
  auto* ask = app.add_subcommand("ask", "answer a question");
  std::string question;
  bool repl = false, json = false;
  std::optional<std::size_t> ask_k;
  ask->add_option("--question", question, "question text");
  ask->add_option("--k", ask_k, "logs to read");
  ask->add_flag("--repl", repl, "read questions from standard input, one per line");
  ask->add_flag("--json", json, "print the answer record as JSON");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, eo;
    const int code = app.exit(e, o, eo);
    out << o.str();
    err << eo.str();
    return code;
  }

  try {
    RunConfig cfg;
    cfg.out_dir = default_out_dir();
    if (!config_file.empty()) cfg.load_file(config_file);
    for (const auto& [k, v] : overrides) cfg.set(k, v);
    if (ask_k) cfg.k = *ask_k;
    cfg.validate();

    Session s(cfg, out, err, quiet);
    auto* cmd = app.get_subcommands().front();
    write_file(cfg.out_dir / (cmd->get_name() + ".config.txt"), cfg.to_text());
    if (cmd == parse) cmd_parse(s);
    else if (cmd == train_ret) cmd_train_retriever(s);
    else if (cmd == build_idx) cmd_build_index(s);
    else if (cmd == train_rdr) cmd_train_reader(s);
    else if (cmd == eval_ret) cmd_eval_retriever(s, methods);
    else if (cmd == eval_rdr) cmd_eval_reader(s);
    else if (cmd == ablate) cmd_ablate(s, sweep);
    else if (cmd == ask) cmd_ask(s, question, repl, json, in, err);
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace logqa
