#include "logqa/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "logqa/error.hpp"

namespace logqa {
namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Corpus::Corpus(std::string name, std::vector<std::string> lines) : name_(std::move(name)) {
  for (auto& line : lines) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto id = static_cast<LogId>(records_.size());
    tokens_.push_back(tokenize(line));
    records_.push_back({id, std::move(line)});
  }
  if (records_.empty()) throw Error("empty corpus: " + name_);
}

std::optional<LogId> Corpus::find_exact(const std::string& text) const {
  for (const auto& r : records_)
    if (r.text == text) return r.id;
  // Fall back to whitespace-normalized comparison so trailing spaces or
  // tab/space differences in annotation files still resolve.
  auto want = join_tokens(tokenize(text));
  for (const auto& r : records_)
    if (join_tokens(tokens_[static_cast<std::size_t>(r.id)]) == want) return r.id;
  return std::nullopt;
}

std::vector<LogId> Corpus::logs_containing(const Tokens& answer) const {
  std::vector<LogId> out;
  for (const auto& r : records_)
    if (contains_subsequence(tokens_[static_cast<std::size_t>(r.id)], answer)) out.push_back(r.id);
  return out;
}

Corpus load_log_corpus(const std::filesystem::path& path, std::string name) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  return Corpus(std::move(name), std::move(lines));
}

std::string QaLoadResult::validation_report() const {
  std::ostringstream os;
  for (const auto& r : rejected) os << "line " << r.line << ": " << r.reason << '\n';
  return os.str();
}

QaLoadResult parse_qa_lines(const std::string& content, const Corpus& corpus) {
  QaLoadResult result;
  std::istringstream in(content);
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error("qa file: malformed record at line " + std::to_string(lineno) + ": " + e.what());
    }
    auto field = [&](const char* key, bool required) -> std::optional<std::string> {
      if (!rec.is_object() || !rec.contains(key)) {
        if (required)
          throw Error("qa file: line " + std::to_string(lineno) + " lacks field '" + key + "'");
        return std::nullopt;
      }
      if (!rec[key].is_string())
        throw Error("qa file: line " + std::to_string(lineno) + " field '" + key +
                    "' is not a string");
      return rec[key].get<std::string>();
    };
    QaPair pair{*field("question", true), *field("answer", true), std::nullopt};
    auto log = field("log", false);

    auto answer_tokens = tokenize(pair.answer);
    if (trim(pair.question).empty() || answer_tokens.empty()) {
      result.rejected.push_back({lineno, "empty question or answer"});
      continue;
    }
    if (log) {
      auto id = corpus.find_exact(*log);
      if (!id) {
        result.rejected.push_back({lineno, "gold log not found in corpus: " + *log});
        continue;
      }
      if (!contains_subsequence(corpus.tokens(*id), answer_tokens)) {
        result.rejected.push_back(
            {lineno, "answer '" + pair.answer + "' is not a token span of its log"});
        continue;
      }
      pair.gold_log_id = id;
    }
    result.pairs.push_back(std::move(pair));
  }
  return result;
}

QaLoadResult load_qa_pairs(const std::filesystem::path& path, const Corpus& corpus) {
  return parse_qa_lines(read_file(path), corpus);
}

std::string qa_pairs_to_jsonl(const std::vector<QaPair>& pairs, const Corpus& corpus) {
  std::string out;
  for (const auto& p : pairs) {
    nlohmann::ordered_json rec;
    rec["question"] = p.question;
    rec["answer"] = p.answer;
    if (p.gold_log_id) rec["log"] = corpus.record(*p.gold_log_id).text;
    out += rec.dump();
    out.push_back('\n');
  }
  return out;
}

DatasetSplit split_dataset(const std::vector<QaPair>& pairs, SplitRatios ratios,
                           std::uint64_t seed) {
  if (pairs.size() < 3) throw Error("split_dataset: need at least 3 pairs");
  for (double r : ratios)
    if (!(r > 0.0)) throw Error("split_dataset: ratios must be positive");
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9)
    throw Error("split_dataset: ratios must sum to 1");

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  // Fisher-Yates driven by raw engine output so the permutation does not
  // depend on the standard library's distribution implementation.
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

  const auto n = static_cast<double>(pairs.size());
  // The epsilon keeps exact products such as 10 * 0.6 from flooring to 5.
  const auto n_train = static_cast<std::size_t>(std::floor(n * ratios[0] + 1e-9));
  const auto n_val = static_cast<std::size_t>(std::floor(n * ratios[1] + 1e-9));

  DatasetSplit split;
  split.seed = seed;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& p = pairs[order[i]];
    if (i < n_train)
      split.train.push_back(p);
    else if (i < n_train + n_val)
      split.validation.push_back(p);
    else
      split.test.push_back(p);
  }
  return split;
}

std::optional<LogId> positive_log(const QaPair& pair, const Corpus& corpus) {
  if (pair.gold_log_id) return pair.gold_log_id;
  auto hits = corpus.logs_containing(tokenize(pair.answer));
  if (hits.empty()) return std::nullopt;
  return hits.front();
}

}  // namespace logqa
