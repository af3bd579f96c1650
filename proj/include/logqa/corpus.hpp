#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "logqa/text.hpp"

namespace logqa {

using LogId = std::int32_t;

struct LogRecord {
  LogId id = 0;
  std::string text;
};

// Retrieval universe. Token lists are cached per record because every other
// module works on tokens, never on raw text.
class Corpus {
 public:
  Corpus(std::string name, std::vector<std::string> lines);

  const std::string& name() const { return name_; }
  std::size_t size() const { return records_.size(); }
  const LogRecord& record(LogId id) const { return records_.at(static_cast<std::size_t>(id)); }
  const std::vector<LogRecord>& records() const { return records_; }
  const Tokens& tokens(LogId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  const std::vector<Tokens>& all_tokens() const { return tokens_; }

  // First record whose raw text equals `text` exactly.
  std::optional<LogId> find_exact(const std::string& text) const;
  // Ids of every record whose tokens contain `answer` as a contiguous run.
  std::vector<LogId> logs_containing(const Tokens& answer) const;

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.name_ == b.name_ && a.tokens_ == b.tokens_;
  }

 private:
  std::string name_;
  std::vector<LogRecord> records_;
  std::vector<Tokens> tokens_;
};

struct QaPair {
  std::string question;
  std::string answer;
  std::optional<LogId> gold_log_id;

  friend bool operator==(const QaPair&, const QaPair&) = default;
};

struct RejectedRecord {
  std::size_t line = 0;
  std::string reason;
};

struct QaLoadResult {
  std::vector<QaPair> pairs;
  std::vector<RejectedRecord> rejected;

  // One line per rejected record: `line <n>: <reason>`.
  std::string validation_report() const;
};

struct DatasetSplit {
  std::vector<QaPair> train;
  std::vector<QaPair> validation;
  std::vector<QaPair> test;
  std::uint64_t seed = 0;
};

// Blank lines are skipped; ids follow file order. Throws on unreadable or
// empty files.
Corpus load_log_corpus(const std::filesystem::path& path, std::string name);

// One JSON object per line with string fields question, answer and
// (optionally) log. Malformed lines throw with their line number; records
// whose answer is absent from their log, or whose log is not in the corpus,
// land in the rejection report.
QaLoadResult load_qa_pairs(const std::filesystem::path& path, const Corpus& corpus);
QaLoadResult parse_qa_lines(const std::string& content, const Corpus& corpus);

// Serializes pairs back to the canonical JSONL layout.
std::string qa_pairs_to_jsonl(const std::vector<QaPair>& pairs, const Corpus& corpus);

using SplitRatios = std::array<double, 3>;
inline constexpr SplitRatios kDefaultSplit{0.6, 0.1, 0.3};

// Seeded shuffle, then floor(n*r_train), floor(n*r_val) and the remainder
// to test.
DatasetSplit split_dataset(const std::vector<QaPair>& pairs, SplitRatios ratios,
                           std::uint64_t seed);

// Gold log when recorded, otherwise the first log containing the answer.
std::optional<LogId> positive_log(const QaPair& pair, const Corpus& corpus);

}  // namespace logqa
