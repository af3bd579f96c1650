#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

// Stand-in generator for the HDFS, OpenSSH and Spark QA corpora: log lines
// drawn from the systems' real message templates, and questions whose
// answers are token spans of one log.
namespace logqa::synth {

struct QaRecord {
  std::string type;  // "what", "where", "how many", ...
  std::string question;
  std::string answer;
  std::string log;
};

struct SynthDataset {
  std::string name;
  std::vector<std::string> logs;
  std::vector<QaRecord> qa;

  std::string qa_jsonl() const;
};

const std::vector<std::string>& dataset_names();
std::size_t default_qa_count(std::string_view name);

SynthDataset generate(std::string_view name, std::uint64_t seed, std::size_t n_logs = 2000,
                      std::size_t n_qa = 0);

// <dir>/<name>_2k.log and <dir>/<name>_qa.jsonl
void write_dataset(const SynthDataset& data, const std::filesystem::path& dir);

}  // namespace logqa::synth
