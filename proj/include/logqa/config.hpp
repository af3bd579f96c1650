#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "logqa/parsing.hpp"
#include "logqa/reader.hpp"
#include "logqa/retriever.hpp"

namespace logqa {

// Which artifact a configuration checksum is computed for. Each stage
// covers its own keys plus those of every stage it depends on.
enum class Stage { kData, kRetriever, kReader };

// Every run setting. The on-disk form is flat `key = value` lines; '#'
// starts a comment. Keys use dotted section prefixes (retriever.*,
// reader.*, parse.*).
struct RunConfig {
  std::string dataset = "HDFS";
  std::filesystem::path data_dir;  // <data_dir>/<dataset>_2k.log and _qa.jsonl
  std::filesystem::path logs;      // overrides the data_dir layout
  std::filesystem::path qa;
  std::filesystem::path out_dir = "logqa-out";
  std::uint64_t split_seed = 1;
  std::uint64_t eval_seed = 1;
  std::size_t k = 5;
  ParseTreeConfig parse;
  RetrieverTrainConfig retriever;
  ReaderTrainConfig reader;

  static const std::vector<std::string>& keys();
  static std::string describe(std::string_view key);

  // Throws on unknown keys and unparsable values.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;

  void load_text(std::string_view text, const std::string& origin = "config");
  void load_file(const std::filesystem::path& path);
  // Every key in canonical order; parsing it back reproduces the config.
  std::string to_text() const;

  std::filesystem::path log_path() const;
  std::filesystem::path qa_path() const;

  std::uint64_t checksum(Stage stage) const;
  void validate() const;
};

// Default output directory: $LOGQA_OUT when set, otherwise "logqa-out".
std::filesystem::path default_out_dir();

// ---- artifacts ----

inline constexpr int kArtifactVersion = 1;

struct ArtifactManifest {
  std::string kind;  // vocab | encoder | index | reader | report
  int version = kArtifactVersion;
  std::uint64_t config_checksum = 0;
  std::uint64_t content_checksum = 0;
  std::string created;  // UTC, ISO 8601

  std::string to_json() const;
  static ArtifactManifest from_json(std::string_view text);
};

std::filesystem::path manifest_path(const std::filesystem::path& artifact);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Writes the artifact and its `<file>.manifest.json`.
void write_artifact(const std::filesystem::path& path, std::string_view content,
                    const std::string& kind, std::uint64_t config_checksum);

// Reads an artifact after checking its manifest: kind, version, content
// checksum and the config checksum. `producer` names the command that
// makes the artifact; it is quoted in errors.
std::string read_artifact(const std::filesystem::path& path, const std::string& kind,
                          std::uint64_t config_checksum, const std::string& producer);

}  // namespace logqa
