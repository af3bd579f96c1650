#include "logqa/config.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "logqa/checksum.hpp"
#include "logqa/error.hpp"

namespace logqa {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_integer(std::string_view key, std::string_view v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw Error("config: " + std::string(key) + " expects an integer, got '" + std::string(v) + "'");
  return out;
}

double parse_real(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw Error("config: " + std::string(key) + " expects a number, got '" + std::string(v) + "'");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error("config: " + std::string(key) + " expects true or false, got '" + std::string(v) + "'");
}

std::string real_str(double v) {
  // Shortest text that parses back to the same double.
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

struct Entry {
  std::string key;
  Stage stage;
  bool checksummed;
  std::string help;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

#define LOGQA_INT(KEY, STAGE, FIELD, HELP)                                              \
  Entry {                                                                                \
    KEY, STAGE, true, HELP, [](const RunConfig& c) { return std::to_string(c.FIELD); }, \
        [](RunConfig& c, std::string_view v) {                                           \
          c.FIELD = parse_integer<decltype(c.FIELD)>(KEY, v);                            \
        }                                                                                \
  }
#define LOGQA_REAL(KEY, STAGE, FIELD, HELP)                                                        \
  Entry {                                                                                          \
    KEY, STAGE, true, HELP, [](const RunConfig& c) { return real_str(c.FIELD); },                  \
        [](RunConfig& c, std::string_view v) { c.FIELD = parse_real(KEY, v); }                     \
  }
#define LOGQA_BOOL(KEY, STAGE, FIELD, HELP)                                                        \
  Entry {                                                                                          \
    KEY, STAGE, true, HELP, [](const RunConfig& c) { return std::string(c.FIELD ? "true" : "false"); }, \
        [](RunConfig& c, std::string_view v) { c.FIELD = parse_bool(KEY, v); }                     \
  }
#define LOGQA_PATH(KEY, FIELD, HELP)                                                       \
  Entry {                                                                                  \
    KEY, Stage::kData, false, HELP, [](const RunConfig& c) { return c.FIELD.string(); },   \
        [](RunConfig& c, std::string_view v) { c.FIELD = std::string(v); }                 \
  }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table{
      {"dataset", Stage::kData, true, "dataset name (HDFS, OpenSSH, Spark, ...)",
       [](const RunConfig& c) { return c.dataset; },
       [](RunConfig& c, std::string_view v) { c.dataset = std::string(v); }},
      LOGQA_PATH("data_dir", data_dir, "directory holding <dataset>_2k.log and <dataset>_qa.jsonl"),
      LOGQA_PATH("logs", logs, "raw log file (overrides data_dir)"),
      LOGQA_PATH("qa", qa, "QA JSONL file (overrides data_dir)"),
      LOGQA_PATH("out", out_dir, "output directory for artifacts and reports"),
      LOGQA_INT("split_seed", Stage::kData, split_seed, "seed of the 60/10/30 train/validation/test split"),
      Entry{"eval_seed", Stage::kData, false, "seed of the random baselines",
            [](const RunConfig& c) { return std::to_string(c.eval_seed); },
            [](RunConfig& c, std::string_view v) { c.eval_seed = parse_integer<std::uint64_t>("eval_seed", v); }},
      Entry{"k", Stage::kData, false, "logs retrieved per question when reading",
            [](const RunConfig& c) { return std::to_string(c.k); },
            [](RunConfig& c, std::string_view v) { c.k = parse_integer<std::size_t>("k", v); }},
      LOGQA_INT("parse.depth", Stage::kData, parse.depth, "parse tree depth"),
      LOGQA_REAL("parse.similarity_threshold", Stage::kData, parse.similarity_threshold, "template similarity threshold"),
      LOGQA_INT("parse.max_children", Stage::kData, parse.max_children, "maximum children per parse tree node"),
      LOGQA_REAL("retriever.learning_rate", Stage::kRetriever, retriever.learning_rate, "retriever learning rate"),
      LOGQA_INT("retriever.iterations", Stage::kRetriever, retriever.iterations, "training iterations (mining rounds)"),
      LOGQA_INT("retriever.epochs_per_iteration", Stage::kRetriever, retriever.epochs_per_iteration, "epochs per iteration"),
      LOGQA_INT("retriever.batch_size", Stage::kRetriever, retriever.batch_size, "questions per batch"),
      LOGQA_REAL("retriever.hard_negative_weight", Stage::kRetriever, retriever.hard_negative_weight, "hard negative weight w"),
      LOGQA_INT("retriever.mining_k", Stage::kRetriever, retriever.mining_k, "logs retrieved per question when mining"),
      LOGQA_BOOL("retriever.mine_hard_negatives", Stage::kRetriever, retriever.mine_hard_negatives, "mine hard negatives between iterations"),
      LOGQA_REAL("retriever.alpha", Stage::kRetriever, retriever.alpha, "target value of parameter-sharing logs"),
      LOGQA_REAL("retriever.temperature", Stage::kRetriever, retriever.temperature, "softmax temperature"),
      LOGQA_INT("retriever.dim", Stage::kRetriever, retriever.dim, "encoder dimension"),
      LOGQA_REAL("retriever.init_range", Stage::kRetriever, retriever.init_range, "uniform init half-width"),
      LOGQA_INT("retriever.seed", Stage::kRetriever, retriever.seed, "retriever seed"),
      LOGQA_INT("reader.epochs", Stage::kReader, reader.epochs, "reader epochs"),
      LOGQA_REAL("reader.learning_rate", Stage::kReader, reader.learning_rate, "reader learning rate"),
      LOGQA_INT("reader.batch_size", Stage::kReader, reader.batch_size, "reader examples per step"),
      LOGQA_INT("reader.max_span_len", Stage::kReader, reader.max_span_len, "longest answer span in tokens"),
      LOGQA_INT("reader.window_radius", Stage::kReader, reader.window_radius, "context window radius"),
      LOGQA_REAL("reader.init_range", Stage::kReader, reader.init_range, "uniform init half-width of new reader weights"),
      LOGQA_BOOL("reader.param_loss", Stage::kReader, reader.param_loss, "train the parameter head"),
      LOGQA_INT("reader.seed", Stage::kReader, reader.seed, "reader seed"),
  };
  return table;
}

#undef LOGQA_INT
#undef LOGQA_REAL
#undef LOGQA_BOOL
#undef LOGQA_PATH

const Entry& entry(std::string_view key) {
  for (const auto& e : entries())
    if (e.key == key) return e;
  throw Error("config: unknown key '" + std::string(key) + "'");
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::uint64_t content_hash(std::string_view s) {
  Fnv1a h;
  h.update(s);
  return h.digest();
}

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& e : entries()) out.push_back(e.key);
    return out;
  }();
  return k;
}

std::string RunConfig::describe(std::string_view key) { return entry(key).help; }

void RunConfig::set(std::string_view key, std::string_view value) { entry(key).set(*this, trim(value)); }

std::string RunConfig::get(std::string_view key) const { return entry(key).get(*this); }

void RunConfig::load_text(std::string_view text, const std::string& origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error(origin + ":" + std::to_string(n) + ": expected key = value");
    try {
      set(trim(t.substr(0, eq)), t.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(origin + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

void RunConfig::load_file(const std::filesystem::path& path) { load_text(read_file(path), path.string()); }

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& e : entries()) out += e.key + " = " + e.get(*this) + "\n";
  return out;
}

std::filesystem::path RunConfig::log_path() const {
  if (!logs.empty()) return logs;
  if (data_dir.empty()) throw Error("no dataset given: set data_dir (or logs and qa)");
  return data_dir / (dataset + "_2k.log");
}

std::filesystem::path RunConfig::qa_path() const {
  if (!qa.empty()) return qa;
  if (data_dir.empty()) throw Error("no dataset given: set data_dir (or logs and qa)");
  return data_dir / (dataset + "_qa.jsonl");
}

std::uint64_t RunConfig::checksum(Stage stage) const {
  Fnv1a h;
  for (const auto& e : entries()) {
    if (!e.checksummed || static_cast<int>(e.stage) > static_cast<int>(stage)) continue;
    h.update(e.key);
    h.update("=");
    h.update(e.get(*this));
    h.update("\n");
  }
  return h.digest();
}

void RunConfig::validate() const {
  parse.validate();
  const auto& r = retriever;
  if (!(r.learning_rate > 0) || r.iterations < 1 || r.epochs_per_iteration < 1 || r.batch_size < 1 ||
      r.hard_negative_weight < 0 || r.mining_k < 1 || !(r.alpha > 0 && r.alpha < 1) ||
      !(r.temperature > 0) || r.dim < 2 || !(r.init_range > 0))
    throw Error("config: retriever settings out of range");
  if (!(reader.learning_rate > 0) || reader.epochs < 0 || reader.batch_size < 1 ||
      reader.max_span_len < 1 || reader.window_radius < 0 || !(reader.init_range > 0))
    throw Error("config: reader settings out of range");
  if (k < 1) throw Error("config: k must be at least 1");
}

std::filesystem::path default_out_dir() {
  if (const char* env = std::getenv("LOGQA_OUT"); env && *env) return env;
  return "logqa-out";
}

std::string ArtifactManifest::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = kind;
  j["version"] = version;
  j["config_checksum"] = hex(config_checksum);
  j["content_checksum"] = hex(content_checksum);
  j["created"] = created;
  return j.dump(2) + "\n";
}

ArtifactManifest ArtifactManifest::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ArtifactManifest m;
    m.kind = j.at("kind").get<std::string>();
    m.version = j.at("version").get<int>();
    m.config_checksum = std::stoull(j.at("config_checksum").get<std::string>(), nullptr, 16);
    m.content_checksum = std::stoull(j.at("content_checksum").get<std::string>(), nullptr, 16);
    m.created = j.at("created").get<std::string>();
    return m;
  } catch (const std::exception& e) {
    throw Error(std::string("malformed manifest: ") + e.what());
  }
}

std::filesystem::path manifest_path(const std::filesystem::path& artifact) {
  return artifact.string() + ".manifest.json";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("cannot write " + path.string());
}

void write_artifact(const std::filesystem::path& path, std::string_view content,
                    const std::string& kind, std::uint64_t config_checksum) {
  write_file(path, content);
  ArtifactManifest m{kind, kArtifactVersion, config_checksum, content_hash(content), utc_now()};
  write_file(manifest_path(path), m.to_json());
}

std::string read_artifact(const std::filesystem::path& path, const std::string& kind,
                          std::uint64_t config_checksum, const std::string& producer) {
  if (!std::filesystem::exists(path))
    throw Error("missing " + kind + " artifact " + path.string() + "; run `" + producer + "` first");
  const auto mpath = manifest_path(path);
  if (!std::filesystem::exists(mpath))
    throw Error("missing manifest for " + path.string() + "; re-run `" + producer + "`");
  const auto m = ArtifactManifest::from_json(read_file(mpath));
  if (m.kind != kind) throw Error(path.string() + " is a " + m.kind + " artifact, expected " + kind);
  if (m.version != kArtifactVersion)
    throw Error(path.string() + " has version " + std::to_string(m.version) + ", expected " +
                std::to_string(kArtifactVersion) + "; re-run `" + producer + "`");
  auto content = read_file(path);
  if (content_hash(content) != m.content_checksum)
    throw Error(path.string() + " does not match its manifest checksum; re-run `" + producer + "`");
  if (m.config_checksum != config_checksum)
    throw Error(path.string() + " was produced with a different configuration; re-run `" + producer + "`");
  return content;
}

}  // namespace logqa
