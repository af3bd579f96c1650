#include "logqa/text.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "logqa/checksum.hpp"
#include "logqa/error.hpp"

namespace logqa {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_edge_punct(char c) {
  switch (c) {
    case '.': case ',': case ';': case ':': case '?': case '!': case '"': case '\'':
      return true;
    default:
      return false;
  }
}

void split_word(std::string_view word, Tokens& out) {
  std::size_t begin = 0;
  std::size_t end = word.size();
  while (begin < end && is_edge_punct(word[begin])) ++begin;
  while (end > begin && is_edge_punct(word[end - 1])) --end;
  for (std::size_t i = 0; i < begin; ++i) out.emplace_back(1, word[i]);
  if (end > begin) out.emplace_back(word.substr(begin, end - begin));
  for (std::size_t i = end; i < word.size(); ++i) out.emplace_back(1, word[i]);
}

}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) split_word(text.substr(i, j - i), out);
    i = j;
  }
  return out;
}

std::string join_tokens(std::span<const Token> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

long find_subsequence(std::span<const Token> haystack, std::span<const Token> needle,
                      std::size_t from) {
  if (needle.empty() || needle.size() > haystack.size()) return -1;
  for (std::size_t i = from; i + needle.size() <= haystack.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), haystack.begin() + static_cast<long>(i)))
      return static_cast<long>(i);
  }
  return -1;
}

std::vector<std::size_t> all_occurrences(std::span<const Token> haystack,
                                         std::span<const Token> needle) {
  std::vector<std::size_t> out;
  long pos = find_subsequence(haystack, needle, 0);
  while (pos >= 0) {
    out.push_back(static_cast<std::size_t>(pos));
    pos = find_subsequence(haystack, needle, static_cast<std::size_t>(pos) + 1);
  }
  return out;
}

Vocab::Vocab() {
  add("<pad>", 0);
  add("<unk>", 0);
  add("<sep>", 0);
}

void Vocab::add(std::string surface, std::int64_t freq) {
  index_.emplace(surface, static_cast<TokenId>(surfaces_.size()));
  surfaces_.push_back(std::move(surface));
  freqs_.push_back(freq);
}

Vocab Vocab::build(std::span<const Tokens> streams, int min_freq) {
  if (min_freq < 1) throw Error("build_vocab: min_freq must be >= 1");
  std::map<std::string, std::int64_t> counts;
  std::size_t total = 0;
  for (const auto& stream : streams) {
    for (const auto& tok : stream) ++counts[tok];
    total += stream.size();
  }
  if (total == 0) throw Error("build_vocab: empty token stream");

  std::vector<std::pair<std::string, std::int64_t>> kept;
  for (auto& [tok, n] : counts)
    if (n >= min_freq) kept.emplace_back(tok, n);
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocab v;
  for (auto& [tok, n] : kept) {
    // A corpus token spelled like a special keeps the special's id.
    if (v.index_.count(tok)) continue;
    v.add(tok, n);
  }
  return v;
}

TokenId Vocab::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocab::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

const std::string& Vocab::surface(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= surfaces_.size())
    throw Error("vocab: id out of range: " + std::to_string(id));
  return surfaces_[static_cast<std::size_t>(id)];
}

TokenIds Vocab::encode(std::span<const Token> tokens) const {
  TokenIds ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

Tokens Vocab::decode(std::span<const TokenId> ids) const {
  Tokens out;
  out.reserve(ids.size());
  for (TokenId i : ids) out.push_back(surface(i));
  return out;
}

std::string Vocab::to_tsv() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < surfaces_.size(); ++i)
    os << i << '\t' << surfaces_[i] << '\t' << freqs_[i] << '\n';
  return os.str();
}

Vocab Vocab::from_tsv(std::string_view text) {
  Vocab v;
  v.surfaces_.clear();
  v.freqs_.clear();
  v.index_.clear();
  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto t1 = line.find('\t');
    auto t2 = line.rfind('\t');
    if (t1 == std::string::npos || t1 == t2)
      throw Error("vocab: malformed line " + std::to_string(lineno));
    auto id = std::stoul(line.substr(0, t1));
    if (id != v.surfaces_.size())
      throw Error("vocab: non-contiguous id at line " + std::to_string(lineno));
    v.add(line.substr(t1 + 1, t2 - t1 - 1), std::stoll(line.substr(t2 + 1)));
  }
  if (v.size() < kNumSpecials) throw Error("vocab: missing special tokens");
  return v;
}

std::uint64_t Vocab::checksum() const {
  Fnv1a h;
  for (const auto& s : surfaces_) {
    h.update(s);
    h.update("\n");
  }
  return h.digest();
}

}  // namespace logqa
