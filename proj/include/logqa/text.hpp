#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace logqa {

using Token = std::string;
using TokenId = std::int32_t;
using Tokens = std::vector<Token>;
using TokenIds = std::vector<TokenId>;

// Splits on whitespace, then peels leading/trailing punctuation from the set
// . , ; : ? ! " ' into single-character tokens. Interior characters are
// never split, so block ids, IPs and ports survive as one token.
Tokens tokenize(std::string_view text);

// Joins tokens with single spaces. tokenize(join_tokens(t)) == t.
std::string join_tokens(std::span<const Token> tokens);

// Position of the first contiguous occurrence of needle in haystack, or -1.
// An empty needle never matches.
long find_subsequence(std::span<const Token> haystack, std::span<const Token> needle,
                      std::size_t from = 0);

inline bool contains_subsequence(std::span<const Token> haystack,
                                 std::span<const Token> needle) {
  return find_subsequence(haystack, needle) >= 0;
}

// Start offsets of every contiguous occurrence (overlaps included).
std::vector<std::size_t> all_occurrences(std::span<const Token> haystack,
                                         std::span<const Token> needle);

class Vocab {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kSep = 2;
  static constexpr std::size_t kNumSpecials = 3;

  Vocab();

  // Keeps tokens seen at least min_freq times, ordered by (frequency desc,
  // surface asc). Throws on an empty stream or min_freq < 1.
  static Vocab build(std::span<const Tokens> streams, int min_freq = 1);

  std::size_t size() const { return surfaces_.size(); }
  TokenId id(std::string_view token) const;
  const std::string& surface(TokenId id) const;
  std::int64_t frequency(TokenId id) const { return freqs_.at(static_cast<std::size_t>(id)); }
  bool contains(std::string_view token) const;

  TokenIds encode(std::span<const Token> tokens) const;
  Tokens decode(std::span<const TokenId> ids) const;

  // `id<TAB>token<TAB>frequency` lines.
  std::string to_tsv() const;
  static Vocab from_tsv(std::string_view text);
  std::uint64_t checksum() const;

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.surfaces_ == b.surfaces_ && a.freqs_ == b.freqs_;
  }

 private:
  void add(std::string surface, std::int64_t freq);

  std::vector<std::string> surfaces_;
  std::vector<std::int64_t> freqs_;
  std::unordered_map<std::string, TokenId> index_;
};

inline TokenIds encode_ids(std::span<const Token> tokens, const Vocab& vocab) {
  return vocab.encode(tokens);
}

}  // namespace logqa
