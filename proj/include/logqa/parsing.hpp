#pragma once

#include <string>
#include <vector>

#include "logqa/corpus.hpp"
#include "logqa/text.hpp"

namespace logqa {

inline constexpr const char* kWildcard = "<*>";

// One position of a template. A wildcard may keep a constant bracket or
// slash around the variable part ("/<*>" for "/10.251.42.9").
struct TemplateToken {
  bool wildcard = false;
  std::string text;    // constant surface when !wildcard
  std::string prefix;  // constant prefix when wildcard
  std::string suffix;  // constant suffix when wildcard

  static TemplateToken constant(std::string s) { return {false, std::move(s), {}, {}}; }
  static TemplateToken any(std::string prefix = {}, std::string suffix = {}) {
    return {true, {}, std::move(prefix), std::move(suffix)};
  }

  bool matches(const Token& tok) const;
  // Variable part of `tok`; requires matches(tok).
  std::string parameter(const Token& tok) const;
  std::string str() const { return wildcard ? prefix + kWildcard + suffix : text; }

  friend bool operator==(const TemplateToken&, const TemplateToken&) = default;
};

struct Template {
  int id = 0;
  std::vector<TemplateToken> tokens;

  std::size_t wildcard_count() const;
  std::string str() const;
};

struct ParsedLog {
  LogId log_id = 0;
  int template_id = 0;
  std::vector<std::string> parameters;

  friend bool operator==(const ParsedLog&, const ParsedLog&) = default;
};

struct ParseTreeConfig {
  int depth = 4;
  double similarity_threshold = 0.4;
  int max_children = 100;

  void validate() const;
};

struct ParsedCorpus {
  std::vector<Template> templates;
  std::vector<ParsedLog> logs;  // indexed by LogId

  const Template& template_of(LogId id) const {
    return templates.at(static_cast<std::size_t>(logs.at(static_cast<std::size_t>(id)).template_id));
  }
  const ParsedLog& log(LogId id) const { return logs.at(static_cast<std::size_t>(id)); }

  // `id<TAB>template` lines.
  std::string templates_tsv() const;
  // `log_id<TAB>template_id<TAB>p1,p2,...` lines.
  std::string parsed_tsv() const;
};

bool has_digit(std::string_view token);

// Wildcard form of a variable-bearing token: bracket/slash edges stay
// constant, the rest becomes <*>.
TemplateToken mask_token(const Token& token);

ParsedCorpus parse_corpus(const Corpus& corpus, const ParseTreeConfig& config = {});

// True exactly at the log positions the template marks as wildcards.
std::vector<bool> parameter_token_mask(const ParsedLog& parsed, const Template& tmpl,
                                       const Tokens& log_tokens);

// Substitutes parameters into the template's wildcards, token by token.
Tokens reconstruct(const ParsedLog& parsed, const Template& tmpl);

}  // namespace logqa
