#include "logqa/parsing.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "logqa/error.hpp"

namespace logqa {
namespace {

constexpr std::string_view kPrefixChars = "/([{";
constexpr std::string_view kSuffixChars = ")]}";

struct Node {
  std::map<std::string, std::unique_ptr<Node>> children;
  std::vector<std::size_t> clusters;
};

struct Cluster {
  std::vector<TemplateToken> tokens;
};

// Fixed-depth prefix tree: first keyed on token count, then on the leading
// tokens, then a list of candidate clusters at the leaf.
class DrainTree {
 public:
  explicit DrainTree(const ParseTreeConfig& cfg)
      : levels_(static_cast<std::size_t>(std::max(0, cfg.depth - 3))),
        threshold_(cfg.similarity_threshold),
        max_children_(static_cast<std::size_t>(cfg.max_children)) {}

  std::size_t insert(const Tokens& toks) {
    if (auto it = exact_.find(toks); it != exact_.end()) return it->second;
    std::size_t id;
    if (auto hit = match(toks)) {
      id = *hit;
      merge(clusters_[id], toks);
    } else {
      id = clusters_.size();
      Cluster c;
      for (const auto& t : toks)
        c.tokens.push_back(has_digit(t) ? mask_token(t) : TemplateToken::constant(t));
      clusters_.push_back(std::move(c));
      leaf_for_insert(toks).clusters.push_back(id);
    }
    exact_.emplace(toks, id);
    return id;
  }

  const std::vector<Cluster>& clusters() const { return clusters_; }

 private:
  static std::string key_of(const Token& t) { return has_digit(t) ? kWildcard : t; }

  const Node* leaf_for_search(const Tokens& toks) const {
    auto it = by_length_.find(toks.size());
    if (it == by_length_.end()) return nullptr;
    const Node* node = it->second.get();
    for (std::size_t i = 0; i < levels_ && i < toks.size(); ++i) {
      auto child = node->children.find(key_of(toks[i]));
      if (child == node->children.end()) child = node->children.find(kWildcard);
      if (child == node->children.end()) return nullptr;
      node = child->second.get();
    }
    return node;
  }

  Node& leaf_for_insert(const Tokens& toks) {
    auto& root = by_length_[toks.size()];
    if (!root) root = std::make_unique<Node>();
    Node* node = root.get();
    for (std::size_t i = 0; i < levels_ && i < toks.size(); ++i) {
      const std::string key = key_of(toks[i]);
      auto& kids = node->children;
      std::string next = key;
      if (!kids.count(key)) {
        if (key == kWildcard) {
          next = kWildcard;
        } else if (kids.count(kWildcard)) {
          next = kids.size() < max_children_ ? key : std::string(kWildcard);
        } else if (kids.size() + 1 < max_children_) {
          next = key;
        } else {
          next = kWildcard;
        }
      }
      auto& slot = kids[next];
      if (!slot) slot = std::make_unique<Node>();
      node = slot.get();
    }
    return *node;
  }

  std::optional<std::size_t> match(const Tokens& toks) const {
    const Node* leaf = leaf_for_search(toks);
    if (!leaf) return std::nullopt;
    double best_sim = -1.0;
    std::size_t best_params = 0;
    std::optional<std::size_t> best;
    for (std::size_t cid : leaf->clusters) {
      const auto& tmpl = clusters_[cid].tokens;
      std::size_t same = 0, params = 0;
      for (std::size_t i = 0; i < toks.size(); ++i) {
        if (tmpl[i].wildcard)
          ++params;
        else if (tmpl[i].text == toks[i])
          ++same;
      }
      double sim = static_cast<double>(same) / static_cast<double>(toks.size());
      if (sim > best_sim || (sim == best_sim && params > best_params)) {
        best_sim = sim;
        best_params = params;
        best = cid;
      }
    }
    if (best && best_sim >= threshold_) return best;
    return std::nullopt;
  }

  static void merge(Cluster& c, const Tokens& toks) {
    for (std::size_t i = 0; i < toks.size(); ++i) {
      auto& t = c.tokens[i];
      if (t.wildcard) {
        if (!t.matches(toks[i])) t = TemplateToken::any();
      } else if (t.text != toks[i]) {
        t = TemplateToken::any();
      }
    }
  }

  std::size_t levels_;
  double threshold_;
  std::size_t max_children_;
  std::map<std::size_t, std::unique_ptr<Node>> by_length_;
  std::vector<Cluster> clusters_;
  std::map<Tokens, std::size_t> exact_;
};

}  // namespace

bool TemplateToken::matches(const Token& tok) const {
  if (!wildcard) return tok == text;
  if (tok.size() <= prefix.size() + suffix.size()) return false;
  return tok.compare(0, prefix.size(), prefix) == 0 &&
         tok.compare(tok.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string TemplateToken::parameter(const Token& tok) const {
  return tok.substr(prefix.size(), tok.size() - prefix.size() - suffix.size());
}

std::size_t Template::wildcard_count() const {
  return static_cast<std::size_t>(
      std::count_if(tokens.begin(), tokens.end(), [](const auto& t) { return t.wildcard; }));
}

std::string Template::str() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i].str();
  }
  return out;
}

void ParseTreeConfig::validate() const {
  if (depth < 2) throw Error("parse config: depth must be >= 2");
  if (!(similarity_threshold > 0.0 && similarity_threshold <= 1.0))
    throw Error("parse config: similarity_threshold must be in (0,1]");
  if (max_children < 1) throw Error("parse config: max_children must be >= 1");
}

bool has_digit(std::string_view token) {
  return std::any_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; });
}

TemplateToken mask_token(const Token& token) {
  std::size_t b = 0, e = token.size();
  while (b < e && kPrefixChars.find(token[b]) != std::string_view::npos) ++b;
  while (e > b && kSuffixChars.find(token[e - 1]) != std::string_view::npos) --e;
  if (b == e) return TemplateToken::any();
  return TemplateToken::any(token.substr(0, b), token.substr(e));
}

ParsedCorpus parse_corpus(const Corpus& corpus, const ParseTreeConfig& config) {
  config.validate();
  DrainTree tree(config);
  std::vector<std::size_t> assignment;
  assignment.reserve(corpus.size());
  for (const auto& toks : corpus.all_tokens()) assignment.push_back(tree.insert(toks));

  ParsedCorpus out;
  const auto& clusters = tree.clusters();
  for (std::size_t i = 0; i < clusters.size(); ++i)
    out.templates.push_back({static_cast<int>(i), clusters[i].tokens});

  for (const auto& rec : corpus.records()) {
    const auto cid = assignment[static_cast<std::size_t>(rec.id)];
    const auto& tmpl = out.templates[cid];
    const auto& toks = corpus.tokens(rec.id);
    ParsedLog p{rec.id, static_cast<int>(cid), {}};
    for (std::size_t i = 0; i < toks.size(); ++i)
      if (tmpl.tokens[i].wildcard) p.parameters.push_back(tmpl.tokens[i].parameter(toks[i]));
    out.logs.push_back(std::move(p));
  }
  return out;
}

std::vector<bool> parameter_token_mask(const ParsedLog& parsed, const Template& tmpl,
                                       const Tokens& log_tokens) {
  if (parsed.template_id != tmpl.id || log_tokens.size() != tmpl.tokens.size() ||
      parsed.parameters.size() != tmpl.wildcard_count())
    throw Error("parameter_token_mask: parsed log does not belong to template " +
                std::to_string(tmpl.id));
  std::vector<bool> mask(log_tokens.size());
  for (std::size_t i = 0; i < log_tokens.size(); ++i) {
    if (!tmpl.tokens[i].matches(log_tokens[i]))
      throw Error("parameter_token_mask: token " + std::to_string(i) + " does not fit template");
    mask[i] = tmpl.tokens[i].wildcard;
  }
  return mask;
}

Tokens reconstruct(const ParsedLog& parsed, const Template& tmpl) {
  if (parsed.parameters.size() != tmpl.wildcard_count())
    throw Error("reconstruct: parameter count mismatch");
  Tokens out;
  std::size_t p = 0;
  for (const auto& t : tmpl.tokens)
    out.push_back(t.wildcard ? t.prefix + parsed.parameters[p++] + t.suffix : t.text);
  return out;
}

std::string ParsedCorpus::templates_tsv() const {
  std::ostringstream os;
  for (const auto& t : templates) os << t.id << '\t' << t.str() << '\n';
  return os.str();
}

std::string ParsedCorpus::parsed_tsv() const {
  std::ostringstream os;
  for (const auto& p : logs) {
    os << p.log_id << '\t' << p.template_id << '\t';
    for (std::size_t i = 0; i < p.parameters.size(); ++i) os << (i ? "," : "") << p.parameters[i];
    os << '\n';
  }
  return os.str();
}

}  // namespace logqa
