#include "treeformer/taskbench.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

namespace treeformer {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> parts;
  std::string word;
  while (in >> word) parts.push_back(word);
  return parts;
}

}  // namespace

int GrammarSpec::pool_of_token(TokenId id) const {
  for (std::size_t p = 0; p < pools.size(); ++p)
    if (id >= pools[p].first_id && id < pools[p].first_id + pools[p].size)
      return static_cast<int>(p);
  return -1;
}

namespace {

struct RawRule {
  std::string lhs;
  double weight;
  std::string template_text;
  std::size_t lineno;
};

GrammarSpec::Node parse_template(const std::string& text, const GrammarSpec& g,
                                 const std::string& where);

GrammarSpec::Node resolve_atom(const std::string& atom, const GrammarSpec& g,
                               const std::string& where) {
  GrammarSpec::Node node;
  if (atom.size() > 1 && atom[0] == '$') {
    std::string pool_name = atom.substr(1);
    for (std::size_t p = 0; p < g.pools.size(); ++p)
      if (g.pools[p].name == pool_name) {
        node.kind = GrammarSpec::Node::Kind::pool;
        node.pool = static_cast<int>(p);
        return node;
      }
    fail(ErrorCode::BadConfig, where + ": unknown pool '" + pool_name + "'");
  }
  for (std::size_t n = 0; n < g.nonterminals.size(); ++n)
    if (g.nonterminals[n] == atom) {
      node.kind = GrammarSpec::Node::Kind::nonterminal;
      node.nonterminal = static_cast<int>(n);
      return node;
    }
  if (!g.vocab.contains(atom))
    fail(ErrorCode::BadConfig, where + ": '" + atom + "' is neither a token, pool nor rule head");
  node.kind = GrammarSpec::Node::Kind::token;
  node.token = g.vocab.id_of(atom);
  return node;
}

GrammarSpec::Node parse_template_expr(std::string_view text, std::size_t& pos,
                                      const GrammarSpec& g, const std::string& where) {
  auto skip = [&] { while (pos < text.size() && text[pos] == ' ') ++pos; };
  skip();
  if (pos >= text.size()) fail(ErrorCode::BadConfig, where + ": truncated template");
  if (text[pos] == '(') {
    ++pos;
    skip();
    std::size_t start = pos;
    while (pos < text.size() && text[pos] != ' ' && text[pos] != '(' && text[pos] != ')')
      ++pos;
    std::string head(text.substr(start, pos - start));
    if (!g.vocab.contains(head) || !g.vocab.is_parent(g.vocab.id_of(head)))
      fail(ErrorCode::BadConfig, where + ": head '" + head + "' must be a Parent token");
    GrammarSpec::Node node;
    node.kind = GrammarSpec::Node::Kind::token;
    node.token = g.vocab.id_of(head);
    skip();
    while (pos < text.size() && text[pos] != ')') {
      node.children.push_back(parse_template_expr(text, pos, g, where));
      skip();
    }
    if (pos >= text.size()) fail(ErrorCode::BadConfig, where + ": unbalanced template");
    ++pos;  // ')'
    return node;
  }
  std::size_t start = pos;
  while (pos < text.size() && text[pos] != ' ' && text[pos] != '(' && text[pos] != ')')
    ++pos;
  return resolve_atom(std::string(text.substr(start, pos - start)), g, where);
}

GrammarSpec::Node parse_template(const std::string& text, const GrammarSpec& g,
                                 const std::string& where) {
  std::size_t pos = 0;
  GrammarSpec::Node node = parse_template_expr(text, pos, g, where);
  while (pos < text.size() && text[pos] == ' ') ++pos;
  if (pos != text.size())
    fail(ErrorCode::BadConfig, where + ": trailing template text");
  return node;
}

constexpr int k_inf_height = std::numeric_limits<int>::max() / 4;

int template_height(const GrammarSpec::Node& node, const std::vector<int>& nt_height) {
  switch (node.kind) {
    case GrammarSpec::Node::Kind::pool:
      return 1;
    case GrammarSpec::Node::Kind::nonterminal:
      return nt_height[static_cast<std::size_t>(node.nonterminal)];
    case GrammarSpec::Node::Kind::token: {
      int h = 0;
      for (const auto& c : node.children)
        h = std::max(h, template_height(c, nt_height));
      return h + 1;
    }
  }
  return k_inf_height;
}

}  // namespace

GrammarSpec parse_grammar(std::istream& in, const std::string& origin) {
  GrammarSpec g;
  std::vector<RawRule> raw_rules;
  std::vector<std::pair<std::string, std::string>> raw_confusions;
  std::string start_name;
  std::string line;
  std::size_t lineno = 0;

  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::string where = origin + ":" + std::to_string(lineno);
    auto parts = split_ws(line);
    const std::string& kw = parts[0];
    if (kw == "start" && parts.size() == 2) {
      start_name = parts[1];
    } else if (kw == "token" && parts.size() == 3) {
      g.vocab.add(parts[1], token_kind_from_name(parts[2]));
    } else if (kw == "pool" && parts.size() == 4) {
      GrammarSpec::Pool pool;
      pool.name = parts[1];
      pool.size = std::stoi(parts[2]);
      if (parts[3] == "renamed")
        pool.renamed = true;
      else if (parts[3] == "fixed")
        pool.renamed = false;
      else
        fail(ErrorCode::BadConfig, where + ": pool must be 'renamed' or 'fixed'");
      if (pool.size < 1) fail(ErrorCode::BadConfig, where + ": empty pool");
      pool.first_id = static_cast<TokenId>(g.vocab.size());
      for (int i = 0; i < pool.size; ++i)
        g.vocab.add(pool.name + "_" + std::to_string(i), TokenKind::Leaf);
      g.pools.push_back(std::move(pool));
    } else if (kw == "confuse" && parts.size() == 3) {
      raw_confusions.emplace_back(parts[1], parts[2]);
    } else if (kw == "rule" && parts.size() >= 4) {
      RawRule rule;
      rule.lhs = parts[1];
      rule.weight = std::stod(parts[2]);
      if (rule.weight <= 0.0) fail(ErrorCode::BadConfig, where + ": weight must be > 0");
      auto tpl_at = line.find(parts[2], line.find(parts[1]) + parts[1].size());
      rule.template_text = line.substr(tpl_at + parts[2].size());
      rule.lineno = lineno;
      if (std::find(g.nonterminals.begin(), g.nonterminals.end(), rule.lhs) ==
          g.nonterminals.end())
        g.nonterminals.push_back(rule.lhs);
      raw_rules.push_back(std::move(rule));
    } else {
      fail(ErrorCode::BadConfig, where + ": unrecognized grammar line");
    }
  }

  g.vocab.add("<eos>", TokenKind::EndOfSiblings);
  g.vocab.add("<pad>", TokenKind::Pad);
  g.vocab.validate();

  g.rules_of.resize(g.nonterminals.size());
  for (const auto& raw : raw_rules) {
    std::string where = origin + ":" + std::to_string(raw.lineno);
    GrammarSpec::Rule rule;
    rule.lhs = static_cast<int>(
        std::find(g.nonterminals.begin(), g.nonterminals.end(), raw.lhs) -
        g.nonterminals.begin());
    rule.weight = raw.weight;
    rule.root = parse_template(raw.template_text, g, where);
    g.rules_of[static_cast<std::size_t>(rule.lhs)].push_back(g.rules.size());
    g.rules.push_back(std::move(rule));
  }

  g.confusions.assign(g.vocab.size(), {});
  for (const auto& [a, b] : raw_confusions) {
    TokenId ia = g.vocab.id_of(a);
    TokenId ib = g.vocab.id_of(b);
    if (g.vocab.kind(ia) != g.vocab.kind(ib))
      fail(ErrorCode::BadConfig, "confusable tokens must share a kind: " + a + " / " + b);
    g.confusions[static_cast<std::size_t>(ia)].push_back(ib);
    g.confusions[static_cast<std::size_t>(ib)].push_back(ia);
  }

  if (start_name.empty()) fail(ErrorCode::BadConfig, origin + ": missing start symbol");
  auto it = std::find(g.nonterminals.begin(), g.nonterminals.end(), start_name);
  if (it == g.nonterminals.end())
    fail(ErrorCode::BadConfig, origin + ": start symbol '" + start_name + "' has no rules");
  g.start = static_cast<int>(it - g.nonterminals.begin());

  // Min derivation heights; every nonterminal must reach a finite tree.
  std::vector<int> height(g.nonterminals.size(), k_inf_height);
  for (bool changed = true; changed;) {
    changed = false;
    for (auto& rule : g.rules) {
      int h = template_height(rule.root, height);
      if (h < height[static_cast<std::size_t>(rule.lhs)]) {
        height[static_cast<std::size_t>(rule.lhs)] = h;
        changed = true;
      }
    }
  }
  for (std::size_t n = 0; n < g.nonterminals.size(); ++n)
    if (height[n] >= k_inf_height)
      fail(ErrorCode::BadConfig,
           "nonterminal '" + g.nonterminals[n] + "' derives no finite tree");
  for (auto& rule : g.rules) rule.min_height = template_height(rule.root, height);
  return g;
}

GrammarSpec load_grammar(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open grammar file " + path);
  return parse_grammar(in, path);
}

namespace {

TreeNode expand_template(const GrammarSpec& g, const GrammarSpec::Node& node,
                         int budget, Rng& rng);

TreeNode expand_nonterminal(const GrammarSpec& g, int nt, int budget, Rng& rng) {
  std::vector<std::size_t> eligible;
  std::vector<double> weights;
  for (std::size_t r : g.rules_of[static_cast<std::size_t>(nt)]) {
    if (g.rules[r].min_height <= budget) {
      eligible.push_back(r);
      weights.push_back(g.rules[r].weight);
    }
  }
  if (eligible.empty())
    fail(ErrorCode::DepthExceeded,
         "no rule of '" + g.nonterminals[static_cast<std::size_t>(nt)] +
             "' fits in remaining depth");
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  const auto& rule = g.rules[eligible[pick(rng)]];
  return expand_template(g, rule.root, budget, rng);
}

TreeNode expand_template(const GrammarSpec& g, const GrammarSpec::Node& node,
                         int budget, Rng& rng) {
  switch (node.kind) {
    case GrammarSpec::Node::Kind::pool: {
      const auto& pool = g.pools[static_cast<std::size_t>(node.pool)];
      std::uniform_int_distribution<int> pick(0, pool.size - 1);
      return TreeNode{pool.first_id + pick(rng), {}};
    }
    case GrammarSpec::Node::Kind::nonterminal:
      return expand_nonterminal(g, node.nonterminal, budget, rng);
    case GrammarSpec::Node::Kind::token: {
      TreeNode out{node.token, {}};
      for (const auto& c : node.children)
        out.children.push_back(expand_template(g, c, budget - 1, rng));
      return out;
    }
  }
  fail(ErrorCode::BadConfig, "corrupt grammar template");
}

}  // namespace

TreeNode sample_tree(const GrammarSpec& grammar, Rng& rng, int max_depth) {
  return expand_nonterminal(grammar, grammar.start, max_depth, rng);
}

TreeNode rename_positionally(const TreeNode& tree, const GrammarSpec& grammar) {
  std::vector<std::unordered_map<TokenId, TokenId>> seen(grammar.pools.size());
  TreeNode out = tree;
  // Depth-first, left to right: the n-th distinct member of a renamed pool
  // becomes that pool's n-th token.
  std::vector<TreeNode*> stack{&out};
  while (!stack.empty()) {
    TreeNode* n = stack.back();
    stack.pop_back();
    int p = grammar.pool_of_token(n->token);
    if (p >= 0 && grammar.pools[static_cast<std::size_t>(p)].renamed) {
      auto& map = seen[static_cast<std::size_t>(p)];
      auto it = map.find(n->token);
      if (it == map.end()) {
        TokenId fresh = grammar.pools[static_cast<std::size_t>(p)].first_id +
                        static_cast<TokenId>(map.size());
        it = map.emplace(n->token, fresh).first;
      }
      n->token = it->second;
    }
    for (std::size_t i = n->children.size(); i-- > 0;) stack.push_back(&n->children[i]);
  }
  return out;
}

namespace {

std::vector<TreeNode*> all_nodes(TreeNode& root) {
  std::vector<TreeNode*> out;
  std::vector<TreeNode*> stack{&root};
  while (!stack.empty()) {
    TreeNode* n = stack.back();
    stack.pop_back();
    out.push_back(n);
    for (std::size_t i = n->children.size(); i-- > 0;) stack.push_back(&n->children[i]);
  }
  return out;
}

template <class T>
const T& pick_uniform(const std::vector<T>& items, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, items.size() - 1);
  return items[pick(rng)];
}

// One corruption application; false when the op has no applicable site.
bool apply_corruption(TreeNode& tree, CorruptionKind kind, const GrammarSpec& g,
                      Rng& rng) {
  auto nodes = all_nodes(tree);
  switch (kind) {
    case CorruptionKind::RelabelNode: {
      // Prefer declared confusion pairs; otherwise any same-kind retagging.
      std::vector<TreeNode*> sites;
      for (auto* n : nodes)
        if (!g.confusions[static_cast<std::size_t>(n->token)].empty()) sites.push_back(n);
      if (!sites.empty()) {
        TreeNode* site = pick_uniform(sites, rng);
        const auto& partners = g.confusions[static_cast<std::size_t>(site->token)];
        site->token = pick_uniform(partners, rng);
        return true;
      }
      TreeNode* site = pick_uniform(nodes, rng);
      TokenKind kind_wanted = g.vocab.kind(site->token);
      std::vector<TokenId> alternatives;
      for (TokenId t = 0; t < static_cast<TokenId>(g.vocab.size()); ++t)
        if (t != site->token && g.vocab.kind(t) == kind_wanted) alternatives.push_back(t);
      if (alternatives.empty()) return false;
      site->token = pick_uniform(alternatives, rng);
      return true;
    }
    case CorruptionKind::DeleteSubtreeChild: {
      std::vector<std::pair<TreeNode*, std::size_t>> sites;
      for (auto* n : nodes)
        for (std::size_t i = 0; i < n->children.size(); ++i) sites.emplace_back(n, i);
      if (sites.empty()) return false;
      auto [parent, idx] = pick_uniform(sites, rng);
      parent->children.erase(parent->children.begin() + static_cast<std::ptrdiff_t>(idx));
      return true;
    }
    case CorruptionKind::InsertRedundantParent: {
      std::vector<TokenId> parents;
      for (TokenId t = 0; t < static_cast<TokenId>(g.vocab.size()); ++t)
        if (g.vocab.is_parent(t)) parents.push_back(t);
      if (parents.empty()) return false;
      TreeNode* site = pick_uniform(nodes, rng);
      TreeNode wrapped{pick_uniform(parents, rng), {std::move(*site)}};
      *site = std::move(wrapped);
      return true;
    }
    case CorruptionKind::SwapSiblings: {
      std::vector<std::pair<TreeNode*, std::size_t>> sites;
      for (auto* n : nodes)
        for (std::size_t i = 0; i + 1 < n->children.size(); ++i)
          if (!(n->children[i] == n->children[i + 1])) sites.emplace_back(n, i);
      if (sites.empty()) return false;
      auto [parent, idx] = pick_uniform(sites, rng);
      std::swap(parent->children[idx], parent->children[idx + 1]);
      return true;
    }
    case CorruptionKind::InconsistentRename: {
      std::vector<TreeNode*> sites;
      for (auto* n : nodes) {
        int p = g.pool_of_token(n->token);
        if (p >= 0 && g.pools[static_cast<std::size_t>(p)].renamed &&
            g.pools[static_cast<std::size_t>(p)].size > 1)
          sites.push_back(n);
      }
      if (sites.empty()) return false;
      TreeNode* site = pick_uniform(sites, rng);
      const auto& pool = g.pools[static_cast<std::size_t>(g.pool_of_token(site->token))];
      std::uniform_int_distribution<int> pick(0, pool.size - 2);
      int offset = pick(rng);
      TokenId candidate = pool.first_id + offset;
      if (candidate >= site->token) candidate += 1;  // skip the current token
      site->token = candidate;
      return true;
    }
  }
  return false;
}

}  // namespace

const char* corruption_kind_name(CorruptionKind kind) {
  switch (kind) {
    case CorruptionKind::RelabelNode: return "relabel";
    case CorruptionKind::DeleteSubtreeChild: return "delete_child";
    case CorruptionKind::InsertRedundantParent: return "insert_parent";
    case CorruptionKind::SwapSiblings: return "swap_siblings";
    case CorruptionKind::InconsistentRename: return "inconsistent_rename";
  }
  return "?";
}

CorruptionKind corruption_kind_from_name(std::string_view name) {
  if (name == "relabel") return CorruptionKind::RelabelNode;
  if (name == "delete_child") return CorruptionKind::DeleteSubtreeChild;
  if (name == "insert_parent") return CorruptionKind::InsertRedundantParent;
  if (name == "swap_siblings") return CorruptionKind::SwapSiblings;
  if (name == "inconsistent_rename") return CorruptionKind::InconsistentRename;
  fail(ErrorCode::BadConfig, "unknown corruption '" + std::string(name) + "'");
}

std::pair<TreeNode, TreeNode> sample_pair(const GrammarSpec& grammar,
                                          std::span<const CorruptionOp> ops,
                                          Rng& rng, const SampleOptions& opt) {
  std::vector<double> weights;
  for (const auto& op : ops) weights.push_back(op.weight);

  for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
    TreeNode good;
    try {
      good = sample_tree(grammar, rng, opt.max_depth);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DepthExceeded) continue;
      throw;
    }
    if (static_cast<int>(good.node_count()) > opt.max_nodes) continue;
    good = rename_positionally(good, grammar);

    TreeNode bad = good;
    if (!ops.empty()) {
      std::discrete_distribution<std::size_t> pick_op(weights.begin(), weights.end());
      std::uniform_int_distribution<int> pick_count(opt.corrupt_min, opt.corrupt_max);
      int count = pick_count(rng);
      for (int c = 0; c < count; ++c) {
        for (int tries = 0; tries < 8; ++tries)
          if (apply_corruption(bad, ops[pick_op(rng)].kind, grammar, rng)) break;
      }
    }
    if (bad == good) continue;  // the dedup rule would drop it anyway
    if (static_cast<int>(bad.node_count()) > opt.max_nodes + 2) continue;
    return {std::move(bad), std::move(good)};
  }
  fail(ErrorCode::DataExhausted,
       "corruption produced no changed pair in " + std::to_string(opt.max_attempts) +
           " attempts");
}

namespace {

// Structural key: preorder token ids with arities.
std::string tree_key(const TreeNode& tree) {
  std::string key;
  std::vector<const TreeNode*> stack{&tree};
  while (!stack.empty()) {
    const TreeNode* n = stack.back();
    stack.pop_back();
    key += std::to_string(n->token);
    key += ':';
    key += std::to_string(n->children.size());
    key += ',';
    for (std::size_t i = n->children.size(); i-- > 0;) stack.push_back(&n->children[i]);
  }
  return key;
}

}  // namespace

std::vector<std::pair<TreeNode, std::vector<TreeNode>>> dedup(
    std::span<const std::pair<TreeNode, TreeNode>> pairs) {
  std::vector<std::pair<TreeNode, std::vector<TreeNode>>> out;
  std::unordered_map<std::string, std::size_t> bad_index;
  std::unordered_map<std::string, std::vector<std::string>> good_keys;
  for (const auto& [bad, good] : pairs) {
    if (bad == good) continue;
    std::string bkey = tree_key(bad);
    auto it = bad_index.find(bkey);
    if (it == bad_index.end()) {
      it = bad_index.emplace(bkey, out.size()).first;
      out.push_back({bad, {}});
    }
    std::string gkey = tree_key(good);
    auto& seen = good_keys[bkey];
    if (std::find(seen.begin(), seen.end(), gkey) == seen.end()) {
      seen.push_back(gkey);
      out[it->second].second.push_back(good);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// edit scoring
// ---------------------------------------------------------------------------

EditSet extract_edits(std::span<const TokenId> source, std::span<const TokenId> hyp) {
  const std::size_t n = source.size();
  const std::size_t m = hyp.size();
  std::vector<std::vector<int>> dp(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = 1; i <= n; ++i) dp[i][0] = static_cast<int>(i);
  for (std::size_t j = 1; j <= m; ++j) dp[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j) {
      int sub = dp[i - 1][j - 1] + (source[i - 1] == hyp[j - 1] ? 0 : 1);
      dp[i][j] = std::min({sub, dp[i - 1][j] + 1, dp[i][j - 1] + 1});
    }

  // Backtrace, preferring Match, then Substitute, Delete, Insert.
  enum class Op { match, substitute, del, ins };
  std::vector<Op> ops;
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && source[i - 1] == hyp[j - 1] && dp[i][j] == dp[i - 1][j - 1]) {
      ops.push_back(Op::match);
      --i;
      --j;
    } else if (i > 0 && j > 0 && dp[i][j] == dp[i - 1][j - 1] + 1) {
      ops.push_back(Op::substitute);
      --i;
      --j;
    } else if (i > 0 && dp[i][j] == dp[i - 1][j] + 1) {
      ops.push_back(Op::del);
      --i;
    } else {
      ops.push_back(Op::ins);
      --j;
    }
  }
  std::reverse(ops.begin(), ops.end());

  // Merge adjacent non-match runs into span edits.
  EditSet edits;
  std::size_t src_at = 0;
  std::size_t hyp_at = 0;
  for (std::size_t k = 0; k < ops.size();) {
    if (ops[k] == Op::match) {
      ++src_at;
      ++hyp_at;
      ++k;
      continue;
    }
    Edit edit;
    edit.start = src_at;
    while (k < ops.size() && ops[k] != Op::match) {
      switch (ops[k]) {
        case Op::substitute:
          edit.replacement.push_back(hyp[hyp_at]);
          ++src_at;
          ++hyp_at;
          break;
        case Op::del:
          ++src_at;
          break;
        case Op::ins:
          edit.replacement.push_back(hyp[hyp_at]);
          ++hyp_at;
          break;
        case Op::match:
          break;
      }
      ++k;
    }
    edit.end = src_at;
    edits.push_back(std::move(edit));
  }
  return edits;
}

std::vector<TokenId> apply_edits(std::span<const TokenId> source, const EditSet& edits) {
  std::vector<TokenId> out;
  std::size_t at = 0;
  for (const auto& edit : edits) {
    if (edit.start < at || edit.end < edit.start || edit.end > source.size())
      fail(ErrorCode::BadConfig, "edit spans must be sorted and non-overlapping");
    out.insert(out.end(), source.begin() + static_cast<std::ptrdiff_t>(at),
               source.begin() + static_cast<std::ptrdiff_t>(edit.start));
    out.insert(out.end(), edit.replacement.begin(), edit.replacement.end());
    at = edit.end;
  }
  out.insert(out.end(), source.begin() + static_cast<std::ptrdiff_t>(at), source.end());
  return out;
}

double f_beta(double precision, double recall, double beta) {
  double b2 = beta * beta;
  double denom = b2 * precision + recall;
  if (denom == 0.0) return 0.0;
  return (1.0 + b2) * precision * recall / denom;
}

namespace {

struct SentenceCounts {
  long long matches;
  long long system_total;
  long long reference_total;
};

double precision_of(const SentenceCounts& c) {
  if (c.system_total == 0) return c.reference_total == 0 ? 1.0 : 0.0;
  return double(c.matches) / double(c.system_total);
}

double recall_of(const SentenceCounts& c) {
  if (c.reference_total == 0) return 1.0;
  return double(c.matches) / double(c.reference_total);
}

SentenceCounts count_against(const EditSet& system, const EditSet& reference) {
  long long matches = 0;
  for (const auto& edit : system)
    if (std::find(reference.begin(), reference.end(), edit) != reference.end())
      ++matches;
  return {matches, static_cast<long long>(system.size()),
          static_cast<long long>(reference.size())};
}

}  // namespace

ScoreReport score_edits(std::span<const SentenceEdits> sentences) {
  ScoreCounts total;
  for (const auto& sentence : sentences) {
    if (sentence.references.empty())
      fail(ErrorCode::BadConfig, "every sentence needs at least one reference");
    SentenceCounts best{};
    double best_f = -1.0;
    for (const auto& ref : sentence.references) {
      SentenceCounts c = count_against(sentence.system, ref);
      double f = f_beta(precision_of(c), recall_of(c));
      if (f > best_f) {
        best_f = f;
        best = c;
      }
    }
    total.matches += best.matches;
    total.system_total += best.system_total;
    total.reference_total += best.reference_total;
  }
  ScoreReport report;
  report.counts = total;
  SentenceCounts as_counts{total.matches, total.system_total, total.reference_total};
  report.precision = precision_of(as_counts);
  report.recall = recall_of(as_counts);
  report.f_half = f_beta(report.precision, report.recall);
  return report;
}

bool exact_match(const TreeNode& hyp, std::span<const TreeNode> refs) {
  for (const auto& ref : refs)
    if (hyp == ref) return true;
  return false;
}

}  // namespace treeformer
