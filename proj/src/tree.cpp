#include "treeformer/tree.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <utility>

namespace treeformer {

const char* token_kind_name(TokenKind kind) {
  switch (kind) {
    case TokenKind::Parent: return "Parent";
    case TokenKind::Leaf: return "Leaf";
    case TokenKind::EndOfSiblings: return "EndOfSiblings";
    case TokenKind::Pad: return "Pad";
  }
  return "?";
}

TokenKind token_kind_from_name(std::string_view name) {
  if (name == "Parent") return TokenKind::Parent;
  if (name == "Leaf") return TokenKind::Leaf;
  if (name == "EndOfSiblings") return TokenKind::EndOfSiblings;
  if (name == "Pad") return TokenKind::Pad;
  fail(ErrorCode::BadConfig, "unknown token kind '" + std::string(name) + "'");
}

Vocabulary::Vocabulary(std::vector<Entry> entries) {
  for (auto& e : entries) add(std::move(e.name), e.kind);
  validate();
}

TokenId Vocabulary::add(std::string name, TokenKind kind) {
  if (by_name_.contains(name))
    fail(ErrorCode::BadConfig, "duplicate vocabulary name '" + name + "'");
  TokenId id = static_cast<TokenId>(entries_.size());
  by_name_.emplace(name, id);
  entries_.push_back(Entry{std::move(name), kind});
  return id;
}

void Vocabulary::validate() const {
  int eos = 0;
  int pad = 0;
  for (const auto& e : entries_) {
    if (e.kind == TokenKind::EndOfSiblings) ++eos;
    if (e.kind == TokenKind::Pad) ++pad;
  }
  if (eos != 1 || pad != 1)
    fail(ErrorCode::BadConfig,
         "vocabulary needs exactly one EndOfSiblings and one Pad entry, got " +
             std::to_string(eos) + "/" + std::to_string(pad));
}

const Vocabulary::Entry& Vocabulary::entry(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= entries_.size())
    fail(ErrorCode::TokenOutOfRange,
         "token id " + std::to_string(id) + " outside vocabulary of size " +
             std::to_string(entries_.size()));
  return entries_[static_cast<std::size_t>(id)];
}

bool Vocabulary::contains(std::string_view name) const {
  return by_name_.contains(std::string(name));
}

TokenId Vocabulary::id_of(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end())
    fail(ErrorCode::UnknownToken, "'" + std::string(name) + "' not in vocabulary");
  return it->second;
}

TokenId Vocabulary::eos_id() const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].kind == TokenKind::EndOfSiblings) return static_cast<TokenId>(i);
  fail(ErrorCode::BadConfig, "vocabulary has no EndOfSiblings entry");
}

TokenId Vocabulary::pad_id() const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].kind == TokenKind::Pad) return static_cast<TokenId>(i);
  fail(ErrorCode::BadConfig, "vocabulary has no Pad entry");
}

Vocabulary Vocabulary::parse(std::istream& in, const std::string& origin) {
  Vocabulary vocab;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      fail(ErrorCode::SyntaxError,
           origin + ":" + std::to_string(lineno) + ": expected name<TAB>kind");
    vocab.add(line.substr(0, tab), token_kind_from_name(line.substr(tab + 1)));
  }
  vocab.validate();
  return vocab;
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open vocabulary file " + path);
  return parse(in, path);
}

void Vocabulary::write(std::ostream& out) const {
  for (const auto& e : entries_)
    out << e.name << '\t' << token_kind_name(e.kind) << '\n';
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write vocabulary file " + path);
  write(out);
}

bool TreeNode::operator==(const TreeNode& other) const {
  return token == other.token && children == other.children;
}

std::size_t TreeNode::node_count() const {
  std::size_t n = 1;
  for (const auto& c : children) n += c.node_count();
  return n;
}

int TreeNode::depth() const {
  int d = 0;
  for (const auto& c : children) d = std::max(d, c.depth());
  return d + 1;
}

DfTree linearize(const TreeNode& tree) {
  DfTree df;
  df.tokens.reserve(tree.node_count());
  // Explicit stack: (node, parent position, left-sibling position).
  struct Item {
    const TreeNode* node;
    std::int32_t parent;
    std::int32_t sibling;
  };
  std::vector<Item> stack;
  stack.push_back({&tree, k_no_index, k_no_index});
  while (!stack.empty()) {
    Item item = stack.back();
    stack.pop_back();
    auto pos = static_cast<std::int32_t>(df.tokens.size());
    df.tokens.push_back(item.node->token);
    df.parent_idx.push_back(item.parent);
    df.sibling_idx.push_back(item.sibling);
    // Children are pushed in reverse so the leftmost is visited first; its
    // sibling slot is patched as the walk discovers emission order.
    const auto& kids = item.node->children;
    for (std::size_t i = kids.size(); i-- > 0;)
      stack.push_back({&kids[i], pos, k_no_index});
    // Left-sibling links cannot be precomputed here because a sibling's
    // position is only known once its whole left subtree is emitted, so we
    // fix them up below.
  }
  // Recover sibling links: for each parent, children appear in preorder as
  // the positions whose parent_idx equals that parent; chain them in order.
  std::vector<std::int32_t> last_child(df.size(), k_no_index);
  std::int32_t last_root = k_no_index;
  for (std::size_t t = 0; t < df.size(); ++t) {
    std::int32_t p = df.parent_idx[t];
    if (p == k_no_index) {
      df.sibling_idx[t] = last_root;
      last_root = static_cast<std::int32_t>(t);
    } else {
      df.sibling_idx[t] = last_child[static_cast<std::size_t>(p)];
      last_child[static_cast<std::size_t>(p)] = static_cast<std::int32_t>(t);
    }
  }
  return df;
}

TreeNode delinearize(const DfTree& df, const Vocabulary& vocab) {
  const std::size_t n = df.size();
  if (df.parent_idx.size() != n || df.sibling_idx.size() != n)
    fail(ErrorCode::MalformedTree, "index lists have inconsistent lengths");
  if (n == 0) fail(ErrorCode::MalformedTree, "empty tree");
  if (df.parent_idx[0] != k_no_index || df.sibling_idx[0] != k_no_index)
    fail(ErrorCode::MalformedTree, "position 0 must be the root");

  std::vector<TreeNode> nodes(n);
  std::vector<std::int32_t> last_child(n, k_no_index);
  for (std::size_t t = 0; t < n; ++t) {
    nodes[t].token = df.tokens[t];
    if (vocab.kind(df.tokens[t]) != TokenKind::Parent &&
        vocab.kind(df.tokens[t]) != TokenKind::Leaf)
      fail(ErrorCode::MalformedTree,
           "token '" + vocab.name(df.tokens[t]) + "' cannot be a tree node");
    if (t == 0) continue;
    std::int32_t p = df.parent_idx[t];
    if (p == k_no_index || p >= static_cast<std::int32_t>(t))
      fail(ErrorCode::MalformedTree,
           "parent_idx[" + std::to_string(t) + "] must name an earlier node");
    if (!vocab.is_parent(df.tokens[static_cast<std::size_t>(p)]))
      fail(ErrorCode::MalformedTree,
           "parent_idx[" + std::to_string(t) + "] names a non-Parent token");
    std::int32_t s = df.sibling_idx[t];
    if (s != last_child[static_cast<std::size_t>(p)])
      fail(ErrorCode::MalformedTree,
           "sibling_idx[" + std::to_string(t) + "] disagrees with parent links");
    if (s != k_no_index &&
        df.parent_idx[static_cast<std::size_t>(s)] != p)
      fail(ErrorCode::MalformedTree, "sibling and parent links disagree");
    last_child[static_cast<std::size_t>(p)] = static_cast<std::int32_t>(t);
  }
  // Attach children bottom-up; preorder guarantees every child index is
  // greater than its parent's, so a reverse sweep moves each completed node.
  for (std::size_t t = n; t-- > 1;) {
    auto p = static_cast<std::size_t>(df.parent_idx[t]);
    nodes[p].children.insert(nodes[p].children.begin(), std::move(nodes[t]));
  }
  // Validate: the input must be exactly the preorder walk of the result.
  TreeNode root = std::move(nodes[0]);
  if (linearize(root) != df)
    fail(ErrorCode::MalformedTree, "index lists are not a preorder walk");
  return root;
}

namespace {

struct SexprLexer {
  std::string_view text;
  std::size_t pos = 0;

  void skip_space() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }
  bool done() {
    skip_space();
    return pos >= text.size();
  }
  char peek() {
    skip_space();
    return pos < text.size() ? text[pos] : '\0';
  }
  std::string_view next_atom() {
    skip_space();
    std::size_t start = pos;
    while (pos < text.size() && text[pos] != ' ' && text[pos] != '\t' &&
           text[pos] != '(' && text[pos] != ')')
      ++pos;
    return text.substr(start, pos - start);
  }
};

TreeNode parse_expr(SexprLexer& lex, const Vocabulary& vocab) {
  if (lex.done()) fail(ErrorCode::SyntaxError, "unexpected end of expression");
  if (lex.peek() == ')') fail(ErrorCode::SyntaxError, "unexpected ')'");
  if (lex.peek() == '(') {
    ++lex.pos;
    if (lex.peek() == '(' || lex.peek() == ')')
      fail(ErrorCode::SyntaxError, "missing head symbol after '('");
    auto head = lex.next_atom();
    TokenId head_id = vocab.id_of(head);
    if (!vocab.is_parent(head_id))
      fail(ErrorCode::KindMismatch,
           "'" + std::string(head) + "' is not Parent-kind but used as a head");
    TreeNode node{head_id, {}};
    while (lex.peek() != ')') {
      if (lex.done()) fail(ErrorCode::SyntaxError, "unbalanced parentheses");
      node.children.push_back(parse_expr(lex, vocab));
    }
    ++lex.pos;  // consume ')'
    return node;
  }
  auto atom = lex.next_atom();
  TokenId id = vocab.id_of(atom);
  if (!vocab.is_leaf(id))
    fail(ErrorCode::KindMismatch,
         "'" + std::string(atom) + "' is not Leaf-kind but used as an atom");
  return TreeNode{id, {}};
}

}  // namespace

TreeNode parse_sexpr(std::string_view text, const Vocabulary& vocab) {
  SexprLexer lex{text};
  TreeNode tree = parse_expr(lex, vocab);
  if (!lex.done())
    fail(ErrorCode::SyntaxError, "trailing characters after expression");
  return tree;
}

namespace {

void write_sexpr(const TreeNode& tree, const Vocabulary& vocab, std::string& out) {
  if (vocab.is_parent(tree.token)) {
    out += '(';
    out += vocab.name(tree.token);
    for (const auto& c : tree.children) {
      out += ' ';
      write_sexpr(c, vocab, out);
    }
    out += ')';
  } else {
    out += vocab.name(tree.token);
  }
}

}  // namespace

std::string to_sexpr(const TreeNode& tree, const Vocabulary& vocab) {
  std::string out;
  write_sexpr(tree, vocab, out);
  return out;
}

std::vector<TreeNode> load_trees(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open tree file " + path);
  std::vector<TreeNode> trees;
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    trees.push_back(parse_sexpr(line, vocab));
  }
  return trees;
}

void save_trees(const std::string& path, std::span<const TreeNode> trees,
                const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write tree file " + path);
  for (const auto& t : trees) out << to_sexpr(t, vocab) << '\n';
}

std::vector<TokenId> leaf_tokens(const TreeNode& tree, const Vocabulary& vocab) {
  std::vector<TokenId> out;
  std::vector<const TreeNode*> stack{&tree};
  while (!stack.empty()) {
    const TreeNode* n = stack.back();
    stack.pop_back();
    // Childless Parent nodes contribute no leaf text.
    if (n->children.empty() && vocab.is_leaf(n->token)) out.push_back(n->token);
    for (std::size_t i = n->children.size(); i-- > 0;)
      stack.push_back(&n->children[i]);
  }
  return out;
}

}  // namespace treeformer
