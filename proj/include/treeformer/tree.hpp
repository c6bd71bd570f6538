#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "treeformer/errors.hpp"

namespace treeformer {

using TokenId = std::int32_t;

// Sentinel for "no parent" / "no left sibling"; kept outside [0, T) so index
// columns stay homogeneous int vectors. Serialized as -1 in text formats.
inline constexpr std::int32_t k_no_index = -1;

enum class TokenKind : std::uint8_t { Parent, Leaf, EndOfSiblings, Pad };

const char* token_kind_name(TokenKind kind);
TokenKind token_kind_from_name(std::string_view name);

// Token inventory. The id of an entry is its position in `entries`. Exactly
// one EndOfSiblings and exactly one Pad entry must be present.
class Vocabulary {
 public:
  struct Entry {
    std::string name;
    TokenKind kind;
  };

  Vocabulary() = default;
  explicit Vocabulary(std::vector<Entry> entries);

  TokenId add(std::string name, TokenKind kind);
  void validate() const;

  std::size_t size() const { return entries_.size(); }
  const Entry& entry(TokenId id) const;
  TokenKind kind(TokenId id) const { return entry(id).kind; }
  const std::string& name(TokenId id) const { return entry(id).name; }
  bool contains(std::string_view name) const;
  TokenId id_of(std::string_view name) const;  // UnknownToken if absent

  TokenId eos_id() const;
  TokenId pad_id() const;

  bool is_parent(TokenId id) const { return kind(id) == TokenKind::Parent; }
  bool is_leaf(TokenId id) const { return kind(id) == TokenKind::Leaf; }

  // "name<TAB>kind" per line; the line number is the token id.
  static Vocabulary load(const std::string& path);
  void save(const std::string& path) const;
  static Vocabulary parse(std::istream& in, const std::string& origin);
  void write(std::ostream& out) const;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, TokenId> by_name_;
};

// Ordered tree with tokens at every node. Only Parent-kind tokens may carry
// children; a childless Parent node is legal.
struct TreeNode {
  TokenId token = 0;
  std::vector<TreeNode> children;

  bool operator==(const TreeNode& other) const;
  std::size_t node_count() const;
  int depth() const;  // single node has depth 1
};

// A tree flattened in depth-first preorder. parent_idx[t] / sibling_idx[t]
// point at earlier positions (or k_no_index); position 0 is the root.
struct DfTree {
  std::vector<TokenId> tokens;
  std::vector<std::int32_t> parent_idx;
  std::vector<std::int32_t> sibling_idx;

  std::size_t size() const { return tokens.size(); }
  bool operator==(const DfTree& other) const = default;
};

DfTree linearize(const TreeNode& tree);

// Inverse of linearize; throws MalformedTree when the index lists cannot be
// the preorder walk of any tree over `vocab`.
TreeNode delinearize(const DfTree& df, const Vocabulary& vocab);

// S-expression text form: "(head child ...)" with Parent-kind heads; a bare
// atom is a single Leaf node, "(P)" a childless parent.
TreeNode parse_sexpr(std::string_view text, const Vocabulary& vocab);
std::string to_sexpr(const TreeNode& tree, const Vocabulary& vocab);

// One s-expression per line; '#' starts a comment line, blank lines skipped.
std::vector<TreeNode> load_trees(const std::string& path, const Vocabulary& vocab);
void save_trees(const std::string& path, std::span<const TreeNode> trees,
                const Vocabulary& vocab);

// Leaf tokens in depth-first order (the detokenized "source text").
std::vector<TokenId> leaf_tokens(const TreeNode& tree, const Vocabulary& vocab);

}  // namespace treeformer
