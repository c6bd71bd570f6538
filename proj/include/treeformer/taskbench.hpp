#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "treeformer/rng.hpp"
#include "treeformer/tree.hpp"

namespace treeformer {

// Weighted tree grammar for the synthetic correction tasks. Declarations
// (tokens, pools) define the vocabulary; rules expand nonterminals into tree
// templates. Pools are leaf families (variables, literal characters);
// `renamed` pools get positional renaming so variable identity is first-use
// order, not the sampled id.
struct GrammarSpec {
  struct Pool {
    std::string name;
    int size = 0;
    bool renamed = false;
    TokenId first_id = 0;  // members are first_id .. first_id+size-1
  };

  struct Node {
    enum class Kind { token, nonterminal, pool };
    Kind kind = Kind::token;
    TokenId token = 0;
    int nonterminal = -1;
    int pool = -1;
    std::vector<Node> children;
  };

  struct Rule {
    int lhs = -1;
    double weight = 1.0;
    Node root;
    int min_height = 0;
  };

  Vocabulary vocab;
  std::vector<std::string> nonterminals;
  std::vector<Pool> pools;
  std::vector<Rule> rules;
  std::vector<std::vector<std::size_t>> rules_of;  // by nonterminal
  std::vector<std::vector<TokenId>> confusions;    // by token id
  int start = -1;

  int pool_of_token(TokenId id) const;  // -1 when not a pool member
};

GrammarSpec parse_grammar(std::istream& in, const std::string& origin);
GrammarSpec load_grammar(const std::string& path);

struct SampleOptions {
  int max_depth = 8;
  int max_nodes = 25;
  int corrupt_min = 1;
  int corrupt_max = 1;
  int max_attempts = 64;
};

TreeNode sample_tree(const GrammarSpec& grammar, Rng& rng, int max_depth);

enum class CorruptionKind {
  RelabelNode,
  DeleteSubtreeChild,
  InsertRedundantParent,
  SwapSiblings,
  InconsistentRename,
};

const char* corruption_kind_name(CorruptionKind kind);
CorruptionKind corruption_kind_from_name(std::string_view name);

struct CorruptionOp {
  CorruptionKind kind;
  double weight = 1.0;
};

// Samples a good tree from the grammar, renames variables positionally, and
// corrupts a copy into the bad source. Guarantees bad != good; throws
// DataExhausted when the configured ops cannot change the tree and
// DepthExceeded when sampling keeps busting the limits.
std::pair<TreeNode, TreeNode> sample_pair(const GrammarSpec& grammar,
                                          std::span<const CorruptionOp> ops,
                                          Rng& rng, const SampleOptions& opt);

// First-use-order renaming of every `renamed` pool's members.
TreeNode rename_positionally(const TreeNode& tree, const GrammarSpec& grammar);

// Drops pairs with bad == good, merges identical bads, dedupes their goods;
// first-appearance order throughout.
std::vector<std::pair<TreeNode, std::vector<TreeNode>>> dedup(
    std::span<const std::pair<TreeNode, TreeNode>> pairs);

// ---------------------------------------------------------------------------
// edit scoring
// ---------------------------------------------------------------------------

// Contiguous source-span replacement over a token sequence.
struct Edit {
  std::size_t start = 0;
  std::size_t end = 0;  // half-open [start, end)
  std::vector<TokenId> replacement;
  bool operator==(const Edit&) const = default;
};
using EditSet = std::vector<Edit>;

// Minimal Levenshtein alignment (unit costs, ties prefer Match, then
// Substitute, Delete, Insert), adjacent non-match operations merged into one
// span edit.
EditSet extract_edits(std::span<const TokenId> source, std::span<const TokenId> hyp);
std::vector<TokenId> apply_edits(std::span<const TokenId> source, const EditSet& edits);

// F_beta with the usual beta=0.5 precision bias; 0 when the denominator is 0.
double f_beta(double precision, double recall, double beta = 0.5);

struct ScoreCounts {
  long long matches = 0;
  long long system_total = 0;
  long long reference_total = 0;
};

struct ScoreReport {
  double precision = 0.0;
  double recall = 0.0;
  double f_half = 0.0;
  ScoreCounts counts;
};

struct SentenceEdits {
  EditSet system;
  std::vector<EditSet> references;  // at least one
};

// Per sentence the reference maximizing sentence-level F0.5 is selected;
// match/system/reference counts aggregate over the corpus before the final
// P, R, F. Empty system edits score P = 1 against an empty reference and 0
// otherwise.
ScoreReport score_edits(std::span<const SentenceEdits> sentences);

bool exact_match(const TreeNode& hyp, std::span<const TreeNode> refs);

}  // namespace treeformer
