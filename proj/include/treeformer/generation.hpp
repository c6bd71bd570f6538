#pragma once

#include <cstdint>
#include <vector>

#include "treeformer/tree.hpp"

namespace treeformer {

// One entry per generated token. Node tokens and EndOfSiblings tokens are
// both steps: every step is a loss/score position and an attention position.
// parent_step/sibling_step point at the steps where the surrounding nodes
// were emitted (k_no_index when absent), so they always reference strictly
// earlier steps. node_index maps node steps to their depth-first position in
// the produced tree; EndOfSiblings steps carry k_no_index there.
struct DecodeStream {
  std::vector<TokenId> tokens;
  std::vector<std::int32_t> parent_step;
  std::vector<std::int32_t> sibling_step;
  std::vector<std::int32_t> node_index;

  std::size_t size() const { return tokens.size(); }
};

struct GenerationLimits {
  int max_nodes = 512;
  int max_depth = 64;
};

// Depth-first structure generator: leaves extend the current sibling run,
// parents open a new run, EndOfSiblings closes one. Closing the root run
// terminates generation. The root run holds exactly one node.
class GenerationState {
 public:
  explicit GenerationState(const Vocabulary& vocab,
                           GenerationLimits limits = GenerationLimits{});

  // Applies one token. Throws Terminated after termination, IllegalToken for
  // structurally impossible tokens, LimitExceeded when a node token would
  // break the node or depth budget.
  void advance(TokenId token);

  bool is_legal(TokenId token) const;
  // True if some node token is currently blocked only by the limits.
  bool limits_block_nodes() const;

  bool terminated() const { return terminated_; }
  int node_count() const { return static_cast<int>(produced_.size()); }
  int depth() const { return static_cast<int>(frames_.size()); }
  const DecodeStream& stream() const { return stream_; }

  // Context the next step would be generated under.
  std::int32_t next_parent_step() const { return frames_.back().parent_step; }
  std::int32_t next_sibling_step() const { return frames_.back().sibling_step; }

  // The produced prefix as a DfTree (full tree once terminated).
  DfTree tree_prefix() const;

 private:
  struct Frame {
    std::int32_t parent_step;    // step that emitted this run's parent
    std::int32_t parent_node;    // node index of that parent
    std::int32_t sibling_step;   // step of the last node emitted in this run
    std::int32_t sibling_node;
  };

  const Vocabulary* vocab_;
  GenerationLimits limits_;
  std::vector<Frame> frames_;
  DecodeStream stream_;
  std::vector<std::int32_t> produced_parent_;   // per node
  std::vector<std::int32_t> produced_sibling_;  // per node
  std::vector<TokenId> produced_;
  bool terminated_ = false;
};

// The token stream that generates `tree`: preorder node tokens with an
// EndOfSiblings after each child run and one closing the root run.
std::vector<TokenId> stream_tokens(const DfTree& tree, const Vocabulary& vocab);

// Teacher-forcing view of a gold tree: the full DecodeStream produced by
// replaying stream_tokens() through GenerationState.
DecodeStream teacher_stream(const DfTree& tree, const Vocabulary& vocab);

}  // namespace treeformer
