#include "treeformer/generation.hpp"

#include <string>

namespace treeformer {

GenerationState::GenerationState(const Vocabulary& vocab, GenerationLimits limits)
    : vocab_(&vocab), limits_(limits) {
  frames_.push_back(Frame{k_no_index, k_no_index, k_no_index, k_no_index});
}

bool GenerationState::is_legal(TokenId token) const {
  if (terminated_) return false;
  if (token < 0 || static_cast<std::size_t>(token) >= vocab_->size()) return false;
  switch (vocab_->kind(token)) {
    case TokenKind::Pad:
      return false;
    case TokenKind::EndOfSiblings:
      // Closing the root run before a root exists would yield an empty tree.
      return !(frames_.size() == 1 && produced_.empty());
    case TokenKind::Leaf:
    case TokenKind::Parent: {
      // The root run holds exactly one node.
      if (frames_.size() == 1 && frames_[0].sibling_step != k_no_index) return false;
      if (node_count() + 1 > limits_.max_nodes) return false;
      if (vocab_->kind(token) == TokenKind::Parent &&
          static_cast<int>(frames_.size()) + 1 > limits_.max_depth)
        return false;
      return true;
    }
  }
  return false;
}

bool GenerationState::limits_block_nodes() const {
  if (terminated_) return false;
  if (frames_.size() == 1 && frames_[0].sibling_step != k_no_index) return false;
  return node_count() + 1 > limits_.max_nodes ||
         static_cast<int>(frames_.size()) + 1 > limits_.max_depth;
}

void GenerationState::advance(TokenId token) {
  if (terminated_) fail(ErrorCode::Terminated, "generation already terminated");
  TokenKind kind = vocab_->kind(token);  // throws TokenOutOfRange
  if (kind == TokenKind::Pad)
    fail(ErrorCode::IllegalToken, "Pad can never be generated");

  Frame& frame = frames_.back();
  auto step = static_cast<std::int32_t>(stream_.size());

  if (kind == TokenKind::EndOfSiblings) {
    if (frames_.size() == 1 && produced_.empty())
      fail(ErrorCode::IllegalToken, "cannot close the root run before the root");
    stream_.tokens.push_back(token);
    stream_.parent_step.push_back(frame.parent_step);
    stream_.sibling_step.push_back(frame.sibling_step);
    stream_.node_index.push_back(k_no_index);
    frames_.pop_back();
    if (frames_.empty()) terminated_ = true;
    return;
  }

  if (frames_.size() == 1 && frames_[0].sibling_step != k_no_index)
    fail(ErrorCode::IllegalToken, "the root run holds exactly one node");
  if (node_count() + 1 > limits_.max_nodes)
    fail(ErrorCode::LimitExceeded,
         "node limit " + std::to_string(limits_.max_nodes) + " reached");
  if (kind == TokenKind::Parent &&
      static_cast<int>(frames_.size()) + 1 > limits_.max_depth)
    fail(ErrorCode::LimitExceeded,
         "depth limit " + std::to_string(limits_.max_depth) + " reached");

  auto node = static_cast<std::int32_t>(produced_.size());
  stream_.tokens.push_back(token);
  stream_.parent_step.push_back(frame.parent_step);
  stream_.sibling_step.push_back(frame.sibling_step);
  stream_.node_index.push_back(node);
  produced_.push_back(token);
  produced_parent_.push_back(frame.parent_node);
  produced_sibling_.push_back(frame.sibling_node);
  frame.sibling_step = step;
  frame.sibling_node = node;
  if (kind == TokenKind::Parent)
    frames_.push_back(Frame{step, node, k_no_index, k_no_index});
}

DfTree GenerationState::tree_prefix() const {
  DfTree df;
  df.tokens = produced_;
  df.parent_idx = produced_parent_;
  df.sibling_idx = produced_sibling_;
  return df;
}

std::vector<TokenId> stream_tokens(const DfTree& tree, const Vocabulary& vocab) {
  const TokenId eos = vocab.eos_id();
  std::vector<TokenId> out;
  out.reserve(tree.size() * 2);
  // Children of each position, in preorder.
  std::vector<std::vector<std::int32_t>> children(tree.size());
  for (std::size_t t = 1; t < tree.size(); ++t)
    children[static_cast<std::size_t>(tree.parent_idx[t])].push_back(
        static_cast<std::int32_t>(t));

  struct Item {
    std::int32_t pos;  // k_no_index marks an EndOfSiblings emission
  };
  std::vector<Item> stack;
  stack.push_back({k_no_index});
  if (!tree.tokens.empty()) stack.push_back({0});
  while (!stack.empty()) {
    Item item = stack.back();
    stack.pop_back();
    if (item.pos == k_no_index) {
      out.push_back(eos);
      continue;
    }
    out.push_back(tree.tokens[static_cast<std::size_t>(item.pos)]);
    if (vocab.is_parent(tree.tokens[static_cast<std::size_t>(item.pos)])) {
      stack.push_back({k_no_index});
      const auto& kids = children[static_cast<std::size_t>(item.pos)];
      for (std::size_t i = kids.size(); i-- > 0;) stack.push_back({kids[i]});
    }
  }
  return out;
}

DecodeStream teacher_stream(const DfTree& tree, const Vocabulary& vocab) {
  GenerationLimits unbounded;
  unbounded.max_nodes = static_cast<int>(tree.size());
  unbounded.max_depth = static_cast<int>(tree.size()) + 1;
  GenerationState state(vocab, unbounded);
  for (TokenId tok : stream_tokens(tree, vocab)) state.advance(tok);
  if (!state.terminated() || !(state.tree_prefix() == tree))
    fail(ErrorCode::MalformedTree, "tree does not replay through generation");
  return state.stream();
}

}  // namespace treeformer
