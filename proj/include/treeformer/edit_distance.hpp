#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "treeformer/tree.hpp"

namespace treeformer {

// Minimal unit-cost edit script between ordered labeled trees, with the node
// mapping. Indices are depth-first preorder positions (forests concatenate
// their trees' preorders).
struct EditScript {
  enum class Tag { Match, Relabel, Insert, Delete };

  struct MappedPair {
    std::int32_t source;
    std::int32_t target;
    Tag tag;  // Match or Relabel
  };

  int distance = 0;
  std::vector<MappedPair> mapped;      // sorted by source index
  std::vector<std::int32_t> deleted;   // unmapped source nodes
  std::vector<std::int32_t> inserted;  // unmapped target nodes
};

struct EditDistanceLimits {
  // SizeLimit fires when |a| * |b| exceeds this.
  std::size_t max_node_product = 1'000'000;
};

// Zhang-Shasha dynamic program over postorder keyroots, unit costs.
// Deterministic tie-breaking: mapping a pair is preferred over deleting,
// deleting over inserting, walking from the forest ends backwards.
EditScript tree_edit_distance(const TreeNode& a, const TreeNode& b,
                              EditDistanceLimits limits = {});
EditScript forest_edit_distance(std::span<const TreeNode> a,
                                std::span<const TreeNode> b,
                                EditDistanceLimits limits = {});

// Loss weights over the target's depth-first node order: 3 where the node is
// Inserted or Relabeled by the minimal script, 1 otherwise.
struct EditLabeling {
  std::vector<double> lambda;
};

inline constexpr double k_edit_weight_default = 3.0;

EditLabeling label_edits(const TreeNode& source, const TreeNode& target,
                         double edit_weight = k_edit_weight_default,
                         EditDistanceLimits limits = {});
EditLabeling label_edits(std::span<const TreeNode> source, const TreeNode& target,
                         double edit_weight = k_edit_weight_default,
                         EditDistanceLimits limits = {});

}  // namespace treeformer
