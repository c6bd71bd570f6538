#include "treeformer/edit_distance.hpp"

#include <algorithm>
#include <string>

namespace treeformer {

namespace {

constexpr TokenId k_virtual_label = -1;

// Postorder view of a forest under a shared virtual root. The virtual root
// is the last postorder node; its label matches only the other side's
// virtual root, so the optimal script always maps the two and the wrapper
// adds cost zero.
struct Indexed {
  std::vector<TokenId> label;        // by postorder index
  std::vector<int> lml;              // leftmost leaf descendant, postorder
  std::vector<int> keyroots;         // ascending
  std::vector<std::int32_t> preorder;  // postorder -> forest preorder, -1 for root
  int size() const { return static_cast<int>(label.size()); }
};

void index_subtree(const TreeNode& node, std::int32_t& next_pre, Indexed& out,
                   std::vector<int>& lml_stack) {
  std::int32_t my_pre = next_pre++;
  int first_leaf = -1;
  for (const auto& child : node.children) {
    index_subtree(child, next_pre, out, lml_stack);
    if (first_leaf == -1) first_leaf = lml_stack.back();
    lml_stack.pop_back();
  }
  int my_post = static_cast<int>(out.label.size());
  out.label.push_back(node.token);
  out.preorder.push_back(my_pre);
  out.lml.push_back(first_leaf == -1 ? my_post : first_leaf);
  lml_stack.push_back(first_leaf == -1 ? my_post : first_leaf);
}

Indexed index_forest(std::span<const TreeNode> forest) {
  Indexed out;
  std::vector<int> lml_stack;
  std::int32_t next_pre = 0;
  int first_leaf = -1;
  for (const auto& tree : forest) {
    index_subtree(tree, next_pre, out, lml_stack);
    if (first_leaf == -1) first_leaf = lml_stack.back();
    lml_stack.pop_back();
  }
  int root_post = static_cast<int>(out.label.size());
  out.label.push_back(k_virtual_label);
  out.preorder.push_back(k_no_index);
  out.lml.push_back(first_leaf == -1 ? root_post : first_leaf);
  // Keyroots: nodes that are not the leftmost child of their parent, i.e.
  // whose leftmost leaf is not shared with a higher node.
  std::vector<char> seen(out.label.size(), 0);
  for (int i = out.size() - 1; i >= 0; --i) {
    if (!seen[static_cast<std::size_t>(out.lml[i])]) {
      out.keyroots.push_back(i);
      seen[static_cast<std::size_t>(out.lml[i])] = 1;
    }
  }
  std::sort(out.keyroots.begin(), out.keyroots.end());
  return out;
}

int cost_relabel(TokenId a, TokenId b) { return a == b ? 0 : 1; }

struct Dp {
  const Indexed& a;
  const Indexed& b;
  std::vector<std::vector<int>> treedist;

  Dp(const Indexed& a_in, const Indexed& b_in) : a(a_in), b(b_in) {
    treedist.assign(static_cast<std::size_t>(a.size()),
                    std::vector<int>(static_cast<std::size_t>(b.size()), 0));
  }

  // Forest distance table for the keyroot pair (i, j); also fills treedist
  // entries for subtree pairs that close inside this table.
  std::vector<std::vector<int>> forest_table(int i, int j, bool record) {
    int m = i - a.lml[i] + 2;
    int n = j - b.lml[j] + 2;
    int ioff = a.lml[i] - 1;
    int joff = b.lml[j] - 1;
    std::vector<std::vector<int>> fd(static_cast<std::size_t>(m),
                                     std::vector<int>(static_cast<std::size_t>(n), 0));
    for (int x = 1; x < m; ++x) fd[x][0] = fd[x - 1][0] + 1;
    for (int y = 1; y < n; ++y) fd[0][y] = fd[0][y - 1] + 1;
    for (int x = 1; x < m; ++x) {
      for (int y = 1; y < n; ++y) {
        int an = x + ioff;
        int bn = y + joff;
        if (a.lml[an] == a.lml[i] && b.lml[bn] == b.lml[j]) {
          fd[x][y] = std::min({fd[x - 1][y] + 1, fd[x][y - 1] + 1,
                               fd[x - 1][y - 1] + cost_relabel(a.label[an], b.label[bn])});
          if (record) treedist[an][bn] = fd[x][y];
        } else {
          int px = a.lml[an] - 1 - ioff;
          int py = b.lml[bn] - 1 - joff;
          fd[x][y] = std::min({fd[x - 1][y] + 1, fd[x][y - 1] + 1,
                               fd[px][py] + treedist[an][bn]});
        }
      }
    }
    return fd;
  }

  void run() {
    for (int i : a.keyroots)
      for (int j : b.keyroots) forest_table(i, j, /*record=*/true);
  }

  // Recovers one optimal mapping for the subtree pair (i, j). Preference
  // order at ties: map the pair, then delete from a, then insert into b.
  void trace(int i, int j, std::vector<std::pair<int, int>>& mapping) {
    auto fd = forest_table(i, j, /*record=*/false);
    int ioff = a.lml[i] - 1;
    int joff = b.lml[j] - 1;
    int x = i - ioff;
    int y = j - joff;
    while (x > 0 || y > 0) {
      int an = x + ioff;
      int bn = y + joff;
      if (x > 0 && y > 0 && a.lml[an] == a.lml[i] && b.lml[bn] == b.lml[j] &&
          fd[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] ==
              fd[static_cast<std::size_t>(x - 1)][static_cast<std::size_t>(y - 1)] +
                  cost_relabel(a.label[an], b.label[bn])) {
        mapping.emplace_back(an, bn);
        --x;
        --y;
      } else if (x > 0 && y > 0 && !(a.lml[an] == a.lml[i] && b.lml[bn] == b.lml[j]) &&
                 fd[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] ==
                     fd[static_cast<std::size_t>(a.lml[an] - 1 - ioff)]
                       [static_cast<std::size_t>(b.lml[bn] - 1 - joff)] +
                         treedist[an][bn]) {
        trace(an, bn, mapping);
        x = a.lml[an] - 1 - ioff;
        y = b.lml[bn] - 1 - joff;
      } else if (x > 0 &&
                 fd[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] ==
                     fd[static_cast<std::size_t>(x - 1)][static_cast<std::size_t>(y)] + 1) {
        --x;  // delete a-node
      } else {
        --y;  // insert b-node
      }
    }
  }
};

}  // namespace

EditScript forest_edit_distance(std::span<const TreeNode> a,
                                std::span<const TreeNode> b,
                                EditDistanceLimits limits) {
  std::size_t na = 0;
  std::size_t nb = 0;
  for (const auto& t : a) na += t.node_count();
  for (const auto& t : b) nb += t.node_count();
  if (na * nb > limits.max_node_product)
    fail(ErrorCode::SizeLimit,
         "node count product " + std::to_string(na * nb) + " exceeds cap " +
             std::to_string(limits.max_node_product));

  Indexed ia = index_forest(a);
  Indexed ib = index_forest(b);
  Dp dp(ia, ib);
  dp.run();

  std::vector<std::pair<int, int>> mapping;
  dp.trace(ia.size() - 1, ib.size() - 1, mapping);

  EditScript script;
  script.distance = dp.treedist[static_cast<std::size_t>(ia.size() - 1)]
                               [static_cast<std::size_t>(ib.size() - 1)];
  std::vector<char> a_mapped(static_cast<std::size_t>(ia.size()), 0);
  std::vector<char> b_mapped(static_cast<std::size_t>(ib.size()), 0);
  for (auto [an, bn] : mapping) {
    a_mapped[static_cast<std::size_t>(an)] = 1;
    b_mapped[static_cast<std::size_t>(bn)] = 1;
    std::int32_t src = ia.preorder[static_cast<std::size_t>(an)];
    std::int32_t tgt = ib.preorder[static_cast<std::size_t>(bn)];
    if (src == k_no_index || tgt == k_no_index) continue;  // virtual roots
    script.mapped.push_back(
        {src, tgt,
         ia.label[static_cast<std::size_t>(an)] == ib.label[static_cast<std::size_t>(bn)]
             ? EditScript::Tag::Match
             : EditScript::Tag::Relabel});
  }
  for (int n = 0; n < ia.size(); ++n)
    if (!a_mapped[static_cast<std::size_t>(n)] &&
        ia.preorder[static_cast<std::size_t>(n)] != k_no_index)
      script.deleted.push_back(ia.preorder[static_cast<std::size_t>(n)]);
  for (int n = 0; n < ib.size(); ++n)
    if (!b_mapped[static_cast<std::size_t>(n)] &&
        ib.preorder[static_cast<std::size_t>(n)] != k_no_index)
      script.inserted.push_back(ib.preorder[static_cast<std::size_t>(n)]);
  std::sort(script.mapped.begin(), script.mapped.end(),
            [](const auto& l, const auto& r) { return l.source < r.source; });
  std::sort(script.deleted.begin(), script.deleted.end());
  std::sort(script.inserted.begin(), script.inserted.end());
  return script;
}

EditScript tree_edit_distance(const TreeNode& a, const TreeNode& b,
                              EditDistanceLimits limits) {
  return forest_edit_distance(std::span<const TreeNode>(&a, 1),
                              std::span<const TreeNode>(&b, 1), limits);
}

EditLabeling label_edits(std::span<const TreeNode> source, const TreeNode& target,
                         double edit_weight, EditDistanceLimits limits) {
  EditScript script =
      forest_edit_distance(source, std::span<const TreeNode>(&target, 1), limits);
  EditLabeling labeling;
  labeling.lambda.assign(target.node_count(), 1.0);
  for (const auto& pair : script.mapped)
    if (pair.tag == EditScript::Tag::Relabel)
      labeling.lambda[static_cast<std::size_t>(pair.target)] = edit_weight;
  for (std::int32_t idx : script.inserted)
    labeling.lambda[static_cast<std::size_t>(idx)] = edit_weight;
  return labeling;
}

EditLabeling label_edits(const TreeNode& source, const TreeNode& target,
                         double edit_weight, EditDistanceLimits limits) {
  return label_edits(std::span<const TreeNode>(&source, 1), target, edit_weight,
                     limits);
}

}  // namespace treeformer
