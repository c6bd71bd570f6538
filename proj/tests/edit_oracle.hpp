#pragma once

// Brute-force tree-edit oracle: the space of all ordered labeled forests up
// to a node bound, with one graph edge per single edit operation (relabel,
// delete-with-splice, insert-over-a-sibling-run). Unit-cost tree edit
// distance between two states is then plain BFS distance. Test-only code,
// independent of the dynamic program it audits.

#include <deque>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "treeformer/tree.hpp"

namespace treeformer::testing {

using Forest = std::vector<TreeNode>;

inline std::string forest_key(const Forest& forest) {
  std::string key;
  std::vector<const TreeNode*> stack;
  for (std::size_t i = forest.size(); i-- > 0;) stack.push_back(&forest[i]);
  while (!stack.empty()) {
    const TreeNode* n = stack.back();
    stack.pop_back();
    key += std::to_string(n->token) + ":" + std::to_string(n->children.size()) + ",";
    for (std::size_t i = n->children.size(); i-- > 0;) stack.push_back(&n->children[i]);
  }
  return key;
}

inline std::size_t forest_size(const Forest& forest) {
  std::size_t n = 0;
  for (const auto& tree : forest) n += tree.node_count();
  return n;
}

std::vector<Forest> forests_of_size(int n, int labels);

inline std::vector<TreeNode> trees_of_size(int n, int labels) {
  std::vector<TreeNode> out;
  if (n < 1) return out;
  for (TokenId root = 0; root < labels; ++root)
    for (const auto& kids : forests_of_size(n - 1, labels))
      out.push_back(TreeNode{root, kids});
  return out;
}

inline std::vector<Forest> forests_of_size(int n, int labels) {
  std::vector<Forest> out;
  if (n == 0) {
    out.push_back({});
    return out;
  }
  for (int first = 1; first <= n; ++first)
    for (const auto& head : trees_of_size(first, labels))
      for (const auto& rest : forests_of_size(n - first, labels)) {
        Forest forest{head};
        forest.insert(forest.end(), rest.begin(), rest.end());
        out.push_back(std::move(forest));
      }
  return out;
}

inline std::vector<Forest> edit_neighbors(const Forest& forest, int labels,
                                          std::size_t max_nodes) {
  std::vector<Forest> out;
  std::function<void(Forest&, const std::function<void(std::vector<TreeNode>&)>&)>
      for_each_list =
          [&](Forest& f, const std::function<void(std::vector<TreeNode>&)>& fn) {
            fn(f);
            std::vector<std::vector<TreeNode>*> stack;
            for (auto& tree : f) stack.push_back(&tree.children);
            while (!stack.empty()) {
              auto* list = stack.back();
              stack.pop_back();
              fn(*list);
              for (auto& tree : *list) stack.push_back(&tree.children);
            }
          };

  {  // relabel
    Forest base = forest;
    std::vector<TreeNode*> nodes;
    std::vector<TreeNode*> stack;
    for (auto& tree : base) stack.push_back(&tree);
    while (!stack.empty()) {
      TreeNode* n = stack.back();
      stack.pop_back();
      nodes.push_back(n);
      for (auto& c : n->children) stack.push_back(&c);
    }
    for (TreeNode* node : nodes) {
      TokenId original = node->token;
      for (TokenId lbl = 0; lbl < labels; ++lbl) {
        if (lbl == original) continue;
        node->token = lbl;
        out.push_back(base);
      }
      node->token = original;
    }
  }

  {  // delete: children splice into the vacated slot
    Forest base = forest;
    for_each_list(base, [&](std::vector<TreeNode>& list) {
      for (std::size_t i = 0; i < list.size(); ++i) {
        std::vector<TreeNode> saved = list;
        TreeNode victim = std::move(list[i]);
        list.erase(list.begin() + static_cast<std::ptrdiff_t>(i));
        list.insert(list.begin() + static_cast<std::ptrdiff_t>(i),
                    victim.children.begin(), victim.children.end());
        out.push_back(base);
        list = std::move(saved);
      }
    });
  }

  if (forest_size(forest) < max_nodes) {  // insert over any sibling run
    Forest base = forest;
    for_each_list(base, [&](std::vector<TreeNode>& list) {
      for (std::size_t i = 0; i <= list.size(); ++i)
        for (std::size_t j = i; j <= list.size(); ++j) {
          std::vector<TreeNode> saved = list;
          for (TokenId lbl = 0; lbl < labels; ++lbl) {
            TreeNode wrapper{
                lbl, std::vector<TreeNode>(list.begin() + static_cast<std::ptrdiff_t>(i),
                                           list.begin() + static_cast<std::ptrdiff_t>(j))};
            list.erase(list.begin() + static_cast<std::ptrdiff_t>(i),
                       list.begin() + static_cast<std::ptrdiff_t>(j));
            list.insert(list.begin() + static_cast<std::ptrdiff_t>(i),
                        std::move(wrapper));
            out.push_back(base);
            list = saved;
          }
        }
    });
  }
  return out;
}

struct EditGraphOracle {
  std::map<std::string, int> id_of;
  std::vector<std::vector<int>> adjacency;
  std::vector<Forest> states;

  EditGraphOracle(int max_nodes, int labels) {
    for (int n = 0; n <= max_nodes; ++n)
      for (auto& forest : forests_of_size(n, labels)) {
        id_of.emplace(forest_key(forest), static_cast<int>(states.size()));
        states.push_back(forest);
      }
    adjacency.resize(states.size());
    for (std::size_t s = 0; s < states.size(); ++s) {
      for (const auto& next :
           edit_neighbors(states[s], labels, static_cast<std::size_t>(max_nodes))) {
        auto it = id_of.find(forest_key(next));
        if (it != id_of.end()) adjacency[s].push_back(it->second);
      }
    }
  }

  std::vector<int> distances_from(int source) const {
    std::vector<int> dist(states.size(), -1);
    std::deque<int> queue{source};
    dist[static_cast<std::size_t>(source)] = 0;
    while (!queue.empty()) {
      int at = queue.front();
      queue.pop_front();
      for (int next : adjacency[static_cast<std::size_t>(at)])
        if (dist[static_cast<std::size_t>(next)] < 0) {
          dist[static_cast<std::size_t>(next)] = dist[static_cast<std::size_t>(at)] + 1;
          queue.push_back(next);
        }
    }
    return dist;
  }
};

}  // namespace treeformer::testing
