#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "test_support.hpp"
#include "treeformer/tree.hpp"

using namespace treeformer;
using treeformer::testing::make_vocab;
using treeformer::testing::preorder_walk;
using treeformer::testing::random_tree;

namespace {

TreeNode t(TokenId token, std::vector<TreeNode> children = {}) {
  return TreeNode{token, std::move(children)};
}

}  // namespace

TEST_CASE("linearize: single node") {
  auto vocab = make_vocab(2, 2);
  DfTree df = linearize(t(vocab.id_of("P0")));
  CHECK(df.tokens == std::vector<TokenId>{vocab.id_of("P0")});
  CHECK(df.parent_idx == std::vector<std::int32_t>{k_no_index});
  CHECK(df.sibling_idx == std::vector<std::int32_t>{k_no_index});
}

TEST_CASE("linearize: R(A, B(C), D) preorder with parent and sibling links") {
  auto vocab = make_vocab(2, 4);
  TokenId R = vocab.id_of("P0");
  TokenId B = vocab.id_of("P1");
  TokenId A = vocab.id_of("a0");
  TokenId C = vocab.id_of("a1");
  TokenId D = vocab.id_of("a2");
  DfTree df = linearize(t(R, {t(A), t(B, {t(C)}), t(D)}));
  CHECK(df.tokens == std::vector<TokenId>{R, A, B, C, D});
  CHECK(df.parent_idx == std::vector<std::int32_t>{k_no_index, 0, 0, 2, 0});
  CHECK(df.sibling_idx == std::vector<std::int32_t>{k_no_index, k_no_index, 1,
                                                    k_no_index, 2});
}

TEST_CASE("round-trip identity over random trees") {
  auto vocab = make_vocab(3, 5);
  Rng rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    TreeNode tree = random_tree(vocab, rng, 200);
    DfTree df = linearize(tree);
    CHECK(df.size() == tree.node_count());
    TreeNode back = delinearize(df, vocab);
    REQUIRE(back == tree);
    REQUIRE(linearize(back) == df);
  }
}

TEST_CASE("index monotonicity and sibling chains on random trees") {
  auto vocab = make_vocab(3, 4);
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    DfTree df = linearize(random_tree(vocab, rng, 60));
    for (std::size_t i = 1; i < df.size(); ++i) {
      CHECK(df.parent_idx[i] < static_cast<std::int32_t>(i));
      CHECK(df.parent_idx[i] >= 0);
      if (df.sibling_idx[i] != k_no_index) {
        CHECK(df.sibling_idx[i] < static_cast<std::int32_t>(i));
        CHECK(df.parent_idx[static_cast<std::size_t>(df.sibling_idx[i])] ==
              df.parent_idx[i]);
      }
    }
    // Walking sibling links back from the last child of any parent visits
    // exactly that parent's children, reversed.
    for (std::size_t p = 0; p < df.size(); ++p) {
      std::vector<std::int32_t> children;
      for (std::size_t i = 0; i < df.size(); ++i)
        if (df.parent_idx[i] == static_cast<std::int32_t>(p))
          children.push_back(static_cast<std::int32_t>(i));
      if (children.empty()) continue;
      std::vector<std::int32_t> walked;
      for (std::int32_t at = children.back(); at != k_no_index;
           at = df.sibling_idx[static_cast<std::size_t>(at)])
        walked.push_back(at);
      std::reverse(walked.begin(), walked.end());
      CHECK(walked == children);
    }
  }
}

TEST_CASE("delinearize: two-node tree") {
  auto vocab = make_vocab(1, 1);
  DfTree df;
  df.tokens = {vocab.id_of("P0"), vocab.id_of("a0")};
  df.parent_idx = {k_no_index, 0};
  df.sibling_idx = {k_no_index, k_no_index};
  TreeNode back = delinearize(df, vocab);
  CHECK(back == t(vocab.id_of("P0"), {t(vocab.id_of("a0"))}));
}

TEST_CASE("delinearize: leaf cannot be a parent") {
  auto vocab = make_vocab(1, 2);
  DfTree df;
  df.tokens = {vocab.id_of("a0"), vocab.id_of("a1")};
  df.parent_idx = {k_no_index, 0};
  df.sibling_idx = {k_no_index, k_no_index};
  CHECK_THROWS_WITH_AS(delinearize(df, vocab), doctest::Contains("non-Parent"),
                       Error);
}

TEST_CASE("delinearize: inconsistent lengths and bad sibling links") {
  auto vocab = make_vocab(1, 2);
  DfTree df;
  df.tokens = {vocab.id_of("P0"), vocab.id_of("a0")};
  df.parent_idx = {k_no_index};
  df.sibling_idx = {k_no_index, k_no_index};
  CHECK_THROWS_AS(delinearize(df, vocab), Error);

  DfTree bad;
  bad.tokens = {vocab.id_of("P0"), vocab.id_of("a0"), vocab.id_of("a1")};
  bad.parent_idx = {k_no_index, 0, 0};
  bad.sibling_idx = {k_no_index, k_no_index, k_no_index};  // should be 1
  CHECK_THROWS_AS(delinearize(bad, vocab), Error);
}

TEST_CASE("delinearize: parse-tree shape round-trips, checked by re-walk") {
  // Root with two phrase subtrees, like a small constituency parse.
  auto vocab = make_vocab(4, 6);
  TokenId root = vocab.id_of("P0");
  TokenId np = vocab.id_of("P1");
  TokenId vp = vocab.id_of("P2");
  TreeNode tree =
      t(root, {t(np, {t(vocab.id_of("a0")), t(vocab.id_of("a1"))}),
               t(vp, {t(vocab.id_of("a2")),
                      t(vocab.id_of("P3"), {t(vocab.id_of("a3")), t(vocab.id_of("a4"))})})});
  DfTree df = linearize(tree);
  TreeNode back = delinearize(df, vocab);
  std::vector<TokenId> walk_original;
  std::vector<TokenId> walk_back;
  preorder_walk(tree, walk_original);
  preorder_walk(back, walk_back);
  CHECK(walk_original == walk_back);
  CHECK(walk_original == df.tokens);
  CHECK(back == tree);
}

TEST_CASE("parse_sexpr: direct construction and nesting") {
  Vocabulary vocab;
  vocab.add("R", TokenKind::Parent);
  vocab.add("P", TokenKind::Parent);
  vocab.add("a", TokenKind::Leaf);
  vocab.add("b", TokenKind::Leaf);
  vocab.add("<eos>", TokenKind::EndOfSiblings);
  vocab.add("<pad>", TokenKind::Pad);

  TreeNode rab = parse_sexpr("(R a b)", vocab);
  CHECK(rab == t(vocab.id_of("R"), {t(vocab.id_of("a")), t(vocab.id_of("b"))}));
  CHECK(to_sexpr(rab, vocab) == "(R a b)");

  TreeNode nested = parse_sexpr("(R (P a) b)", vocab);
  CHECK(nested == t(vocab.id_of("R"),
                    {t(vocab.id_of("P"), {t(vocab.id_of("a"))}), t(vocab.id_of("b"))}));
  CHECK(to_sexpr(nested, vocab) == "(R (P a) b)");

  CHECK(to_sexpr(parse_sexpr("  (R   (P  a)   b ) ", vocab), vocab) == "(R (P a) b)");

  // Childless parent and bare leaf forms.
  CHECK(to_sexpr(parse_sexpr("(P)", vocab), vocab) == "(P)");
  CHECK(to_sexpr(parse_sexpr("a", vocab), vocab) == "a");
}

TEST_CASE("parse_sexpr: errors") {
  Vocabulary vocab;
  vocab.add("R", TokenKind::Parent);
  vocab.add("a", TokenKind::Leaf);
  vocab.add("b", TokenKind::Leaf);
  vocab.add("<eos>", TokenKind::EndOfSiblings);
  vocab.add("<pad>", TokenKind::Pad);

  CHECK_THROWS_WITH_AS(parse_sexpr("(R (a b))", vocab),
                       doctest::Contains("not Parent-kind"), Error);
  CHECK_THROWS_WITH_AS(parse_sexpr("(R a", vocab), doctest::Contains("unbalanced"),
                       Error);
  CHECK_THROWS_WITH_AS(parse_sexpr("(R a) b", vocab), doctest::Contains("trailing"),
                       Error);
  CHECK_THROWS_AS(parse_sexpr("(R zz)", vocab), Error);
  CHECK_THROWS_AS(parse_sexpr("(R <eos>)", vocab), Error);
  CHECK_THROWS_AS(parse_sexpr("()", vocab), Error);
}

TEST_CASE("vocabulary: invariants and file round-trip") {
  CHECK_THROWS_AS(Vocabulary({{"x", TokenKind::Leaf}}), Error);  // no eos/pad
  Vocabulary vocab = make_vocab(2, 2);
  CHECK_THROWS_AS(vocab.add("P0", TokenKind::Leaf), Error);  // duplicate name

  std::ostringstream out;
  vocab.write(out);
  std::istringstream in(out.str());
  Vocabulary loaded = Vocabulary::parse(in, "buffer");
  CHECK(loaded.size() == vocab.size());
  for (TokenId id = 0; id < static_cast<TokenId>(vocab.size()); ++id) {
    CHECK(loaded.name(id) == vocab.name(id));
    CHECK(loaded.kind(id) == vocab.kind(id));
  }
  CHECK(loaded.eos_id() == vocab.eos_id());
  CHECK(loaded.pad_id() == vocab.pad_id());
}
