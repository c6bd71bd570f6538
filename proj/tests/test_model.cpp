#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"
#include "treeformer/decode.hpp"
#include "treeformer/grad_check.hpp"
#include "treeformer/model.hpp"
#include "treeformer/train.hpp"

using namespace treeformer;
using treeformer::testing::make_vocab;
using treeformer::testing::random_tree;

namespace {

TreeNode t(TokenId token, std::vector<TreeNode> children = {}) {
  return TreeNode{token, std::move(children)};
}

ModelConfig tiny_config(const Vocabulary& vocab, int layers = 2) {
  ModelConfig cfg;
  cfg.n_layers = layers;
  cfg.d_model = 16;
  cfg.d_ff = 32;
  cfg.heads = 2;
  cfg.d_k = 8;
  cfg.d_v = 8;
  cfg.src_vocab = static_cast<int>(vocab.size());
  cfg.tgt_vocab = static_cast<int>(vocab.size());
  return cfg;
}

// Two-subtree shape in the style of a small parse tree: the root holds a
// left and a right phrase, each with its own leaves.
TreeNode two_branch_tree(const Vocabulary& vocab) {
  return t(vocab.id_of("P0"),
           {t(vocab.id_of("P1"), {t(vocab.id_of("a0")), t(vocab.id_of("a1"))}),
            t(vocab.id_of("P2"), {t(vocab.id_of("a2")), t(vocab.id_of("a3"))})});
}

}  // namespace

TEST_CASE("tcb: zero weights give a zero vector") {
  auto vocab = make_vocab(2, 4);
  ModelConfig cfg = tiny_config(vocab);
  ParamStore<double> store = make_params<double>(cfg, nullptr);  // all zeros
  Mat<double> x = Mat<double>::Random(1, cfg.d_model);
  Mat<double> out = tcb<double>(x, x, x, store, "enc.in", cfg);
  CHECK(out.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tcb: absent contexts equal explicit v_p/v_s") {
  auto vocab = make_vocab(2, 4);
  ModelConfig cfg = tiny_config(vocab);
  Rng rng(3);
  ParamStore<double> store = make_params<double>(cfg, &rng);
  Mat<double> x = Mat<double>::Random(1, cfg.d_model);
  Mat<double> with_absent = tcb<double>(x, std::nullopt, std::nullopt, store, "enc.in", cfg);
  Mat<double> with_explicit =
      tcb<double>(x, Mat<double>(store.at("enc.in.v_p").value),
                  Mat<double>(store.at("enc.in.v_s").value), store, "enc.in", cfg);
  CHECK((with_absent - with_explicit).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tcb: hand-set weights match independent matrix arithmetic") {
  // d_model = 2, d_ff = 2 block evaluated by hand with plain Eigen.
  auto vocab = make_vocab(1, 2);
  ModelConfig cfg = tiny_config(vocab);
  cfg.d_model = 2;
  cfg.d_ff = 2;
  ParamStore<double> store;
  detail::add_tcb<double>(store, "blk", 2, 2, 2, true, nullptr);
  store.at("blk.w_t").value << 1.0, -2.0, 0.5, 0.0;
  store.at("blk.w_p").value << 0.0, 1.0, 1.0, 0.0;
  store.at("blk.w_s").value << -1.0, 0.5, 0.25, 2.0;
  store.at("blk.b").value << 0.1, -0.2;
  store.at("blk.w2").value << 2.0, 0.0, -1.0, 1.0;
  store.at("blk.b2").value << 0.05, 0.15;

  Mat<double> x_t(1, 2), x_p(1, 2), x_s(1, 2);
  x_t << 1.0, 0.0;
  x_p << 0.0, 1.0;
  x_s << 1.0, 1.0;

  Mat<double> pre = x_t * store.at("blk.w_t").value + x_p * store.at("blk.w_p").value +
                    x_s * store.at("blk.w_s").value + store.at("blk.b").value;
  Mat<double> expected =
      pre.cwiseMax(0.0) * store.at("blk.w2").value + store.at("blk.b2").value;

  Mat<double> got = tcb<double>(x_t, x_p, x_s, store, "blk", cfg);
  CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("encoder: single-node tree produces one hidden state") {
  auto vocab = make_vocab(2, 3);
  ModelConfig cfg = tiny_config(vocab);
  Rng rng(5);
  ParamStore<double> store = make_params<double>(cfg, &rng);
  Tape<double> tape;
  ForwardOptions opts;
  DfTree single = linearize(t(vocab.id_of("a0")));
  Var<double> h = encoder_forward(tape, single, store, cfg, opts);
  CHECK(h.rows() == 1);
  CHECK(h.cols() == cfg.d_model);
}

TEST_CASE("encoder: structure sensitivity with identical token multisets") {
  auto vocab = make_vocab(2, 3);
  ModelConfig cfg = tiny_config(vocab);
  Rng rng(7);
  ParamStore<double> store = make_params<double>(cfg, &rng);
  // Same multiset {P0, P1, a0, a1}: chain vs flat arrangement.
  TreeNode chain = t(vocab.id_of("P0"), {t(vocab.id_of("P1"), {t(vocab.id_of("a0")), t(vocab.id_of("a1"))})});
  TreeNode flat = t(vocab.id_of("P0"), {t(vocab.id_of("a0")), t(vocab.id_of("P1"), {t(vocab.id_of("a1"))})});
  ForwardOptions opts;
  Tape<double> tape_a;
  Tape<double> tape_b;
  Mat<double> ha = encoder_forward(tape_a, linearize(chain), store, cfg, opts).value();
  Mat<double> hb = encoder_forward(tape_b, linearize(flat), store, cfg, opts).value();
  // Compare the roots' states: different child structure must change them.
  CHECK((ha.row(0) - hb.row(0)).cwiseAbs().maxCoeff() > 1e-9);
}

TEST_CASE("encoder and decoder build exactly two gathers per TCB sublayer") {
  auto vocab = make_vocab(3, 5);
  ModelConfig cfg = tiny_config(vocab);
  Rng rng(9);
  ParamStore<double> store = make_params<double>(cfg, &rng);
  ForwardOptions opts;
  for (int nodes : {3, 25, 60}) {
    Rng tree_rng(static_cast<std::uint64_t>(100 + nodes));
    DfTree tree = linearize(random_tree(vocab, tree_rng, nodes));
    Tape<double> tape;
    encoder_forward(tape, tree, store, cfg, opts);
    CHECK(tape.context_gather_passes == expected_encoder_gathers(cfg));
    DecodeStream stream = teacher_stream(tree, vocab);
    Tape<double> dec_tape;
    Var<double> enc = encoder_forward(dec_tape, tree, store, cfg, opts);
    int after_encoder = dec_tape.context_gather_passes;
    decoder_forward(dec_tape, enc, stream, store, cfg, opts);
    CHECK(dec_tape.context_gather_passes - after_encoder ==
          expected_decoder_gathers(cfg));
  }
}

TEST_CASE("decoder causality: later perturbations never change earlier logits") {
  auto vocab = make_vocab(3, 5);
  ModelConfig cfg = tiny_config(vocab);
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    ParamStore<double> store = make_params<double>(cfg, &rng);
    DfTree src = linearize(random_tree(vocab, rng, 12));
    DfTree tgt = linearize(random_tree(vocab, rng, 12));
    DecodeStream stream = teacher_stream(tgt, vocab);
    ForwardOptions opts;

    Tape<double> tape;
    Var<double> enc = encoder_forward(tape, src, store, cfg, opts);
    Mat<double> logits = decoder_forward(tape, enc, stream, store, cfg, opts).value();

    // Perturb the token at a random later step; node steps only.
    std::uniform_int_distribution<std::size_t> pick(0, stream.size() - 1);
    std::size_t cut = pick(rng);
    DecodeStream mutated = stream;
    bool changed = false;
    for (std::size_t s = stream.size(); s-- > cut + 1;) {
      if (mutated.node_index[s] == k_no_index) continue;
      TokenId old = mutated.tokens[s];
      mutated.tokens[s] = vocab.is_parent(old) ? vocab.id_of("P1") : vocab.id_of("a1");
      if (mutated.tokens[s] == old)
        mutated.tokens[s] = vocab.is_parent(old) ? vocab.id_of("P2") : vocab.id_of("a2");
      changed = true;
      break;
    }
    if (!changed) continue;

    Tape<double> tape2;
    Var<double> enc2 = encoder_forward(tape2, src, store, cfg, opts);
    Mat<double> logits2 = decoder_forward(tape2, enc2, mutated, store, cfg, opts).value();
    for (std::size_t s = 0; s <= cut; ++s)
      for (Eigen::Index v = 0; v < logits.cols(); ++v)
        REQUIRE(logits(static_cast<Eigen::Index>(s), v) ==
                logits2(static_cast<Eigen::Index>(s), v));
  }
}

TEST_CASE("decoder: root-only stream depends just on encoder and v_p/v_s") {
  auto vocab = make_vocab(2, 3);
  ModelConfig cfg = tiny_config(vocab);
  Rng rng(13);
  ParamStore<double> store = make_params<double>(cfg, &rng);
  DfTree src = linearize(t(vocab.id_of("a0")));
  ForwardOptions opts;

  DecodeStream query;
  query.tokens = {vocab.pad_id()};  // placeholder, never read
  query.parent_step = {k_no_index};
  query.sibling_step = {k_no_index};
  query.node_index = {k_no_index};

  Tape<double> tape;
  Var<double> enc = encoder_forward(tape, src, store, cfg, opts);
  Mat<double> a = decoder_forward(tape, enc, query, store, cfg, opts).value();

  DecodeStream query2 = query;
  query2.tokens = {vocab.id_of("P0")};  // different placeholder, same logits
  Tape<double> tape2;
  Var<double> enc2 = encoder_forward(tape2, src, store, cfg, opts);
  Mat<double> b = decoder_forward(tape2, enc2, query2, store, cfg, opts).value();
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);

  // Perturbing v_p changes the root logits: the learned vector is live.
  store.at("dec.in.v_p").value.array() += 0.25;
  Tape<double> tape3;
  Var<double> enc3 = encoder_forward(tape3, src, store, cfg, opts);
  Mat<double> c = decoder_forward(tape3, enc3, query, store, cfg, opts).value();
  CHECK((a - c).cwiseAbs().maxCoeff() > 1e-9);
}

TEST_CASE("cross-branch conditioning flows only through self-attention") {
  auto vocab = make_vocab(3, 5);
  ModelConfig cfg = tiny_config(vocab);
  Rng rng(17);
  int changed_with_attention = 0;
  const int trials = 30;
  for (int trial = 0; trial < trials; ++trial) {
    ParamStore<double> store = make_params<double>(cfg, &rng);
    DfTree src = linearize(two_branch_tree(vocab));
    DfTree tgt = linearize(two_branch_tree(vocab));
    DecodeStream stream = teacher_stream(tgt, vocab);

    // Flip the first leaf of the left phrase (node index 2, a0 -> a4).
    DecodeStream mutated = stream;
    std::size_t leaf_step = 0;
    for (std::size_t s = 0; s < stream.size(); ++s)
      if (stream.node_index[s] == 2) leaf_step = s;
    mutated.tokens[leaf_step] = vocab.id_of("a4");

    // Logit rows of the right phrase's leaves (node indices 5 and 6).
    std::vector<std::size_t> later_steps;
    for (std::size_t s = 0; s < stream.size(); ++s)
      if (stream.node_index[s] == 5 || stream.node_index[s] == 6)
        later_steps.push_back(s);
    REQUIRE(later_steps.size() == 2);

    auto run = [&](const DecodeStream& y, bool ablate) {
      Tape<double> tape;
      ForwardOptions opts;
      opts.ablate_self_attention = ablate;
      Var<double> enc = encoder_forward(tape, src, store, cfg, opts);
      return Mat<double>(decoder_forward(tape, enc, y, store, cfg, opts).value());
    };

    Mat<double> with_attn_a = run(stream, false);
    Mat<double> with_attn_b = run(mutated, false);
    double delta = 0.0;
    for (std::size_t s : later_steps)
      delta = std::max(delta, (with_attn_a.row(static_cast<Eigen::Index>(s)) -
                               with_attn_b.row(static_cast<Eigen::Index>(s)))
                                  .cwiseAbs()
                                  .maxCoeff());
    changed_with_attention += delta > 0.0;

    Mat<double> ablated_a = run(stream, true);
    Mat<double> ablated_b = run(mutated, true);
    for (std::size_t s : later_steps)
      for (Eigen::Index v = 0; v < ablated_a.cols(); ++v)
        REQUIRE(ablated_a(static_cast<Eigen::Index>(s), v) ==
                ablated_b(static_cast<Eigen::Index>(s), v));
  }
  CHECK(changed_with_attention == trials);
}

TEST_CASE("lm_forward equals decoder_forward with zeroed cross projections") {
  auto vocab = make_vocab(2, 4);
  ModelConfig cfg = tiny_config(vocab);
  Rng rng(19);
  ParamStore<double> store = make_params<double>(cfg, &rng);
  for (int l = 0; l < cfg.n_layers; ++l) {
    std::string p = "dec.l" + std::to_string(l) + ".cross.";
    store.at(p + "wq").value.setZero();
    store.at(p + "wk").value.setZero();
    store.at(p + "wv").value.setZero();
    store.at(p + "wo").value.setZero();
  }
  DfTree src = linearize(random_tree(vocab, rng, 8));
  DfTree tgt = linearize(random_tree(vocab, rng, 10));
  DecodeStream stream = teacher_stream(tgt, vocab);
  ForwardOptions opts;

  Tape<double> tape;
  Var<double> enc = encoder_forward(tape, src, store, cfg, opts);
  Mat<double> dec_logits = decoder_forward(tape, enc, stream, store, cfg, opts).value();

  Tape<double> lm_tape;
  Mat<double> lm_logits = lm_forward(lm_tape, stream, store, cfg, opts).value();
  CHECK((dec_logits - lm_logits).cwiseAbs().maxCoeff() == 0.0);

  // Softmax of any logits row is a distribution.
  Tape<double> t3;
  Var<double> soft = softmax_rows(t3.constant(lm_logits));
  for (Eigen::Index i = 0; i < soft.rows(); ++i)
    CHECK(soft.value().row(i).sum() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("full tiny model gradient check under the training loss") {
  auto vocab = make_vocab(3, 5);
  REQUIRE(vocab.size() <= 16);
  ModelConfig cfg = tiny_config(vocab);
  Rng rng(23);
  ParamStore<double> store = make_params<double>(cfg, &rng);

  // A pair with multi-child parents so every context slot is exercised.
  TreeNode src_tree = t(vocab.id_of("P0"),
                        {t(vocab.id_of("a0")),
                         t(vocab.id_of("P1"), {t(vocab.id_of("a1")), t(vocab.id_of("a2"))})});
  TreeNode tgt_tree = t(vocab.id_of("P0"),
                        {t(vocab.id_of("a3")),
                         t(vocab.id_of("P2"), {t(vocab.id_of("a1"))}), t(vocab.id_of("a4"))});
  PreparedPair pair = prepare_pair(src_tree, tgt_tree, vocab, TrainMode::tree2tree, 3.0);

  LossBuilder build = [&](Tape<double>& tape, ParamStore<double>& s) {
    ForwardOptions opts;  // eval mode: dropout off
    std::vector<const PreparedPair*> batch{&pair};
    return batch_loss(tape, batch, s, cfg, TrainMode::tree2tree, opts, vocab.pad_id());
  };

  GradCheckOptions opt;
  opt.coords_per_param = 8;  // full sweep lives in the acceptance suite
  opt.seed = 1;
  GradCheckReport report = grad_check(build, store, opt);
  for (const auto& per : report.params) {
    INFO(per.path, " err=", per.max_rel_err);
    CHECK(per.max_rel_err < 1e-4);
  }
}

TEST_CASE("token ids outside the vocabulary are rejected") {
  auto vocab = make_vocab(1, 1);
  ModelConfig cfg = tiny_config(vocab, 1);
  Rng rng(29);
  ParamStore<double> store = make_params<double>(cfg, &rng);
  DfTree bad;
  bad.tokens = {99};
  bad.parent_idx = {k_no_index};
  bad.sibling_idx = {k_no_index};
  Tape<double> tape;
  ForwardOptions opts;
  CHECK_THROWS_AS(encoder_forward(tape, bad, store, cfg, opts), Error);

  // Streams referencing non-earlier positions violate the mask contract.
  DecodeStream twisted;
  twisted.tokens = {vocab.id_of("a0"), vocab.id_of("a0")};
  twisted.parent_step = {k_no_index, k_no_index};
  twisted.sibling_step = {1, k_no_index};
  twisted.node_index = {0, 1};
  Tape<double> tape2;
  CHECK_THROWS_WITH_AS(lm_forward(tape2, twisted, store, cfg, opts),
                       doctest::Contains("non-earlier"), Error);
}
