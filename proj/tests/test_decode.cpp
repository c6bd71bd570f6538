#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "treeformer/decode.hpp"

using namespace treeformer;
using treeformer::testing::make_vocab;
using treeformer::testing::random_tree;

namespace {

ModelConfig toy_config(const Vocabulary& vocab) {
  ModelConfig cfg;
  cfg.n_layers = 1;
  cfg.d_model = 12;
  cfg.d_ff = 24;
  cfg.heads = 2;
  cfg.d_k = 6;
  cfg.d_v = 6;
  cfg.src_vocab = static_cast<int>(vocab.size());
  cfg.tgt_vocab = static_cast<int>(vocab.size());
  return cfg;
}

// Uniform scorer with per-step overrides; forces specific token choices.
StepScorer forced_scorer(std::vector<std::pair<TokenId, double>> boosts,
                         std::size_t vocab_size) {
  return [boosts, vocab_size](const DecodeStream& prefix, std::int32_t,
                              std::int32_t) -> StepLogProbs {
    StepLogProbs row = StepLogProbs::Constant(static_cast<Eigen::Index>(vocab_size),
                                              std::log(0.5 / double(vocab_size)));
    std::size_t step = prefix.size();
    if (step < boosts.size())
      row(boosts[step].first) = std::log(boosts[step].second);
    return row;
  };
}

// All complete trees reachable within the limits, by exhaustive expansion of
// the generation state machine.
void enumerate_trees(const Vocabulary& vocab, GenerationLimits limits,
                     const GenerationState& state, std::vector<DfTree>& out) {
  if (state.terminated()) {
    out.push_back(state.tree_prefix());
    return;
  }
  for (TokenId tok = 0; tok < static_cast<TokenId>(vocab.size()); ++tok) {
    if (!state.is_legal(tok)) continue;
    GenerationState next = state;
    next.advance(tok);
    enumerate_trees(vocab, limits, next, out);
  }
}

}  // namespace

TEST_CASE("greedy follows a forced distribution trace") {
  auto vocab = make_vocab(1, 2);  // P0, a0, a1, <eos>, <pad>
  TokenId P = vocab.id_of("P0");
  TokenId a = vocab.id_of("a0");
  TokenId eos = vocab.eos_id();
  StepScorer scorer = forced_scorer(
      {{P, 0.9}, {a, 0.9}, {eos, 0.9}, {eos, 0.9}}, vocab.size());
  DecodeResult result = greedy_decode(scorer, vocab);
  CHECK_FALSE(result.truncated);
  CHECK(result.stream_tokens == std::vector<TokenId>{P, a, eos, eos});
  TreeNode expected{P, {TreeNode{a, {}}}};
  CHECK(result.tree == linearize(expected));
  // Score is the sum of the chosen tokens' log-probabilities.
  CHECK(result.score == doctest::Approx(4.0 * std::log(0.9)).epsilon(1e-12));
}

TEST_CASE("greedy truncates when the node budget blocks a preferred token") {
  auto vocab = make_vocab(1, 2);
  TokenId P = vocab.id_of("P0");
  TokenId a = vocab.id_of("a0");
  // The model always wants another leaf; only eos is legal once full.
  StepScorer leaf_lover = forced_scorer(
      {{P, 0.9}, {a, 0.9}, {a, 0.9}, {a, 0.9}, {a, 0.9}, {a, 0.9}}, vocab.size());
  GenerationLimits limits;
  limits.max_nodes = 2;
  DecodeResult result = greedy_decode(leaf_lover, vocab, limits);
  CHECK(result.truncated);
  CHECK(result.tree.size() == 2);
  // The partial tree still delinearizes.
  CHECK(delinearize(result.tree, vocab).node_count() == 2);
}

TEST_CASE("beam width 1 equals greedy bitwise on random models") {
  auto vocab = make_vocab(2, 3);
  ModelConfig cfg = toy_config(vocab);
  Rng rng(31);
  GenerationLimits limits;
  limits.max_nodes = 12;
  limits.max_depth = 6;
  for (int trial = 0; trial < 20; ++trial) {
    ParamStore<float> params = make_params<float>(cfg, &rng);
    DfTree src = linearize(random_tree(vocab, rng, 8));
    ModelScorer<float> scorer(params, cfg, vocab);
    scorer.condition_on(src);
    StepScorer fn = scorer;

    DecodeResult greedy = greedy_decode(fn, vocab, limits);
    BeamOptions opt;
    opt.width = 1;
    opt.limits = limits;
    std::vector<DecodeResult> beam = beam_search(fn, nullptr, vocab, opt);
    REQUIRE(beam.size() == 1);
    CHECK(beam[0].stream_tokens == greedy.stream_tokens);
    CHECK(beam[0].tree == greedy.tree);
    CHECK(beam[0].score == greedy.score);
  }
}

TEST_CASE("beam with enumeration-covering width returns the true argmax") {
  // Vocabulary {P, a, b}: 18 complete trees within max_nodes=3, max_depth=4.
  auto vocab = make_vocab(1, 2);
  ModelConfig cfg = toy_config(vocab);
  GenerationLimits limits;
  limits.max_nodes = 3;
  limits.max_depth = 4;

  std::vector<DfTree> all_trees;
  {
    GenerationState fresh(vocab, limits);
    enumerate_trees(vocab, limits, fresh, all_trees);
  }
  REQUIRE(all_trees.size() == 18);

  Rng rng(37);
  for (int trial = 0; trial < 8; ++trial) {
    ParamStore<float> params = make_params<float>(cfg, &rng);
    DfTree src = linearize(random_tree(vocab, rng, 6));

    // Exhaustive argmax of the sequence probability, teacher-forced.
    double best_lp = -1e300;
    const DfTree* best_tree = nullptr;
    for (const DfTree& tree : all_trees) {
      double lp = sequence_log_prob(params, cfg, vocab, &src, tree);
      if (lp > best_lp) {
        best_lp = lp;
        best_tree = &tree;
      }
    }

    ModelScorer<float> scorer(params, cfg, vocab);
    scorer.condition_on(src);
    StepScorer fn = scorer;
    BeamOptions opt;
    opt.width = 20;
    opt.nbest = 20;
    opt.limits = limits;
    std::vector<DecodeResult> beam = beam_search(fn, nullptr, vocab, opt);
    REQUIRE(!beam.empty());
    CHECK(beam[0].tree == *best_tree);
    CHECK(beam[0].score == doctest::Approx(best_lp).epsilon(1e-5));

    // Score consistency: the reported score matches an independent
    // teacher-forced re-scoring pass.
    double rescored = sequence_log_prob(params, cfg, vocab, &src, beam[0].tree);
    CHECK(std::abs(rescored - beam[0].score) < 1e-5);

    // Width monotonicity: widening the beam never worsens the best score.
    double prev = -1e300;
    for (int width : {1, 2, 4, 8, 20}) {
      BeamOptions wopt;
      wopt.width = width;
      wopt.limits = limits;
      std::vector<DecodeResult> result = beam_search(fn, nullptr, vocab, wopt);
      CHECK(result[0].score >= prev - 1e-9);
      prev = result[0].score;
    }
  }
}

TEST_CASE("every terminated decode yields a delinearizable tree") {
  auto vocab = make_vocab(2, 3);
  ModelConfig cfg = toy_config(vocab);
  Rng rng(41);
  GenerationLimits limits;
  limits.max_nodes = 16;
  limits.max_depth = 5;
  for (int trial = 0; trial < 25; ++trial) {
    ParamStore<float> params = make_params<float>(cfg, &rng);
    DfTree src = linearize(random_tree(vocab, rng, 10));
    ModelScorer<float> scorer(params, cfg, vocab);
    scorer.condition_on(src);
    DecodeResult result = greedy_decode(scorer, vocab, limits);
    TreeNode tree = delinearize(result.tree, vocab);
    CHECK(tree.node_count() == result.tree.size());
  }
}

TEST_CASE("LM ensemble: alpha=0 is pure model score, alpha>0 adds the LM") {
  auto vocab = make_vocab(1, 2);
  ModelConfig cfg = toy_config(vocab);
  Rng rng(43);
  ParamStore<float> params = make_params<float>(cfg, &rng);
  ParamStore<float> lm_params = make_params<float>(cfg, &rng);
  DfTree src = linearize(random_tree(vocab, rng, 5));

  ModelScorer<float> model_scorer(params, cfg, vocab);
  model_scorer.condition_on(src);
  ModelScorer<float> lm_scorer(lm_params, cfg, vocab);  // no source: LM mode
  StepScorer model_fn = model_scorer;
  StepScorer lm_fn = lm_scorer;

  GenerationLimits limits;
  limits.max_nodes = 4;
  limits.max_depth = 3;
  BeamOptions plain;
  plain.width = 6;
  plain.limits = limits;
  std::vector<DecodeResult> base = beam_search(model_fn, nullptr, vocab, plain);
  CHECK(base[0].score == doctest::Approx(base[0].model_log_prob).epsilon(1e-12));

  BeamOptions ens = plain;
  ens.alpha = 0.15;
  std::vector<DecodeResult> mixed = beam_search(model_fn, &lm_fn, vocab, ens);
  double model_part = sequence_log_prob(params, cfg, vocab, &src, mixed[0].tree);
  double lm_part = sequence_log_prob(lm_params, cfg, vocab, nullptr, mixed[0].tree);
  CHECK(mixed[0].score == doctest::Approx(model_part + 0.15 * lm_part).epsilon(1e-4));

  CHECK_THROWS_AS(beam_search(model_fn, nullptr, vocab, ens), Error);
  BeamOptions bad = plain;
  bad.width = 0;
  CHECK_THROWS_AS(beam_search(model_fn, nullptr, vocab, bad), Error);
}

TEST_CASE("length normalization reranks but reports raw scores") {
  auto vocab = make_vocab(1, 2);
  ModelConfig cfg = toy_config(vocab);
  Rng rng(47);
  ParamStore<float> params = make_params<float>(cfg, &rng);
  DfTree src = linearize(random_tree(vocab, rng, 5));
  ModelScorer<float> scorer(params, cfg, vocab);
  scorer.condition_on(src);
  StepScorer fn = scorer;

  BeamOptions opt;
  opt.width = 6;
  opt.nbest = 6;
  opt.limits = GenerationLimits{4, 3};
  std::vector<DecodeResult> plain = beam_search(fn, nullptr, vocab, opt);

  BeamOptions normed = opt;
  normed.length_norm = 1.0;
  std::vector<DecodeResult> reranked = beam_search(fn, nullptr, vocab, normed);
  REQUIRE(!reranked.empty());
  // Raw score is still the plain log-probability sum of the returned tree.
  double recomputed = sequence_log_prob(params, cfg, vocab, &src, reranked[0].tree);
  CHECK(std::abs(recomputed - reranked[0].score) < 1e-5);
  // Ordering follows the normalized quantity.
  for (std::size_t i = 1; i < reranked.size(); ++i) {
    double prev = reranked[i - 1].score /
                  std::pow(double(reranked[i - 1].stream_tokens.size()), 1.0);
    double here = reranked[i].score /
                  std::pow(double(reranked[i].stream_tokens.size()), 1.0);
    CHECK(prev >= here - 1e-12);
  }
  // Exponent zero reproduces the unnormalized ranking.
  BeamOptions zero = opt;
  zero.length_norm = 0.0;
  std::vector<DecodeResult> again = beam_search(fn, nullptr, vocab, zero);
  CHECK(again[0].tree == plain[0].tree);
  BeamOptions bad = opt;
  bad.length_norm = -0.5;
  CHECK_THROWS_AS(beam_search(fn, nullptr, vocab, bad), Error);
}
