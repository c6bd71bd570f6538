#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <vector>

#include "treeformer/generation.hpp"
#include "treeformer/model.hpp"

namespace treeformer {

// Log-probabilities over the target vocabulary for the next step, given the
// emitted stream and the next step's parent/sibling context.
using StepLogProbs = Eigen::RowVectorXd;
using StepScorer = std::function<StepLogProbs(
    const DecodeStream& prefix, std::int32_t parent_step, std::int32_t sibling_step)>;

struct DecodeResult {
  DfTree tree;
  std::vector<TokenId> stream_tokens;  // every scored token, eos included
  double score = 0.0;                  // model + alpha * lm log-probability
  double model_log_prob = 0.0;
  bool truncated = false;
};

// Teacher-forced log-probability of a whole target tree under the decoder
// (or the LM when `src` is absent): one forward pass, summed over the stream.
// This is the independent re-scoring route the search results are checked
// against.
template <class S>
double sequence_log_prob(ParamStore<S>& params, const ModelConfig& cfg,
                         const Vocabulary& vocab, const DfTree* src,
                         const DfTree& tgt) {
  DecodeStream stream = teacher_stream(tgt, vocab);
  Tape<S> tape;
  ForwardOptions opts;  // eval
  Var<S> logits;
  if (src != nullptr) {
    Var<S> enc = encoder_forward(tape, *src, params, cfg, opts);
    logits = decoder_forward(tape, enc, stream, params, cfg, opts);
  } else {
    logits = lm_forward(tape, stream, params, cfg, opts);
  }
  Var<S> logp = log_softmax_rows(logits);
  double total = 0.0;
  for (std::size_t s = 0; s < stream.size(); ++s)
    total += double(logp.value()(static_cast<Eigen::Index>(s), stream.tokens[s]));
  return total;
}

// Scores next steps with a full decoder pass over the prefix plus the query
// position. The query token is never an input (the decoder input block reads
// only parent/sibling embeddings), so a placeholder id is used for it.
template <class S>
class ModelScorer {
 public:
  ModelScorer(ParamStore<S>& params, const ModelConfig& cfg, const Vocabulary& vocab)
      : params_(&params), cfg_(&cfg), placeholder_(vocab.pad_id()) {}

  // Run the encoder once per source; absent source means LM mode.
  void condition_on(const DfTree& src) {
    Tape<S> tape;
    ForwardOptions opts;
    enc_states_ = encoder_forward(tape, src, *params_, *cfg_, opts).value();
    has_src_ = true;
  }

  StepLogProbs operator()(const DecodeStream& prefix, std::int32_t parent_step,
                          std::int32_t sibling_step) const {
    DecodeStream query = prefix;
    query.tokens.push_back(placeholder_);
    query.parent_step.push_back(parent_step);
    query.sibling_step.push_back(sibling_step);
    query.node_index.push_back(k_no_index);
    Tape<S> tape;
    ForwardOptions opts;
    Var<S> logits;
    if (has_src_) {
      Var<S> enc = tape.constant(enc_states_);
      logits = decoder_forward(tape, enc, query, *params_, *cfg_, opts);
    } else {
      logits = lm_forward(tape, query, *params_, *cfg_, opts);
    }
    Var<S> logp = log_softmax_rows(logits);
    return logp.value().row(logits.rows() - 1).template cast<double>();
  }

 private:
  ParamStore<S>* params_;
  const ModelConfig* cfg_;
  TokenId placeholder_;
  Mat<S> enc_states_;
  bool has_src_ = false;
};

namespace detail {

struct StepChoice {
  TokenId token = -1;
  double log_prob = 0.0;
  bool limit_truncated = false;  // a blocked node token outscored every legal one
};

// Argmax over legal tokens, smaller id on ties. Reports whether a
// limit-blocked node token would have won instead.
inline StepChoice pick_greedy(const GenerationState& state, const Vocabulary& vocab,
                              const StepLogProbs& logp) {
  StepChoice choice;
  double best = -std::numeric_limits<double>::infinity();
  double best_blocked = -std::numeric_limits<double>::infinity();
  for (TokenId tok = 0; tok < static_cast<TokenId>(vocab.size()); ++tok) {
    if (state.is_legal(tok)) {
      if (logp(tok) > best) {
        best = logp(tok);
        choice.token = tok;
        choice.log_prob = logp(tok);
      }
    } else if (vocab.kind(tok) == TokenKind::Parent || vocab.kind(tok) == TokenKind::Leaf) {
      best_blocked = std::max(best_blocked, logp(tok));
    }
  }
  if (choice.token < 0) fail(ErrorCode::IllegalToken, "no legal token to decode");
  if (state.limits_block_nodes() && best_blocked > best) choice.limit_truncated = true;
  return choice;
}

}  // namespace detail

// Argmax decoding until the structure terminates or the limits cut it short;
// a cut-short result carries the partial tree with `truncated` set.
inline DecodeResult greedy_decode(const StepScorer& scorer, const Vocabulary& vocab,
                                  GenerationLimits limits = {}) {
  GenerationState state(vocab, limits);
  DecodeResult result;
  while (!state.terminated()) {
    StepLogProbs logp =
        scorer(state.stream(), state.next_parent_step(), state.next_sibling_step());
    auto choice = detail::pick_greedy(state, vocab, logp);
    result.truncated = result.truncated || choice.limit_truncated;
    state.advance(choice.token);
    result.score += choice.log_prob;
  }
  result.model_log_prob = result.score;
  result.tree = state.tree_prefix();
  result.stream_tokens = state.stream().tokens;
  return result;
}

struct BeamOptions {
  int width = 6;
  double alpha = 0.0;  // LM ensemble weight; lm scorer required when > 0
  int nbest = 1;
  // Hypotheses rank by score / length^length_norm; 0 (the default) ranks by
  // the plain log-probability sum. Early stopping only applies when off,
  // since normalized scores are not monotone under extension.
  double length_norm = 0.0;
  GenerationLimits limits;
};

// Standard beam over depth-first token steps. Hypothesis score is
// sum log P_model + alpha * sum log P_lm; finished hypotheses are set aside
// and never extended; ties break on the token id sequence.
inline std::vector<DecodeResult> beam_search(const StepScorer& model_scorer,
                                             const StepScorer* lm_scorer,
                                             const Vocabulary& vocab,
                                             const BeamOptions& opt) {
  if (opt.width < 1) fail(ErrorCode::BadConfig, "beam width must be >= 1");
  if (opt.alpha < 0.0 || opt.alpha > 1.0)
    fail(ErrorCode::BadConfig, "alpha must lie in [0, 1]");
  if (opt.alpha > 0.0 && lm_scorer == nullptr)
    fail(ErrorCode::BadConfig, "alpha > 0 needs an LM scorer");
  if (opt.length_norm < 0.0) fail(ErrorCode::BadConfig, "length_norm must be >= 0");

  struct Hypothesis {
    GenerationState state;
    double model_lp = 0.0;
    double lm_lp = 0.0;
    bool truncated = false;
    double score(double alpha) const { return model_lp + alpha * lm_lp; }
    double ranking(const BeamOptions& o) const {
      double raw = score(o.alpha);
      if (o.length_norm == 0.0 || state.stream().size() == 0) return raw;
      return raw / std::pow(double(state.stream().size()), o.length_norm);
    }
  };

  std::vector<Hypothesis> active;
  active.push_back({GenerationState(vocab, opt.limits)});
  std::vector<Hypothesis> finished;

  auto seq_less = [](const std::vector<TokenId>& a, const std::vector<TokenId>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  };

  while (!active.empty()) {
    std::vector<Hypothesis> candidates;
    for (const auto& hyp : active) {
      StepLogProbs model_lp = model_scorer(hyp.state.stream(), hyp.state.next_parent_step(),
                                           hyp.state.next_sibling_step());
      StepLogProbs lm_lp;
      if (opt.alpha > 0.0)
        lm_lp = (*lm_scorer)(hyp.state.stream(), hyp.state.next_parent_step(),
                             hyp.state.next_sibling_step());
      double best_legal = -std::numeric_limits<double>::infinity();
      double best_blocked = -std::numeric_limits<double>::infinity();
      const std::size_t first_candidate = candidates.size();
      for (TokenId tok = 0; tok < static_cast<TokenId>(vocab.size()); ++tok) {
        if (hyp.state.is_legal(tok)) {
          best_legal = std::max(best_legal, model_lp(tok));
          Hypothesis next = hyp;
          next.state.advance(tok);
          next.model_lp += model_lp(tok);
          if (opt.alpha > 0.0) next.lm_lp += lm_lp(tok);
          candidates.push_back(std::move(next));
        } else if (vocab.kind(tok) == TokenKind::Parent ||
                   vocab.kind(tok) == TokenKind::Leaf) {
          best_blocked = std::max(best_blocked, model_lp(tok));
        }
      }
      if (hyp.state.limits_block_nodes() && best_blocked > best_legal)
        for (std::size_t i = first_candidate; i < candidates.size(); ++i)
          candidates[i].truncated = true;
    }
    std::sort(candidates.begin(), candidates.end(),
              [&](const Hypothesis& a, const Hypothesis& b) {
                double sa = a.ranking(opt);
                double sb = b.ranking(opt);
                if (sa != sb) return sa > sb;
                return seq_less(a.state.stream().tokens, b.state.stream().tokens);
              });
    // Finished hypotheses are held aside and never consume beam slots; the
    // width cut applies to the still-active ones.
    active.clear();
    for (auto& cand : candidates) {
      if (cand.state.terminated())
        finished.push_back(std::move(cand));
      else if (active.size() < static_cast<std::size_t>(opt.width))
        active.push_back(std::move(cand));
    }
    // Per-step increments are non-positive, so once the best finished
    // hypothesis outscores every active one nothing can improve. Normalized
    // ranking breaks that monotonicity, so it runs to exhaustion.
    if (opt.length_norm == 0.0 && !finished.empty() && !active.empty()) {
      double best_finished = -std::numeric_limits<double>::infinity();
      for (const auto& f : finished)
        best_finished = std::max(best_finished, f.score(opt.alpha));
      bool all_below = true;
      for (const auto& a : active)
        if (a.score(opt.alpha) > best_finished) all_below = false;
      if (all_below) break;
    }
  }

  std::sort(finished.begin(), finished.end(),
            [&](const Hypothesis& a, const Hypothesis& b) {
              double sa = a.ranking(opt);
              double sb = b.ranking(opt);
              if (sa != sb) return sa > sb;
              return seq_less(a.state.stream().tokens, b.state.stream().tokens);
            });
  std::vector<DecodeResult> results;
  for (const auto& hyp : finished) {
    if (static_cast<int>(results.size()) >= opt.nbest) break;
    DecodeResult r;
    r.tree = hyp.state.tree_prefix();
    r.stream_tokens = hyp.state.stream().tokens;
    r.score = hyp.score(opt.alpha);
    r.model_log_prob = hyp.model_lp;
    r.truncated = hyp.truncated;
    results.push_back(std::move(r));
  }
  if (results.empty()) fail(ErrorCode::DataExhausted, "beam produced no hypothesis");
  return results;
}

}  // namespace treeformer
