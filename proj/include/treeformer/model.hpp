#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "treeformer/generation.hpp"
#include "treeformer/tape.hpp"

namespace treeformer {

struct ModelConfig {
  int n_layers = 6;
  int d_model = 512;
  int d_ff = 2048;
  int heads = 8;
  int d_k = 64;
  int d_v = 64;
  double p_drop = 0.3;   // before each sublayer residual
  double p_dattn = 0.1;  // on attention weights
  double p_dff = 0.3;    // inside each TCB, after the nonlinearity
  double p_des = 0.2;    // source embedding word dropout
  double p_det = 0.1;    // target embedding word dropout
  double eps_ls = 0.1;   // label smoothing
  int src_vocab = 0;
  int tgt_vocab = 0;

  void validate() const {
    if (n_layers < 1 || d_model < 1 || d_ff < 1 || heads < 1 || d_k < 1 || d_v < 1)
      fail(ErrorCode::BadConfig, "model dimensions must be positive");
    if (src_vocab < 3 || tgt_vocab < 3)
      fail(ErrorCode::BadConfig, "vocab sizes must cover eos and pad");
    for (double p : {p_drop, p_dattn, p_dff, p_des, p_det})
      if (p < 0.0 || p >= 1.0) fail(ErrorCode::BadConfig, "dropout probabilities must be in [0,1)");
    if (eps_ls < 0.0 || eps_ls >= 1.0)
      fail(ErrorCode::BadConfig, "label smoothing must be in [0,1)");
  }
};

struct ForwardOptions {
  RunMode mode = RunMode::eval;
  Rng* rng = nullptr;  // required in train mode
  bool ablate_self_attention = false;
};

inline constexpr double k_layer_norm_eps = 1e-5;

// ---------------------------------------------------------------------------
// parameters
// ---------------------------------------------------------------------------

namespace detail {

template <class S>
Mat<S> random_normal(Eigen::Index rows, Eigen::Index cols, double stddev, Rng* rng) {
  Mat<S> m = Mat<S>::Zero(rows, cols);
  if (rng == nullptr) return m;
  std::normal_distribution<double> dist(0.0, stddev);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = static_cast<S>(dist(*rng));
  return m;
}

template <class S>
void add_weight(ParamStore<S>& store, const std::string& path, Eigen::Index rows,
                Eigen::Index cols, Rng* rng) {
  store.add(path, rows, cols) =
      random_normal<S>(rows, cols, std::sqrt(2.0 / double(rows + cols)), rng);
}

template <class S>
void add_vector(ParamStore<S>& store, const std::string& path, Eigen::Index cols,
                double stddev, Rng* rng) {
  store.add(path, 1, cols) = random_normal<S>(1, cols, stddev, rng);
}

template <class S>
void add_tcb(ParamStore<S>& store, const std::string& prefix, Eigen::Index d_in,
             Eigen::Index d_ff, Eigen::Index d_out, bool with_self, Rng* rng) {
  if (with_self) add_weight(store, prefix + ".w_t", d_in, d_ff, rng);
  add_weight(store, prefix + ".w_p", d_in, d_ff, rng);
  add_weight(store, prefix + ".w_s", d_in, d_ff, rng);
  store.add(prefix + ".b", 1, d_ff);
  add_weight(store, prefix + ".w2", d_ff, d_out, rng);
  store.add(prefix + ".b2", 1, d_out);
  add_vector(store, prefix + ".v_p", d_in, std::sqrt(1.0 / double(d_in)), rng);
  add_vector(store, prefix + ".v_s", d_in, std::sqrt(1.0 / double(d_in)), rng);
}

template <class S>
void add_attention(ParamStore<S>& store, const std::string& prefix,
                   const ModelConfig& cfg, Rng* rng) {
  add_weight(store, prefix + ".wq", cfg.d_model, Eigen::Index(cfg.heads) * cfg.d_k, rng);
  add_weight(store, prefix + ".wk", cfg.d_model, Eigen::Index(cfg.heads) * cfg.d_k, rng);
  add_weight(store, prefix + ".wv", cfg.d_model, Eigen::Index(cfg.heads) * cfg.d_v, rng);
  add_weight(store, prefix + ".wo", Eigen::Index(cfg.heads) * cfg.d_v, cfg.d_model, rng);
}

template <class S>
void add_layer_norm(ParamStore<S>& store, const std::string& prefix, Eigen::Index d) {
  store.add(prefix + ".g", 1, d).setOnes();
  store.add(prefix + ".b", 1, d);
}

}  // namespace detail

// Creates every tensor of the network; pass rng = nullptr for all-zero
// values (weights are otherwise normal-initialized, biases zero, layer-norm
// gains one).
template <class S>
ParamStore<S> make_params(const ModelConfig& cfg, Rng* rng) {
  cfg.validate();
  ParamStore<S> store;
  const double embed_std = std::sqrt(1.0 / double(cfg.d_model));
  store.add("src_embed", cfg.src_vocab, cfg.d_model) =
      detail::random_normal<S>(cfg.src_vocab, cfg.d_model, embed_std, rng);
  store.add("tgt_embed", cfg.tgt_vocab, cfg.d_model) =
      detail::random_normal<S>(cfg.tgt_vocab, cfg.d_model, embed_std, rng);

  detail::add_tcb(store, "enc.in", cfg.d_model, cfg.d_ff, cfg.d_model, true, rng);
  for (int l = 0; l < cfg.n_layers; ++l) {
    std::string p = "enc.l" + std::to_string(l);
    detail::add_attention(store, p + ".attn", cfg, rng);
    detail::add_layer_norm<S>(store, p + ".ln1", cfg.d_model);
    detail::add_tcb(store, p + ".tcb", cfg.d_model, cfg.d_ff, cfg.d_model, true, rng);
    detail::add_layer_norm<S>(store, p + ".ln2", cfg.d_model);
  }

  detail::add_tcb(store, "dec.in", cfg.d_model, cfg.d_ff, cfg.d_model, false, rng);
  for (int l = 0; l < cfg.n_layers; ++l) {
    std::string p = "dec.l" + std::to_string(l);
    detail::add_attention(store, p + ".self", cfg, rng);
    detail::add_layer_norm<S>(store, p + ".ln1", cfg.d_model);
    detail::add_attention(store, p + ".cross", cfg, rng);
    detail::add_layer_norm<S>(store, p + ".ln2", cfg.d_model);
    detail::add_tcb(store, p + ".tcb", cfg.d_model, cfg.d_ff, cfg.d_model, true, rng);
    detail::add_layer_norm<S>(store, p + ".ln3", cfg.d_model);
  }

  detail::add_weight(store, "out.w", cfg.d_model, cfg.tgt_vocab, rng);
  store.add("out.b", 1, cfg.tgt_vocab);
  return store;
}

// ---------------------------------------------------------------------------
// forward pieces
// ---------------------------------------------------------------------------

namespace detail {

template <class S>
struct TcbVars {
  std::optional<Var<S>> w_t;
  Var<S> w_p, w_s, b, w2, b2, v_p, v_s;
};

template <class S>
TcbVars<S> tcb_vars(Tape<S>& tape, ParamStore<S>& store, const std::string& prefix) {
  TcbVars<S> v;
  if (store.has(prefix + ".w_t")) v.w_t = tape.param(store, prefix + ".w_t");
  v.w_p = tape.param(store, prefix + ".w_p");
  v.w_s = tape.param(store, prefix + ".w_s");
  v.b = tape.param(store, prefix + ".b");
  v.w2 = tape.param(store, prefix + ".w2");
  v.b2 = tape.param(store, prefix + ".b2");
  v.v_p = tape.param(store, prefix + ".v_p");
  v.v_s = tape.param(store, prefix + ".v_s");
  return v;
}

// relu(x_t W_t + x_p W_p + x_s W_s + b) W_2 + b_2 over whole sequences;
// x_t is absent in the decoder input block.
template <class S>
Var<S> tcb_apply(std::optional<Var<S>> x_t, Var<S> x_p, Var<S> x_s,
                 const TcbVars<S>& w, const ModelConfig& cfg,
                 const ForwardOptions& opts) {
  Var<S> pre = add(matmul(x_p, w.w_p), matmul(x_s, w.w_s));
  if (x_t.has_value()) {
    if (!w.w_t.has_value())
      fail(ErrorCode::ShapeMismatch, "tcb has no w_t but x_t was given");
    pre = add(pre, matmul(*x_t, *w.w_t));
  }
  Var<S> h = relu(add_bias(pre, w.b));
  if (opts.mode == RunMode::train)
    h = dropout(h, cfg.p_dff, *opts.rng, opts.mode);
  return add_bias(matmul(h, w.w2), w.b2);
}

template <class S>
Var<S> multihead_attention(Tape<S>& tape, ParamStore<S>& store,
                           const std::string& prefix, Var<S> queries, Var<S> memory,
                           bool causal, const ModelConfig& cfg,
                           const ForwardOptions& opts) {
  Var<S> wq = tape.param(store, prefix + ".wq");
  Var<S> wk = tape.param(store, prefix + ".wk");
  Var<S> wv = tape.param(store, prefix + ".wv");
  Var<S> wo = tape.param(store, prefix + ".wo");
  Var<S> q = matmul(queries, wq);
  Var<S> k = matmul(memory, wk);
  Var<S> v = matmul(memory, wv);
  const S inv_sqrt_dk = S(1) / std::sqrt(S(cfg.d_k));
  std::vector<Var<S>> heads;
  heads.reserve(static_cast<std::size_t>(cfg.heads));
  for (int h = 0; h < cfg.heads; ++h) {
    Var<S> qi = slice_cols(q, Eigen::Index(h) * cfg.d_k, cfg.d_k);
    Var<S> ki = slice_cols(k, Eigen::Index(h) * cfg.d_k, cfg.d_k);
    Var<S> vi = slice_cols(v, Eigen::Index(h) * cfg.d_v, cfg.d_v);
    Var<S> scores = scale(matmul_nt(qi, ki), inv_sqrt_dk);
    Var<S> weights = causal ? causal_softmax_rows(scores) : softmax_rows(scores);
    if (opts.mode == RunMode::train)
      weights = dropout(weights, cfg.p_dattn, *opts.rng, opts.mode);
    heads.push_back(matmul(weights, vi));
  }
  return matmul(concat_cols(heads), wo);
}

// Post-sublayer convention: layer_norm(x + dropout(sub)).
template <class S>
Var<S> residual_norm(Tape<S>& tape, ParamStore<S>& store, const std::string& ln,
                     Var<S> x, Var<S> sub, const ModelConfig& cfg,
                     const ForwardOptions& opts) {
  Var<S> s = sub;
  if (opts.mode == RunMode::train) s = dropout(s, cfg.p_drop, *opts.rng, opts.mode);
  return layer_norm(add(x, s), tape.param(store, ln + ".g"),
                    tape.param(store, ln + ".b"), S(k_layer_norm_eps));
}

inline void validate_indices(const std::vector<std::int32_t>& idx, const char* what) {
  for (std::size_t i = 0; i < idx.size(); ++i)
    if (idx[i] != k_no_index && (idx[i] < 0 || idx[i] >= static_cast<std::int32_t>(i)))
      fail(ErrorCode::MaskViolation,
           std::string(what) + " index at position " + std::to_string(i) +
               " references a non-earlier position");
}

}  // namespace detail

// Encoder: input TCB over (own, parent, sibling) embeddings, then n_layers of
// unmasked self-attention + TCB, each under a post-sublayer residual norm.
// No positional encoding anywhere: position enters only through the tree
// indices.
template <class S>
Var<S> encoder_forward(Tape<S>& tape, const DfTree& src, ParamStore<S>& store,
                       const ModelConfig& cfg, const ForwardOptions& opts) {
  if (src.size() == 0) fail(ErrorCode::MalformedTree, "empty source tree");
  detail::validate_indices(src.parent_idx, "parent");
  detail::validate_indices(src.sibling_idx, "sibling");
  Var<S> table = tape.param(store, "src_embed");
  Var<S> e = embed(table, src.tokens);
  if (opts.mode == RunMode::train)
    e = word_dropout(e, cfg.p_des, *opts.rng, opts.mode);

  auto in = detail::tcb_vars(tape, store, "enc.in");
  Var<S> xp = gather_rows(e, src.parent_idx, in.v_p);
  Var<S> xs = gather_rows(e, src.sibling_idx, in.v_s);
  Var<S> h = detail::tcb_apply(std::optional<Var<S>>(e), xp, xs, in, cfg, opts);

  for (int l = 0; l < cfg.n_layers; ++l) {
    std::string p = "enc.l" + std::to_string(l);
    if (!opts.ablate_self_attention) {
      Var<S> a = detail::multihead_attention(tape, store, p + ".attn", h, h,
                                             /*causal=*/false, cfg, opts);
      h = detail::residual_norm(tape, store, p + ".ln1", h, a, cfg, opts);
    }
    auto w = detail::tcb_vars(tape, store, p + ".tcb");
    Var<S> tp = gather_rows(h, src.parent_idx, w.v_p);
    Var<S> ts = gather_rows(h, src.sibling_idx, w.v_s);
    Var<S> f = detail::tcb_apply(std::optional<Var<S>>(h), tp, ts, w, cfg, opts);
    h = detail::residual_norm(tape, store, p + ".ln2", h, f, cfg, opts);
  }
  return h;
}

namespace detail {

// Shared decoder stack. `enc` present: full decoder. `enc` absent: language
// model; the encoder-decoder attention contributes nothing but its residual
// layer-norm stays, so a decoder whose cross projections are zero computes
// exactly the same function.
template <class S>
Var<S> decoder_stack(Tape<S>& tape, const DecodeStream& stream,
                     std::optional<Var<S>> enc, ParamStore<S>& store,
                     const ModelConfig& cfg, const ForwardOptions& opts) {
  if (stream.size() == 0) fail(ErrorCode::MalformedTree, "empty decoder stream");
  validate_indices(stream.parent_step, "parent");
  validate_indices(stream.sibling_step, "sibling");
  Var<S> table = tape.param(store, "tgt_embed");
  Var<S> e = embed(table, stream.tokens);
  if (opts.mode == RunMode::train)
    e = word_dropout(e, cfg.p_det, *opts.rng, opts.mode);

  auto in = tcb_vars(tape, store, "dec.in");
  Var<S> xp = gather_rows(e, stream.parent_step, in.v_p);
  Var<S> xs = gather_rows(e, stream.sibling_step, in.v_s);
  Var<S> h = tcb_apply<S>(std::nullopt, xp, xs, in, cfg, opts);

  for (int l = 0; l < cfg.n_layers; ++l) {
    std::string p = "dec.l" + std::to_string(l);
    if (!opts.ablate_self_attention) {
      Var<S> a = multihead_attention(tape, store, p + ".self", h, h,
                                     /*causal=*/true, cfg, opts);
      h = residual_norm(tape, store, p + ".ln1", h, a, cfg, opts);
    }
    if (enc.has_value()) {
      Var<S> c = multihead_attention(tape, store, p + ".cross", h, *enc,
                                     /*causal=*/false, cfg, opts);
      h = residual_norm(tape, store, p + ".ln2", h, c, cfg, opts);
    } else {
      h = layer_norm(h, tape.param(store, p + ".ln2.g"),
                     tape.param(store, p + ".ln2.b"), S(k_layer_norm_eps));
    }
    auto w = tcb_vars(tape, store, p + ".tcb");
    Var<S> tp = gather_rows(h, stream.parent_step, w.v_p);
    Var<S> ts = gather_rows(h, stream.sibling_step, w.v_s);
    Var<S> f = tcb_apply(std::optional<Var<S>>(h), tp, ts, w, cfg, opts);
    h = residual_norm(tape, store, p + ".ln3", h, f, cfg, opts);
  }
  return add_bias(matmul(h, tape.param(store, "out.w")), tape.param(store, "out.b"));
}

}  // namespace detail

// Decoder: one logits row per stream step; step s sees embeddings of its
// parent/sibling context and, through the causal self-attention, the states
// of steps <= s, never the token emitted at s itself.
template <class S>
Var<S> decoder_forward(Tape<S>& tape, Var<S> enc_states, const DecodeStream& stream,
                       ParamStore<S>& store, const ModelConfig& cfg,
                       const ForwardOptions& opts) {
  return detail::decoder_stack(tape, stream, std::optional<Var<S>>(enc_states),
                               store, cfg, opts);
}

// Decoder-only language model: the same stack without the encoder-decoder
// attention mechanism.
template <class S>
Var<S> lm_forward(Tape<S>& tape, const DecodeStream& stream, ParamStore<S>& store,
                  const ModelConfig& cfg, const ForwardOptions& opts) {
  return detail::decoder_stack<S>(tape, stream, std::nullopt, store, cfg, opts);
}

// Single-vector TCB, the unit-test surface: absent contexts fall back to the
// block's learned v_p / v_s rows.
template <class S>
Mat<S> tcb(std::optional<Mat<S>> x_t, std::optional<Mat<S>> x_p,
           std::optional<Mat<S>> x_s, ParamStore<S>& store,
           const std::string& prefix, const ModelConfig& cfg) {
  Tape<S> tape;
  auto w = detail::tcb_vars(tape, store, prefix);
  if (x_t.has_value() != w.w_t.has_value())
    fail(ErrorCode::ShapeMismatch, "x_t presence must match the block's w_t");
  ForwardOptions opts;  // eval: no dropout
  std::optional<Var<S>> xt;
  if (x_t) xt = tape.constant(*x_t);
  Var<S> xp = x_p ? tape.constant(*x_p) : w.v_p;
  Var<S> xs = x_s ? tape.constant(*x_s) : w.v_s;
  return detail::tcb_apply(xt, xp, xs, w, cfg, opts).value();
}

// Gather passes a single forward is expected to build: two per TCB instance.
inline int expected_encoder_gathers(const ModelConfig& cfg) {
  return 2 * (cfg.n_layers + 1);
}
inline int expected_decoder_gathers(const ModelConfig& cfg) {
  return 2 * (cfg.n_layers + 1);
}

}  // namespace treeformer
