#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "treeformer/edit_distance.hpp"
#include "treeformer/generation.hpp"
#include "treeformer/model.hpp"
#include "treeformer/tape.hpp"

namespace treeformer {

enum class TrainMode { tree2tree, lm_pretrain, denoise_pretrain };

const char* train_mode_name(TrainMode mode);
TrainMode train_mode_from_name(std::string_view name);

struct TrainConfig {
  double lr_scale = -1.0;  // < 0 means d_model^(-0.5)
  int warmup_steps = 4000;
  int train_steps = 100'000;
  int batch_cap = 20'000;  // nodes per batch, source + target
  double edit_weight = 3.0;
  TrainMode mode = TrainMode::tree2tree;
  std::uint64_t seed = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.98;
  double adam_eps = 1e-9;
  int checkpoint_interval = 0;  // 0: only the final checkpoint
  int log_interval = 50;

  void validate() const {
    if (warmup_steps < 1) fail(ErrorCode::BadConfig, "warmup_steps must be >= 1");
    if (train_steps < 0) fail(ErrorCode::BadConfig, "train_steps must be >= 0");
    if (batch_cap < 1) fail(ErrorCode::BadConfig, "batch_cap must be >= 1");
  }
};

// Inverse-square-root decay with linear warmup:
// scale * min(step^-0.5, step * warmup^-1.5); both branches meet at warmup.
inline double lr(std::int64_t step, const TrainConfig& cfg, int d_model) {
  if (step < 1) fail(ErrorCode::BadConfig, "lr is defined for step >= 1");
  double scale = cfg.lr_scale < 0.0 ? std::pow(double(d_model), -0.5) : cfg.lr_scale;
  double s = double(step);
  double w = double(cfg.warmup_steps);
  return scale * std::min(std::pow(s, -0.5), s * std::pow(w, -1.5));
}

// ---------------------------------------------------------------------------
// loss
// ---------------------------------------------------------------------------

// Label-smoothed weighted NLL, unnormalized:
//   sum_t lambda_t * [ -(1-eps)*logP(y_t) - eps/K * sum_{k non-pad} logP(k) ]
// where K counts the non-Pad vocabulary. Training divides by sum(lambda).
template <class S>
Var<S> edit_weighted_nll_sum(Var<S> logits, const std::vector<TokenId>& targets,
                             const std::vector<double>& lambda, double eps_ls,
                             TokenId pad_id) {
  const auto rows = logits.rows();
  if (static_cast<Eigen::Index>(targets.size()) != rows ||
      static_cast<Eigen::Index>(lambda.size()) != rows)
    fail(ErrorCode::ShapeMismatch, "loss needs one target and one lambda per row");
  Tape<S>& tape = *logits.tape;
  Var<S> logp = log_softmax_rows(logits);
  Mat<S> lam(rows, 1);
  for (Eigen::Index i = 0; i < rows; ++i) lam(i, 0) = S(lambda[static_cast<std::size_t>(i)]);

  Var<S> picked = rows_pick(logp, targets);
  Var<S> total = weighted_sum(picked, Mat<S>(lam * S(-(1.0 - eps_ls))));
  if (eps_ls > 0.0) {
    const auto vocab = logits.cols();
    Mat<S> non_pad = Mat<S>::Ones(vocab, 1);
    non_pad(pad_id, 0) = S(0);
    const double k_smooth = double(vocab - 1);
    Var<S> spread = matmul(logp, tape.constant(std::move(non_pad)));
    total = add(total, weighted_sum(spread, Mat<S>(lam * S(-eps_ls / k_smooth))));
  }
  return total;
}

// The normalized objective: edit_weighted_nll_sum / sum(lambda).
template <class S>
Var<S> edit_weighted_mle(Var<S> logits, const std::vector<TokenId>& targets,
                         const std::vector<double>& lambda, double eps_ls,
                         TokenId pad_id) {
  double denom = 0.0;
  for (double l : lambda) denom += l;
  Var<S> total = edit_weighted_nll_sum(logits, targets, lambda, eps_ls, pad_id);
  return scale(total, S(1.0 / denom));
}

// ---------------------------------------------------------------------------
// data
// ---------------------------------------------------------------------------

// A training pair with everything the forward pass needs precomputed: the
// teacher-forced target stream and its per-step loss weights (EndOfSiblings
// steps always weigh 1).
struct PreparedPair {
  DfTree src;
  DfTree tgt;
  DecodeStream tgt_stream;
  std::vector<double> lambda;
  int node_cost = 0;  // src + tgt node count, the batching unit
};

PreparedPair prepare_pair(const TreeNode& src, const TreeNode& tgt,
                          const Vocabulary& vocab, TrainMode mode,
                          double edit_weight);

// Sorted-greedy packing: pairs ascend by node_cost (ties keep input order),
// batches close when the next pair would exceed `cap` nodes.
std::vector<std::vector<std::size_t>> batch_by_size(const std::vector<int>& sizes,
                                                    int cap);

// ---------------------------------------------------------------------------
// optimizer
// ---------------------------------------------------------------------------

struct AdamState {
  struct Moments {
    Mat<float> m;
    Mat<float> v;
  };
  std::map<std::string, Moments> moments;
  std::int64_t t = 0;

  static AdamState init(const ParamStore<float>& params);
};

void adam_step(ParamStore<float>& params, AdamState& state, double step_lr,
               double beta1, double beta2, double eps);

// ---------------------------------------------------------------------------
// trainer
// ---------------------------------------------------------------------------

struct StepRecord {
  std::int64_t step;
  double lr;
  double loss;
  TrainMode mode;
  double wall_ms;
};

// Single-process training loop with deterministic batching and replay: the
// batch order of epoch e is a pure function of (seed, e), so a restored
// checkpoint resumes mid-epoch exactly.
class Trainer {
 public:
  Trainer(ModelConfig model_cfg, TrainConfig train_cfg, Vocabulary vocab,
          std::vector<PreparedPair> data);

  StepRecord step();  // one optimizer update
  std::int64_t steps_done() const { return step_; }

  ParamStore<float>& params() { return params_; }
  const ParamStore<float>& params() const { return params_; }
  const ModelConfig& model_config() const { return model_cfg_; }
  const TrainConfig& train_config() const { return train_cfg_; }
  const Vocabulary& vocab() const { return vocab_; }

  // Checkpoint state surface (serialized by checkpoint.cpp).
  AdamState& adam() { return adam_; }
  std::string rng_state() const;
  void set_rng_state(const std::string& text);
  std::int64_t epoch() const { return epoch_; }
  std::int64_t batch_index() const { return batch_index_; }
  void set_step(std::int64_t step) { step_ = step; }
  void set_position(std::int64_t epoch, std::int64_t batch_index);

 private:
  void make_epoch_batches();
  double batch_loss_and_grads(const std::vector<std::size_t>& batch);

  ModelConfig model_cfg_;
  TrainConfig train_cfg_;
  Vocabulary vocab_;
  std::vector<PreparedPair> data_;
  ParamStore<float> params_;
  AdamState adam_;
  Rng rng_;
  std::int64_t step_ = 0;
  std::int64_t epoch_ = 0;
  std::int64_t batch_index_ = 0;
  std::vector<std::vector<std::size_t>> epoch_batches_;

 public:
  // Used by checkpoint restore; params/adam are moved in.
  void restore(ParamStore<float> params, AdamState adam, std::int64_t step,
               const std::string& rng_state, std::int64_t epoch,
               std::int64_t batch_index);
};

// Builds the full tree2tree (or lm / denoise) loss for one batch on the
// given tape; shared between training (float) and gradient checks (double).
template <class S>
Var<S> batch_loss(Tape<S>& tape, const std::vector<const PreparedPair*>& batch,
                  ParamStore<S>& store, const ModelConfig& cfg, TrainMode mode,
                  const ForwardOptions& opts, TokenId pad_id) {
  double lambda_total = 0.0;
  for (const auto* pair : batch)
    for (double l : pair->lambda) lambda_total += l;
  if (lambda_total <= 0.0) fail(ErrorCode::ShapeMismatch, "empty batch");

  Var<S> total;
  bool first = true;
  for (const auto* pair : batch) {
    Var<S> logits;
    if (mode == TrainMode::lm_pretrain) {
      logits = lm_forward(tape, pair->tgt_stream, store, cfg, opts);
    } else {
      Var<S> enc = encoder_forward(tape, pair->src, store, cfg, opts);
      logits = decoder_forward(tape, enc, pair->tgt_stream, store, cfg, opts);
    }
    Var<S> nll = edit_weighted_nll_sum(logits, pair->tgt_stream.tokens,
                                       pair->lambda, cfg.eps_ls, pad_id);
    total = first ? nll : add(total, nll);
    first = false;
  }
  return scale(total, S(1.0 / lambda_total));
}

// Teacher-forced token accuracy over whole streams (argmax == target).
double teacher_forced_accuracy(ParamStore<float>& params, const ModelConfig& cfg,
                               const std::vector<PreparedPair>& pairs, TrainMode mode);

}  // namespace treeformer
