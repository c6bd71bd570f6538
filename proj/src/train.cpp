#include "treeformer/train.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <sstream>

namespace treeformer {

const char* train_mode_name(TrainMode mode) {
  switch (mode) {
    case TrainMode::tree2tree: return "tree2tree";
    case TrainMode::lm_pretrain: return "lm_pretrain";
    case TrainMode::denoise_pretrain: return "denoise_pretrain";
  }
  return "?";
}

TrainMode train_mode_from_name(std::string_view name) {
  if (name == "tree2tree") return TrainMode::tree2tree;
  if (name == "lm_pretrain") return TrainMode::lm_pretrain;
  if (name == "denoise_pretrain") return TrainMode::denoise_pretrain;
  fail(ErrorCode::BadConfig, "unknown mode '" + std::string(name) + "'");
}

PreparedPair prepare_pair(const TreeNode& src, const TreeNode& tgt,
                          const Vocabulary& vocab, TrainMode mode,
                          double edit_weight) {
  PreparedPair pair;
  pair.src = linearize(src);
  pair.tgt = linearize(tgt);
  pair.tgt_stream = teacher_stream(pair.tgt, vocab);
  pair.node_cost = static_cast<int>(pair.src.size() + pair.tgt.size());

  // Per-step weights: node steps inherit the tree-edit labeling, the
  // EndOfSiblings steps weigh 1.
  pair.lambda.assign(pair.tgt_stream.size(), 1.0);
  if (mode == TrainMode::tree2tree && edit_weight != 1.0) {
    EditLabeling labeling = label_edits(src, tgt, edit_weight);
    for (std::size_t s = 0; s < pair.tgt_stream.size(); ++s) {
      std::int32_t node = pair.tgt_stream.node_index[s];
      if (node != k_no_index)
        pair.lambda[s] = labeling.lambda[static_cast<std::size_t>(node)];
    }
  }
  return pair;
}

std::vector<std::vector<std::size_t>> batch_by_size(const std::vector<int>& sizes,
                                                    int cap) {
  std::vector<std::size_t> order(sizes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sizes[a] < sizes[b]; });
  std::vector<std::vector<std::size_t>> batches;
  std::vector<std::size_t> current;
  long long total = 0;
  for (std::size_t idx : order) {
    if (sizes[idx] > cap)
      fail(ErrorCode::OversizedExample,
           "example of size " + std::to_string(sizes[idx]) + " exceeds batch cap " +
               std::to_string(cap));
    if (!current.empty() && total + sizes[idx] > cap) {
      batches.push_back(std::move(current));
      current.clear();
      total = 0;
    }
    current.push_back(idx);
    total += sizes[idx];
  }
  if (!current.empty()) batches.push_back(std::move(current));
  return batches;
}

AdamState AdamState::init(const ParamStore<float>& params) {
  AdamState state;
  for (const auto& [path, slot] : params) {
    Moments m;
    m.m = Mat<float>::Zero(slot.value.rows(), slot.value.cols());
    m.v = Mat<float>::Zero(slot.value.rows(), slot.value.cols());
    state.moments.emplace(path, std::move(m));
  }
  return state;
}

void adam_step(ParamStore<float>& params, AdamState& state, double step_lr,
               double beta1, double beta2, double eps) {
  state.t += 1;
  const float b1 = static_cast<float>(beta1);
  const float b2 = static_cast<float>(beta2);
  const float correct1 =
      static_cast<float>(1.0 / (1.0 - std::pow(beta1, double(state.t))));
  const float correct2 =
      static_cast<float>(1.0 / (1.0 - std::pow(beta2, double(state.t))));
  const float flr = static_cast<float>(step_lr);
  const float feps = static_cast<float>(eps);
  for (auto& [path, slot] : params) {
    auto& mo = state.moments.at(path);
    mo.m = b1 * mo.m + (1.0f - b1) * slot.grad;
    mo.v = (b2 * mo.v.array() + (1.0f - b2) * slot.grad.array().square()).matrix();
    auto m_hat = (mo.m.array() * correct1).eval();
    auto v_hat = (mo.v.array() * correct2).eval();
    slot.value.array() -= flr * m_hat / (v_hat.sqrt() + feps);
  }
}

Trainer::Trainer(ModelConfig model_cfg, TrainConfig train_cfg, Vocabulary vocab,
                 std::vector<PreparedPair> data)
    : model_cfg_(model_cfg),
      train_cfg_(train_cfg),
      vocab_(std::move(vocab)),
      data_(std::move(data)),
      rng_(train_cfg.seed) {
  model_cfg_.validate();
  train_cfg_.validate();
  if (data_.empty()) fail(ErrorCode::DataExhausted, "no training pairs");
  params_ = make_params<float>(model_cfg_, &rng_);
  adam_ = AdamState::init(params_);
  make_epoch_batches();
}

void Trainer::make_epoch_batches() {
  std::vector<int> sizes(data_.size());
  for (std::size_t i = 0; i < data_.size(); ++i) sizes[i] = data_[i].node_cost;
  epoch_batches_ = batch_by_size(sizes, train_cfg_.batch_cap);
  // Shuffle batch order with an epoch-local generator so resume can rebuild
  // any epoch without replaying earlier draws.
  Rng order_rng(train_cfg_.seed * 0x9e3779b97f4a7c15ull + 0xda3e39cb94b95bdbull +
                static_cast<std::uint64_t>(epoch_));
  std::shuffle(epoch_batches_.begin(), epoch_batches_.end(), order_rng);
}

double Trainer::batch_loss_and_grads(const std::vector<std::size_t>& batch) {
  params_.zero_grads();
  Tape<float> tape;
  ForwardOptions opts;
  opts.mode = RunMode::train;
  opts.rng = &rng_;
  std::vector<const PreparedPair*> items;
  items.reserve(batch.size());
  for (std::size_t idx : batch) items.push_back(&data_[idx]);
  Var<float> loss = batch_loss(tape, items, params_, model_cfg_, train_cfg_.mode,
                               opts, vocab_.pad_id());
  double value = loss.value()(0, 0);
  tape.backward(loss);
  tape.accumulate_param_grads(params_);
  return value;
}

StepRecord Trainer::step() {
  auto start = std::chrono::steady_clock::now();
  if (batch_index_ >= static_cast<std::int64_t>(epoch_batches_.size())) {
    ++epoch_;
    batch_index_ = 0;
    make_epoch_batches();
  }
  const auto& batch = epoch_batches_[static_cast<std::size_t>(batch_index_)];
  ++batch_index_;

  double loss = batch_loss_and_grads(batch);
  ++step_;
  double step_lr = lr(step_, train_cfg_, model_cfg_.d_model);
  adam_step(params_, adam_, step_lr, train_cfg_.adam_beta1, train_cfg_.adam_beta2,
            train_cfg_.adam_eps);

  auto end = std::chrono::steady_clock::now();
  StepRecord rec;
  rec.step = step_;
  rec.lr = step_lr;
  rec.loss = loss;
  rec.mode = train_cfg_.mode;
  rec.wall_ms = std::chrono::duration<double, std::milli>(end - start).count();
  return rec;
}

std::string Trainer::rng_state() const {
  std::ostringstream out;
  out << rng_;
  return out.str();
}

void Trainer::set_rng_state(const std::string& text) {
  std::istringstream in(text);
  in >> rng_;
  if (!in) fail(ErrorCode::BadConfig, "invalid RNG state");
}

void Trainer::set_position(std::int64_t epoch, std::int64_t batch_index) {
  epoch_ = epoch;
  batch_index_ = batch_index;
  make_epoch_batches();
}

void Trainer::restore(ParamStore<float> params, AdamState adam, std::int64_t step,
                      const std::string& rng_state_text, std::int64_t epoch,
                      std::int64_t batch_index) {
  params_ = std::move(params);
  adam_ = std::move(adam);
  step_ = step;
  set_rng_state(rng_state_text);
  set_position(epoch, batch_index);
}

double teacher_forced_accuracy(ParamStore<float>& params, const ModelConfig& cfg,
                               const std::vector<PreparedPair>& pairs, TrainMode mode) {
  std::int64_t hits = 0;
  std::int64_t total = 0;
  ForwardOptions opts;  // eval
  for (const auto& pair : pairs) {
    Tape<float> tape;
    Var<float> logits;
    if (mode == TrainMode::lm_pretrain) {
      logits = lm_forward(tape, pair.tgt_stream, params, cfg, opts);
    } else {
      Var<float> enc = encoder_forward(tape, pair.src, params, cfg, opts);
      logits = decoder_forward(tape, enc, pair.tgt_stream, params, cfg, opts);
    }
    const Mat<float>& rows = logits.value();
    for (Eigen::Index s = 0; s < rows.rows(); ++s) {
      Eigen::Index best = 0;
      rows.row(s).maxCoeff(&best);
      hits += best == pair.tgt_stream.tokens[static_cast<std::size_t>(s)];
      ++total;
    }
  }
  return total == 0 ? 0.0 : double(hits) / double(total);
}

}  // namespace treeformer
