#pragma once

#include <cstdint>
#include <string>

#include "treeformer/model.hpp"
#include "treeformer/train.hpp"

namespace treeformer {

// Everything needed to resume training bit-exactly, or to decode: model
// shape, vocabulary, parameters, optimizer moments, step counter, RNG state
// and the data-iterator position.
struct Checkpoint {
  static constexpr int k_format_version = 1;

  ModelConfig model;
  Vocabulary vocab;
  ParamStore<float> params;
  AdamState adam;
  std::int64_t step = 0;
  std::string rng_state;
  std::int64_t epoch = 0;
  std::int64_t batch_index = 0;
};

// Single binary container: magic, a JSON header with the tensor table, then
// raw little-endian float32 data. A human-readable sidecar "<path>.manifest"
// lists tensors and shapes.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace treeformer
