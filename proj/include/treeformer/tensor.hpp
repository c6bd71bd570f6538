#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>

#include <random>

#include "treeformer/errors.hpp"
#include "treeformer/rng.hpp"

namespace treeformer {

// Dense row-major matrix, the only tensor shape in this codebase. Row
// vectors are 1 x n, sequences are T x d, scalars 1 x 1.
template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class RunMode { train, eval };

template <class S>
void check_finite(const Mat<S>& m, const char* what) {
  if (!m.allFinite()) fail(ErrorCode::NonFinite, std::string(what) + " produced NaN/Inf");
}

// Named parameters with a same-shape gradient accumulator each. std::map
// keeps iteration order deterministic for init, updates and checkpoints.
template <class S>
class ParamStore {
 public:
  struct Slot {
    Mat<S> value;
    Mat<S> grad;
  };

  Mat<S>& add(const std::string& path, Eigen::Index rows, Eigen::Index cols) {
    if (slots_.contains(path))
      fail(ErrorCode::BadConfig, "duplicate parameter path " + path);
    Slot& slot = slots_[path];
    slot.value = Mat<S>::Zero(rows, cols);
    slot.grad = Mat<S>::Zero(rows, cols);
    return slot.value;
  }

  bool has(const std::string& path) const { return slots_.contains(path); }

  Slot& at(const std::string& path) {
    auto it = slots_.find(path);
    if (it == slots_.end()) fail(ErrorCode::BadConfig, "no parameter " + path);
    return it->second;
  }
  const Slot& at(const std::string& path) const {
    auto it = slots_.find(path);
    if (it == slots_.end()) fail(ErrorCode::BadConfig, "no parameter " + path);
    return it->second;
  }

  void zero_grads() {
    for (auto& [path, slot] : slots_) slot.grad.setZero();
  }

  std::size_t size() const { return slots_.size(); }
  auto begin() { return slots_.begin(); }
  auto end() { return slots_.end(); }
  auto begin() const { return slots_.begin(); }
  auto end() const { return slots_.end(); }

  template <class T>
  ParamStore<T> cast() const {
    ParamStore<T> out;
    for (const auto& [path, slot] : slots_) {
      out.add(path, slot.value.rows(), slot.value.cols()) =
          slot.value.template cast<T>();
    }
    return out;
  }

 private:
  std::map<std::string, Slot> slots_;
};

}  // namespace treeformer
