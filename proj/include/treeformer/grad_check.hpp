#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "treeformer/tape.hpp"

namespace treeformer {

// Builds the scalar loss for a given parameter state. Called once with
// gradients and many times value-only during finite differencing; it must be
// deterministic (fixed data, dropout off).
using LossBuilder = std::function<Var<double>(Tape<double>&, ParamStore<double>&)>;

struct GradCheckOptions {
  double eps = 1e-5;       // central-difference step, in [1e-6, 1e-4]
  int coords_per_param = 32;
  std::uint64_t seed = 0;  // coordinate sampling
};

struct GradCheckReport {
  struct PerParam {
    std::string path;
    double max_rel_err = 0.0;
    int checked = 0;
    int excluded = 0;  // coordinates skipped for sitting on a relu kink
  };
  std::vector<PerParam> params;
  double max_rel_err = 0.0;
  int total_excluded = 0;
};

namespace detail {

struct ProbeResult {
  double value;
  double relu_margin;
};

inline ProbeResult probe(const LossBuilder& build, ParamStore<double>& store) {
  Tape<double> tape;
  tape.track_relu_margin = true;
  Var<double> loss = build(tape, store);
  return {loss.value()(0, 0), tape.min_relu_margin};
}

}  // namespace detail

// Compares analytic gradients against central finite differences,
// coordinate-wise: |analytic - numeric| / max(|analytic|, |numeric|, 1e-12).
// Coordinates whose perturbed evaluations bring any relu pre-activation
// within eps of its kink are excluded and counted instead of compared.
inline GradCheckReport grad_check(const LossBuilder& build,
                                  ParamStore<double>& store,
                                  GradCheckOptions opt = {}) {
  if (opt.eps < 1e-6 || opt.eps > 1e-4)
    fail(ErrorCode::BadConfig, "grad_check eps must lie in [1e-6, 1e-4]");

  store.zero_grads();
  {
    Tape<double> tape;
    Var<double> loss = build(tape, store);
    tape.backward(loss);
    tape.accumulate_param_grads(store);
  }

  GradCheckReport report;
  Rng rng(opt.seed);
  for (auto& [path, slot] : store) {
    GradCheckReport::PerParam per;
    per.path = path;
    const auto n = static_cast<std::size_t>(slot.value.size());
    std::vector<std::size_t> coords(n);
    for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    if (n > static_cast<std::size_t>(opt.coords_per_param)) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(static_cast<std::size_t>(opt.coords_per_param));
    }
    for (std::size_t c : coords) {
      double* cell = slot.value.data() + c;
      const double saved = *cell;
      *cell = saved + opt.eps;
      auto up = detail::probe(build, store);
      *cell = saved - opt.eps;
      auto down = detail::probe(build, store);
      *cell = saved;
      if (up.relu_margin < opt.eps || down.relu_margin < opt.eps) {
        ++per.excluded;
        continue;
      }
      double numeric = (up.value - down.value) / (2.0 * opt.eps);
      double analytic = slot.grad.data()[c];
      double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
      per.max_rel_err = std::max(per.max_rel_err, std::abs(analytic - numeric) / denom);
      ++per.checked;
    }
    report.max_rel_err = std::max(report.max_rel_err, per.max_rel_err);
    report.total_excluded += per.excluded;
    report.params.push_back(std::move(per));
  }
  return report;
}

}  // namespace treeformer
