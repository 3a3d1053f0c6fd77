#pragma once

#include <vector>

#include "actir/rng.hpp"
#include "actir/tape.hpp"
#include "actir/tensor.hpp"

namespace actir {

struct DenseLayer {
  Tensor w;  // [out, in]
  Tensor b;  // [out]
};

/// Fully connected net, rectifier between layers, linear final layer.
struct Mlp {
  std::vector<DenseLayer> layers;

  std::size_t input_width() const { return layers.front().w.cols(); }
  std::size_t output_width() const { return layers.back().w.rows(); }
};

/// Weights uniform in +-1/sqrt(fan_in), biases zero.
Mlp init_mlp(const std::vector<std::size_t>& layer_sizes, Rng& rng);

/// Tape handles for one model's layers, bound to a specific Tape.
struct MlpVars {
  std::vector<Var> w;
  std::vector<Var> b;
};

MlpVars bind_mlp(Tape& tape, const Mlp& mlp);

/// Batched forward pass recorded on the tape: x is [n, in], result [n, out].
Var mlp_apply(Tape& tape, const MlpVars& vars, Var x);

/// Forward pass without recording, for evaluation-only paths.
Tensor mlp_eval(const Mlp& mlp, const Tensor& x);

}  // namespace actir
