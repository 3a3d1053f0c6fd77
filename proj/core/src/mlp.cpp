#include "actir/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace actir {

Mlp init_mlp(const std::vector<std::size_t>& layer_sizes, Rng& rng) {
  if (layer_sizes.size() < 2) {
    throw std::invalid_argument("init_mlp: need at least input and output widths");
  }
  Mlp mlp;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const std::size_t in = layer_sizes[l], out = layer_sizes[l + 1];
    if (in == 0 || out == 0) throw std::invalid_argument("init_mlp: zero layer width");
    DenseLayer layer{Tensor::zeros({out, in}), Tensor::zeros({out})};
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& v : layer.w.values) v = rng.uniform(-bound, bound);
    mlp.layers.push_back(std::move(layer));
  }
  return mlp;
}

MlpVars bind_mlp(Tape& tape, const Mlp& mlp) {
  MlpVars vars;
  for (const DenseLayer& layer : mlp.layers) {
    vars.w.push_back(tape.leaf(layer.w));
    vars.b.push_back(tape.leaf(layer.b));
  }
  return vars;
}

Var mlp_apply(Tape& tape, const MlpVars& vars, Var x) {
  Var h = x;
  for (std::size_t l = 0; l < vars.w.size(); ++l) {
    const Tensor& w = tape.value(vars.w[l]);
    if (tape.value(h).cols() != w.cols()) {
      throw std::invalid_argument("mlp_apply: layer " + std::to_string(l) + " expects input width " +
                                  std::to_string(w.cols()) + ", got " +
                                  std::to_string(tape.value(h).cols()));
    }
    h = tape.add_row_bias(tape.matmul(h, vars.w[l], false, true), vars.b[l]);
    if (l + 1 < vars.w.size()) h = tape.relu(h);
  }
  return h;
}

Tensor mlp_eval(const Mlp& mlp, const Tensor& x) {
  Tensor h = x;
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    const DenseLayer& layer = mlp.layers[l];
    if (h.cols() != layer.w.cols()) {
      throw std::invalid_argument("mlp_eval: layer " + std::to_string(l) + " expects input width " +
                                  std::to_string(layer.w.cols()) + ", got " +
                                  std::to_string(h.cols()));
    }
    const std::size_t n = h.rows(), out = layer.w.rows(), in = layer.w.cols();
    Tensor next = Tensor::zeros({n, out});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t o = 0; o < out; ++o) {
        double s = layer.b.values[o];
        const double* wrow = layer.w.values.data() + o * in;
        const double* xrow = h.values.data() + i * in;
        for (std::size_t j = 0; j < in; ++j) s += wrow[j] * xrow[j];
        next.at(i, o) = (l + 1 < mlp.layers.size() && s < 0.0) ? 0.0 : s;
      }
    }
    h = std::move(next);
  }
  return h;
}

}  // namespace actir
