#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "actir/mlp.hpp"
#include "actir/rng.hpp"
#include "actir/tensor.hpp"

namespace actir {

/// How the representation output is split: the first k units feed the fixed
/// invariant head, the remaining m carry the domain-adaptive part.
struct RepSplit {
  std::size_t k = 2;
  std::size_t m = 1;

  std::size_t width() const { return k + m; }
};

struct ModelParams {
  RepSplit split;
  std::vector<std::size_t> layer_sizes;     // input..hidden..k+m
  Mlp phi;
  Tensor w_base;                            // [k, k+m] = [I | 0], never trained
  std::map<std::string, Tensor> w_domain;   // domain id -> [k, k+m]

  Tensor& head(const std::string& domain_id);
  const Tensor& head(const std::string& domain_id) const;
  void add_head(const std::string& domain_id);
};

/// Builds the [I | 0] invariant head for a split.
Tensor make_base_head(const RepSplit& split);

ModelParams init_model(const RepSplit& split, const std::vector<std::size_t>& layer_sizes,
                       Rng& rng);

/// Representation Phi(x) for a batch x [n, input].
Tensor representation(const ModelParams& params, const Tensor& x);

/// g(X) = W_base * Phi(x): the first k representation units, per row.
Tensor invariant_logits(const ModelParams& params, const Tensor& x);

/// f^e(X) = (W_base + W_e) * Phi(x).
Tensor domain_logits(const ModelParams& params, const std::string& domain_id, const Tensor& x);

/// Logits from a precomputed representation under an arbitrary linear head.
Tensor head_logits(const Tensor& rep, const Tensor& head);

/// JSON checkpoint holding split, layer sizes, and all weights; doubles
/// round-trip exactly.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace actir
