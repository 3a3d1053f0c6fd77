#pragma once

#include <optional>
#include <string>
#include <vector>

#include "actir/idx.hpp"
#include "actir/rng.hpp"

namespace actir {

struct LabeledExample {
  std::vector<double> x;
  int y = 0;                  // class index
  std::optional<int> z;       // unstable latent factor, kept for diagnostics
};

struct DomainDataset {
  std::string domain_id;
  double beta = 0.0;
  std::vector<LabeledExample> examples;

  std::size_t size() const { return examples.size(); }
  std::size_t feature_width() const { return examples.empty() ? 0 : examples.front().x.size(); }
};

enum class GeneratorKind { Synthetic, Counterexample, ColorMnist };

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::Synthetic;
  std::vector<double> betas;     // one per domain
  std::vector<std::size_t> n;    // examples per domain
  std::uint64_t seed = 0;
};

/// Random sign: +1 with probability beta, otherwise -1.
int rad_sample(double beta, Rng& rng);

/// Two-feature anti-causal domain: the label drives both a stable feature
/// (agreement 0.75 in every domain) and an unstable one (agreement beta).
/// x = (unstable, stable) in {-1,+1}^2, y in {0,1}, z records the unstable
/// feature's sign.
DomainDataset gen_synthetic_domain(const std::string& domain_id, double beta, std::size_t n,
                                   Rng& rng);

/// XOR domain where a direct edge between the two observed features breaks
/// the conditional-independence signature. x = (x_y, x_z) in {0,1}^2.
DomainDataset gen_counterexample_domain(const std::string& domain_id, double beta, std::size_t n,
                                        Rng& rng);

/// Binary MNIST with a color channel tied to the (noisy) label. Digits 0-4
/// map to class 0, 5-9 to class 1; the label flips with label_flip_prob; the
/// color z agrees with the flipped label with probability beta. Pixels are
/// average-pooled to side x side and written into the channel selected by z;
/// the other channel is zero. x layout: [channel0 pixels..., channel1 pixels...].
DomainDataset build_color_mnist(const std::string& domain_id, const IdxImages& images,
                                const IdxLabels& labels, const std::vector<std::size_t>& indices,
                                double beta, Rng& rng, std::size_t side,
                                double label_flip_prob = 0.25);

}  // namespace actir
