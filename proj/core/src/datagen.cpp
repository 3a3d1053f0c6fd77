#include "actir/datagen.hpp"

#include <stdexcept>

namespace actir {

int rad_sample(double beta, Rng& rng) {
  if (beta < 0.0 || beta > 1.0) {
    throw std::invalid_argument("rad_sample: beta must be in [0,1], got " + std::to_string(beta));
  }
  return rng.uniform() < beta ? 1 : -1;
}

DomainDataset gen_synthetic_domain(const std::string& domain_id, double beta, std::size_t n,
                                   Rng& rng) {
  DomainDataset dataset{domain_id, beta, {}};
  dataset.examples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y_sign = rad_sample(0.5, rng);
    const int x_stable = y_sign * rad_sample(0.75, rng);
    const int z = y_sign * rad_sample(beta, rng);
    const int x_unstable = z;
    LabeledExample ex;
    ex.x = {static_cast<double>(x_unstable), static_cast<double>(x_stable)};
    ex.y = y_sign > 0 ? 1 : 0;
    ex.z = z;
    dataset.examples.push_back(std::move(ex));
  }
  return dataset;
}

DomainDataset gen_counterexample_domain(const std::string& domain_id, double beta, std::size_t n,
                                        Rng& rng) {
  if (beta < 0.0 || beta > 1.0) {
    throw std::invalid_argument("gen_counterexample_domain: beta must be in [0,1]");
  }
  DomainDataset dataset{domain_id, beta, {}};
  dataset.examples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int x_y = rng.bernoulli(0.5) ? 1 : 0;
    const int u = rng.bernoulli(0.75) ? 1 : 0;
    const int y = x_y ^ u;
    const int u_z = rng.bernoulli(beta) ? 1 : 0;
    const int z = y ^ u_z;
    const int x_z = z ^ x_y;
    LabeledExample ex;
    ex.x = {static_cast<double>(x_y), static_cast<double>(x_z)};
    ex.y = y;
    ex.z = z;
    dataset.examples.push_back(std::move(ex));
  }
  return dataset;
}

DomainDataset build_color_mnist(const std::string& domain_id, const IdxImages& images,
                                const IdxLabels& labels, const std::vector<std::size_t>& indices,
                                double beta, Rng& rng, std::size_t side, double label_flip_prob) {
  if (images.count != labels.count) {
    throw std::invalid_argument("build_color_mnist: " + std::to_string(images.count) +
                                " images vs " + std::to_string(labels.count) + " labels");
  }
  if (beta < 0.0 || beta > 1.0) {
    throw std::invalid_argument("build_color_mnist: beta must be in [0,1]");
  }
  if (side == 0 || images.rows % side != 0 || images.cols % side != 0) {
    throw std::invalid_argument("build_color_mnist: side " + std::to_string(side) +
                                " must evenly divide " + std::to_string(images.rows) + "x" +
                                std::to_string(images.cols));
  }
  const std::size_t pool_r = images.rows / side;
  const std::size_t pool_c = images.cols / side;
  const std::size_t pixels_per_channel = side * side;

  DomainDataset dataset{domain_id, beta, {}};
  dataset.examples.reserve(indices.size());
  for (std::size_t idx : indices) {
    if (idx >= images.count) {
      throw std::invalid_argument("build_color_mnist: image index " + std::to_string(idx) +
                                  " out of range");
    }
    int y = labels.labels[idx] <= 4 ? 0 : 1;
    if (rng.bernoulli(label_flip_prob)) y = 1 - y;
    const int z = rng.bernoulli(beta) ? y : 1 - y;

    LabeledExample ex;
    ex.x.assign(2 * pixels_per_channel, 0.0);
    const std::uint8_t* img = images.pixels.data() + idx * images.rows * images.cols;
    const std::size_t offset = static_cast<std::size_t>(z) * pixels_per_channel;
    for (std::size_t r = 0; r < side; ++r) {
      for (std::size_t c = 0; c < side; ++c) {
        double sum = 0.0;
        for (std::size_t pr = 0; pr < pool_r; ++pr) {
          for (std::size_t pc = 0; pc < pool_c; ++pc) {
            sum += img[(r * pool_r + pr) * images.cols + (c * pool_c + pc)];
          }
        }
        ex.x[offset + r * side + c] = sum / (255.0 * static_cast<double>(pool_r * pool_c));
      }
    }
    ex.y = y;
    ex.z = z;
    dataset.examples.push_back(std::move(ex));
  }
  return dataset;
}

}  // namespace actir
