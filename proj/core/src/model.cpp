#include "actir/model.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace actir {

namespace {

nlohmann::json tensor_to_json(const Tensor& t) {
  return nlohmann::json{{"shape", t.shape}, {"values", t.values}};
}

Tensor tensor_from_json(const nlohmann::json& j) {
  return Tensor(j.at("shape").get<std::vector<std::size_t>>(),
                j.at("values").get<std::vector<double>>());
}

}  // namespace

Tensor& ModelParams::head(const std::string& domain_id) {
  auto it = w_domain.find(domain_id);
  if (it == w_domain.end()) {
    throw std::invalid_argument("ModelParams: unknown domain id '" + domain_id + "'");
  }
  return it->second;
}

const Tensor& ModelParams::head(const std::string& domain_id) const {
  auto it = w_domain.find(domain_id);
  if (it == w_domain.end()) {
    throw std::invalid_argument("ModelParams: unknown domain id '" + domain_id + "'");
  }
  return it->second;
}

void ModelParams::add_head(const std::string& domain_id) {
  w_domain.emplace(domain_id, Tensor::zeros({split.k, split.width()}));
}

Tensor make_base_head(const RepSplit& split) {
  Tensor w = Tensor::zeros({split.k, split.width()});
  for (std::size_t i = 0; i < split.k; ++i) w.at(i, i) = 1.0;
  return w;
}

ModelParams init_model(const RepSplit& split, const std::vector<std::size_t>& layer_sizes,
                       Rng& rng) {
  if (split.k < 2) throw std::invalid_argument("init_model: need k >= 2 classes");
  if (split.m < 1) throw std::invalid_argument("init_model: need m >= 1 adaptive units");
  if (layer_sizes.size() < 2) {
    throw std::invalid_argument("init_model: layer_sizes must include input and output widths");
  }
  if (layer_sizes.back() != split.width()) {
    throw std::invalid_argument("init_model: output width " + std::to_string(layer_sizes.back()) +
                                " does not equal k+m = " + std::to_string(split.width()));
  }
  ModelParams params;
  params.split = split;
  params.layer_sizes = layer_sizes;
  params.phi = init_mlp(layer_sizes, rng);
  params.w_base = make_base_head(split);
  return params;
}

Tensor representation(const ModelParams& params, const Tensor& x) {
  return mlp_eval(params.phi, x);
}

Tensor head_logits(const Tensor& rep, const Tensor& head) {
  if (rep.cols() != head.cols()) {
    throw std::invalid_argument("head_logits: representation width " + std::to_string(rep.cols()) +
                                " vs head width " + std::to_string(head.cols()));
  }
  const std::size_t n = rep.rows(), k = head.rows(), p = head.cols();
  Tensor out = Tensor::zeros({n, k});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < k; ++r) {
      double s = 0.0;
      const double* hrow = head.values.data() + r * p;
      const double* xrow = rep.values.data() + i * p;
      for (std::size_t j = 0; j < p; ++j) s += hrow[j] * xrow[j];
      out.at(i, r) = s;
    }
  }
  return out;
}

Tensor invariant_logits(const ModelParams& params, const Tensor& x) {
  return head_logits(representation(params, x), params.w_base);
}

Tensor domain_logits(const ModelParams& params, const std::string& domain_id, const Tensor& x) {
  const Tensor& w_e = params.head(domain_id);
  Tensor combined = params.w_base;
  for (std::size_t i = 0; i < combined.numel(); ++i) combined.values[i] += w_e.values[i];
  return head_logits(representation(params, x), combined);
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  nlohmann::json j;
  j["k"] = params.split.k;
  j["m"] = params.split.m;
  j["layer_sizes"] = params.layer_sizes;
  nlohmann::json layers = nlohmann::json::array();
  for (const DenseLayer& layer : params.phi.layers) {
    layers.push_back({{"w", tensor_to_json(layer.w)}, {"b", tensor_to_json(layer.b)}});
  }
  j["phi"] = std::move(layers);
  j["w_base"] = tensor_to_json(params.w_base);
  nlohmann::json heads = nlohmann::json::object();
  for (const auto& [id, w] : params.w_domain) heads[id] = tensor_to_json(w);
  j["w_domain"] = std::move(heads);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_checkpoint: cannot write " + path.string());
  out << j.dump(2) << '\n';
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("load_checkpoint: malformed JSON in " + path.string() + ": " +
                             e.what());
  }
  ModelParams params;
  params.split.k = j.at("k").get<std::size_t>();
  params.split.m = j.at("m").get<std::size_t>();
  params.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
  for (const auto& layer : j.at("phi")) {
    params.phi.layers.push_back({tensor_from_json(layer.at("w")), tensor_from_json(layer.at("b"))});
  }
  params.w_base = tensor_from_json(j.at("w_base"));
  for (const auto& [id, w] : j.at("w_domain").items()) {
    params.w_domain.emplace(id, tensor_from_json(w));
  }
  return params;
}

}  // namespace actir
