#include "rotgrad/nn.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rotgrad/errors.hpp"

namespace rotgrad {

namespace {

std::vector<std::size_t> layer_offsets(const std::vector<std::size_t>& sizes,
                                       std::size_t* total) {
  if (sizes.size() < 2) throw ConfigError("Mlp needs at least input and output sizes");
  std::vector<std::size_t> out;
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    if (sizes[l] == 0 || sizes[l + 1] == 0) throw ConfigError("Mlp layer of width 0");
    out.push_back(off);
    off += sizes[l] * sizes[l + 1] + sizes[l + 1];
  }
  *total = off;
  return out;
}

}  // namespace

Mlp::Mlp(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
  std::size_t total = 0;
  offsets_ = layer_offsets(sizes_, &total);
  params_.assign(total, 0.0);
}

Mlp::Mlp(std::vector<std::size_t> layer_sizes, CounterRng& rng) : Mlp(std::move(layer_sizes)) {
  for (std::size_t l = 0; l < num_layers(); ++l) {
    const std::size_t fan_in = sizes_[l], fan_out = sizes_[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    double* w = params_.data() + weight_offset(l);
    for (std::size_t i = 0; i < fan_in * fan_out; ++i) w[i] = rng.uniform(-limit, limit);
  }
}

Batch forward(const Mlp& mlp, const Batch& input, ForwardCache* cache) {
  if (input.cols != mlp.input_dim())
    throw ConfigError("forward: input width " + std::to_string(input.cols) +
                      " does not match network input " + std::to_string(mlp.input_dim()));
  if (cache) {
    cache->inputs.clear();
    cache->pre_activations.clear();
  }
  const auto& sizes = mlp.layer_sizes();
  const auto params = mlp.params();
  Batch h = input;
  for (std::size_t l = 0; l < mlp.num_layers(); ++l) {
    const std::size_t in = sizes[l], out = sizes[l + 1];
    const double* w = params.data() + mlp.weight_offset(l);
    const double* b = params.data() + mlp.bias_offset(l);
    Batch z(h.rows, out);
    for (std::size_t r = 0; r < h.rows; ++r) {
      const double* x = h.data.data() + r * in;
      double* zr = z.data.data() + r * out;
      for (std::size_t o = 0; o < out; ++o) {
        const double* wo = w + o * in;
        double s = b[o];
        for (std::size_t i = 0; i < in; ++i) s += wo[i] * x[i];
        zr[o] = s;
      }
    }
    const bool hidden = l + 1 < mlp.num_layers();
    if (cache) {
      cache->inputs.push_back(std::move(h));
      if (hidden) cache->pre_activations.push_back(z);
    }
    if (hidden)
      for (double& v : z.data) v = v > 0.0 ? v : kLeakySlope * v;
    h = std::move(z);
  }
  return h;
}

std::vector<double> backward(const Mlp& mlp, const ForwardCache& cache,
                             const Batch& output_gradient) {
  const std::size_t layers = mlp.num_layers();
  if (cache.inputs.size() != layers || cache.pre_activations.size() + 1 != layers)
    throw ConfigError("backward: cache does not come from a forward pass of this network");
  if (output_gradient.cols != mlp.output_dim() ||
      output_gradient.rows != cache.inputs.front().rows)
    throw ConfigError("backward: output gradient shape mismatch");

  const auto& sizes = mlp.layer_sizes();
  const auto params = mlp.params();
  std::vector<double> grads(params.size(), 0.0);
  Batch delta = output_gradient;
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = sizes[l], out = sizes[l + 1];
    const Batch& x = cache.inputs[l];
    double* gw = grads.data() + mlp.weight_offset(l);
    double* gb = grads.data() + mlp.bias_offset(l);
    for (std::size_t r = 0; r < x.rows; ++r) {
      const double* xr = x.data.data() + r * in;
      const double* dr = delta.data.data() + r * out;
      for (std::size_t o = 0; o < out; ++o) {
        const double d = dr[o];
        if (d == 0.0) continue;
        gb[o] += d;
        double* gwo = gw + o * in;
        for (std::size_t i = 0; i < in; ++i) gwo[i] += d * xr[i];
      }
    }
    if (l == 0) break;
    const double* w = params.data() + mlp.weight_offset(l);
    const Batch& pre = cache.pre_activations[l - 1];
    Batch prev(x.rows, in);
    for (std::size_t r = 0; r < x.rows; ++r) {
      const double* dr = delta.data.data() + r * out;
      double* pr = prev.data.data() + r * in;
      for (std::size_t o = 0; o < out; ++o) {
        const double d = dr[o];
        const double* wo = w + o * in;
        for (std::size_t i = 0; i < in; ++i) pr[i] += d * wo[i];
      }
      for (std::size_t i = 0; i < in; ++i)
        if (pre(r, i) <= 0.0) pr[i] *= kLeakySlope;
    }
    delta = std::move(prev);
  }
  return grads;
}

void adam_step(AdamState& s, std::span<double> params, std::span<const double> grads) {
  if (grads.size() != params.size()) throw ConfigError("adam_step: size mismatch");
  if (s.m.size() != params.size()) {
    s.m.assign(params.size(), 0.0);
    s.v.assign(params.size(), 0.0);
  }
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * grads[i];
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * grads[i] * grads[i];
    const double m_hat = s.m[i] / c1;
    const double v_hat = s.v[i] / c2;
    params[i] -= s.lr * m_hat / (std::sqrt(v_hat) + s.eps);
  }
}

std::string checkpoint_to_json(const Mlp& mlp) {
  nlohmann::json j;
  j["format"] = "rotgrad-mlp";
  j["version"] = kCheckpointVersion;
  j["layer_sizes"] = mlp.layer_sizes();
  j["activation"] = "leaky_relu";
  j["negative_slope"] = kLeakySlope;
  j["params"] = std::vector<double>(mlp.params().begin(), mlp.params().end());
  return j.dump();
}

Mlp checkpoint_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
  if (j.value("format", "") != "rotgrad-mlp") throw ConfigError("checkpoint: wrong format tag");
  if (j.value("version", 0) != kCheckpointVersion)
    throw ConfigError("checkpoint: unsupported version");
  Mlp mlp(j.at("layer_sizes").get<std::vector<std::size_t>>());
  const auto values = j.at("params").get<std::vector<double>>();
  if (values.size() != mlp.params().size())
    throw ConfigError("checkpoint: parameter count does not match layer sizes");
  std::copy(values.begin(), values.end(), mlp.params().begin());
  return mlp;
}

void save_checkpoint(const Mlp& mlp, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << checkpoint_to_json(mlp) << '\n';
}

Mlp load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace rotgrad
