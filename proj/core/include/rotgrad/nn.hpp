// A small multilayer perceptron with hand-written backward pass and Adam.
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rotgrad/rng.hpp"

namespace rotgrad {

// Row-major batch of vectors: rows = samples.
struct Batch {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Batch() = default;
  Batch(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

inline constexpr double kLeakySlope = 0.01;

// Fully connected layers with leaky-rectifier hidden activations and a
// linear output. All parameters live in one flat vector: for each layer the
// weight matrix (out x in, row-major) followed by the bias.
class Mlp {
 public:
  /// Zero-initialized network.
  explicit Mlp(std::vector<std::size_t> layer_sizes);
  /// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  Mlp(std::vector<std::size_t> layer_sizes, CounterRng& rng);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t num_layers() const { return sizes_.size() - 1; }
  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t output_dim() const { return sizes_.back(); }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + sizes_[layer] * sizes_[layer + 1];
  }

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

// Per-layer inputs and hidden pre-activations recorded by forward().
struct ForwardCache {
  std::vector<Batch> inputs;
  std::vector<Batch> pre_activations;
};

/// Throws ConfigError on an input width mismatch.
Batch forward(const Mlp& mlp, const Batch& input, ForwardCache* cache = nullptr);

/// Parameter gradients (same layout as Mlp::params) of sum_rows <dOut, out>.
/// Callers wanting a batch mean scale output_gradient by 1/rows.
std::vector<double> backward(const Mlp& mlp, const ForwardCache& cache,
                             const Batch& output_gradient);

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<double> m;
  std::vector<double> v;

  AdamState() = default;
  AdamState(std::size_t n_params, double learning_rate)
      : lr(learning_rate), m(n_params, 0.0), v(n_params, 0.0) {}
};

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);

inline constexpr int kCheckpointVersion = 1;

/// JSON checkpoint: {"format": "rotgrad-mlp", "version": 1, "layer_sizes",
/// "activation", "negative_slope", "params"}.
std::string checkpoint_to_json(const Mlp& mlp);
Mlp checkpoint_from_json(const std::string& text);
void save_checkpoint(const Mlp& mlp, const std::filesystem::path& path);
Mlp load_checkpoint(const std::filesystem::path& path);

}  // namespace rotgrad
