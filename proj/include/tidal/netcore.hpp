#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tidal/prob.hpp"

namespace tidal::net {

enum class Activation { relu, tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct NetConfig {
  std::size_t input_dim = 2;
  std::vector<std::size_t> hidden_sizes{32};
  std::size_t n_classes = 2;
  /// Hidden-layer indices whose activations feed the TD head.
  std::vector<std::size_t> tap_layers{0};
  Activation activation = Activation::relu;
  std::uint64_t seed = 0;

  /// Throws InputError on any invariant violation.
  void validate() const;
  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

/// Everything computed by one forward pass; kept for the backward pass.
struct ForwardTrace {
  std::vector<std::vector<double>> pre;  // per hidden layer, pre-activation
  std::vector<std::vector<double>> act;  // per hidden layer, activation
  std::vector<double> logits;
  ProbVector probs;
  std::vector<std::vector<double>> taps;  // copies of act[tap_layers[i]]
};

/// Fully connected classifier. All weights and biases live in one flat buffer
/// so optimizers and finite-difference checks can treat them uniformly.
/// Layout per layer: W (out x in, row-major) followed by b (out).
class Mlp {
 public:
  explicit Mlp(NetConfig cfg);

  /// He-uniform (relu) or Xavier-uniform (tanh) weights, zero biases.
  void initialize(std::uint64_t seed);

  const NetConfig& config() const noexcept { return cfg_; }
  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }

  std::vector<std::size_t> tap_dims() const;
  /// Width of the last hidden layer (CoreSet embedding).
  std::size_t embedding_dim() const { return cfg_.hidden_sizes.back(); }

  ForwardTrace forward(std::span<const double> x) const;

  /// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(logits) and,
  /// optionally, d(loss)/d(tap) for each tap (empty span list = no tap terms).
  void backward(const ForwardTrace& trace, std::span<const double> x,
                std::span<const double> dlogits,
                const std::vector<std::vector<double>>& dtaps,
                std::span<double> grad) const;

 private:
  struct Layer {
    std::size_t in, out, w, b;  // w and b are offsets into params_
  };
  NetConfig cfg_;
  std::vector<Layer> layers_;
  std::vector<double> params_;
};

/// -log(max(probs[y], floor)).
double cross_entropy(const ProbVector& probs, std::size_t y);

enum class OptimizerKind { sgd_momentum, adam };

std::string to_string(OptimizerKind k);
OptimizerKind optimizer_kind_from_string(const std::string& s);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::sgd_momentum;
  double initial_lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int decay_epoch = 48;
  double decay_factor = 0.1;

  void validate() const;
  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

/// Moment buffers for one parameter buffer. SGD uses `first` as velocity.
struct OptimizerState {
  explicit OptimizerState(std::size_t n) : first(n, 0.0), second(n, 0.0) {}
  std::vector<double> first;
  std::vector<double> second;
  std::uint64_t step = 0;
};

/// Single step decay: initial_lr before decay_epoch, initial_lr * decay_factor from it on.
double lr_at(const OptimizerConfig& opt, int epoch);

/// g <- g + wd * theta, then an SGD-momentum or Adam update at lr_at(epoch).
void optimizer_step(std::span<double> params, std::span<const double> grads,
                    OptimizerState& state, const OptimizerConfig& opt, int epoch);

}  // namespace tidal::net
