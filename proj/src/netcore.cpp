#include "tidal/netcore.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tidal/errors.hpp"
#include "tidal/rng.hpp"

namespace tidal::net {

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw InputError("unknown activation '" + s + "'");
}

void NetConfig::validate() const {
  if (input_dim == 0) throw InputError("net: input_dim must be positive");
  if (hidden_sizes.empty()) throw InputError("net: hidden_sizes must be non-empty");
  for (auto h : hidden_sizes) {
    if (h == 0) throw InputError("net: hidden sizes must be positive");
  }
  if (n_classes < 2) throw InputError("net: n_classes must be >= 2");
  if (tap_layers.empty()) throw InputError("net: at least one tap layer is required");
  for (auto t : tap_layers) {
    if (t >= hidden_sizes.size()) {
      throw InputError("net: tap layer " + std::to_string(t) + " is not a hidden layer");
    }
  }
}

Mlp::Mlp(NetConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  std::size_t offset = 0;
  std::size_t in = cfg_.input_dim;
  auto add = [&](std::size_t out) {
    layers_.push_back({in, out, offset, offset + in * out});
    offset += in * out + out;
    in = out;
  };
  for (auto h : cfg_.hidden_sizes) add(h);
  add(cfg_.n_classes);
  params_.assign(offset, 0.0);
}

void Mlp::initialize(std::uint64_t seed) {
  Rng rng(seed);
  for (const auto& L : layers_) {
    const double fan_in = static_cast<double>(L.in);
    const double fan_out = static_cast<double>(L.out);
    const double bound = cfg_.activation == Activation::relu ? std::sqrt(6.0 / fan_in)
                                                             : std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < L.in * L.out; ++i) params_[L.w + i] = dist(rng);
    for (std::size_t i = 0; i < L.out; ++i) params_[L.b + i] = 0.0;
  }
}

std::vector<std::size_t> Mlp::tap_dims() const {
  std::vector<std::size_t> dims;
  for (auto t : cfg_.tap_layers) dims.push_back(cfg_.hidden_sizes[t]);
  return dims;
}

namespace {

void affine(std::span<const double> params, std::size_t w, std::size_t b, std::size_t in,
            std::size_t out, std::span<const double> x, std::vector<double>& z) {
  z.assign(out, 0.0);
  for (std::size_t o = 0; o < out; ++o) {
    const double* row = params.data() + w + o * in;
    double s = params[b + o];
    for (std::size_t i = 0; i < in; ++i) s += row[i] * x[i];
    z[o] = s;
  }
}

}  // namespace

ForwardTrace Mlp::forward(std::span<const double> x) const {
  if (x.size() != cfg_.input_dim) {
    throw InputError("forward: expected " + std::to_string(cfg_.input_dim) + " features, got " +
                     std::to_string(x.size()));
  }
  ForwardTrace tr;
  const std::size_t n_hidden = cfg_.hidden_sizes.size();
  tr.pre.resize(n_hidden);
  tr.act.resize(n_hidden);
  std::span<const double> input = x;
  for (std::size_t l = 0; l < n_hidden; ++l) {
    const auto& L = layers_[l];
    affine(params_, L.w, L.b, L.in, L.out, input, tr.pre[l]);
    tr.act[l] = tr.pre[l];
    for (double& a : tr.act[l]) {
      a = cfg_.activation == Activation::relu ? (a > 0.0 ? a : 0.0) : std::tanh(a);
    }
    input = tr.act[l];
  }
  const auto& out = layers_.back();
  affine(params_, out.w, out.b, out.in, out.out, input, tr.logits);
  for (double z : tr.logits) {
    if (!std::isfinite(z)) throw NumericalError("forward: non-finite logit", -1);
  }
  tr.probs = softmax(tr.logits);
  for (auto t : cfg_.tap_layers) tr.taps.push_back(tr.act[t]);
  return tr;
}

void Mlp::backward(const ForwardTrace& trace, std::span<const double> x,
                   std::span<const double> dlogits,
                   const std::vector<std::vector<double>>& dtaps,
                   std::span<double> grad) const {
  if (grad.size() != params_.size()) throw InputError("backward: gradient buffer size mismatch");
  if (dlogits.size() != cfg_.n_classes) throw InputError("backward: dlogits size mismatch");
  if (!dtaps.empty() && dtaps.size() != cfg_.tap_layers.size()) {
    throw InputError("backward: tap gradient count mismatch");
  }

  std::vector<double> delta(dlogits.begin(), dlogits.end());
  std::vector<double> da;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& L = layers_[l];
    std::span<const double> a_prev = l == 0 ? x : std::span<const double>(trace.act[l - 1]);
    for (std::size_t o = 0; o < L.out; ++o) {
      double* grow = grad.data() + L.w + o * L.in;
      for (std::size_t i = 0; i < L.in; ++i) grow[i] += delta[o] * a_prev[i];
      grad[L.b + o] += delta[o];
    }
    if (l == 0) break;

    da.assign(L.in, 0.0);
    for (std::size_t o = 0; o < L.out; ++o) {
      const double* row = params_.data() + L.w + o * L.in;
      for (std::size_t i = 0; i < L.in; ++i) da[i] += row[i] * delta[o];
    }
    const std::size_t hidden = l - 1;
    for (std::size_t t = 0; t < dtaps.size(); ++t) {
      if (cfg_.tap_layers[t] != hidden) continue;
      if (dtaps[t].size() != L.in) throw InputError("backward: tap gradient size mismatch");
      for (std::size_t i = 0; i < L.in; ++i) da[i] += dtaps[t][i];
    }
    delta.assign(L.in, 0.0);
    for (std::size_t i = 0; i < L.in; ++i) {
      const double d = cfg_.activation == Activation::relu
                           ? (trace.pre[hidden][i] > 0.0 ? 1.0 : 0.0)
                           : 1.0 - trace.act[hidden][i] * trace.act[hidden][i];
      delta[i] = da[i] * d;
    }
  }
}

double cross_entropy(const ProbVector& probs, std::size_t y) {
  if (y >= probs.size()) {
    throw InputError("cross_entropy: class index " + std::to_string(y) + " out of range");
  }
  return -std::log(std::max(probs[y], kProbFloor));
}

std::string to_string(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "sgd_momentum"; }

OptimizerKind optimizer_kind_from_string(const std::string& s) {
  if (s == "sgd_momentum" || s == "sgd") return OptimizerKind::sgd_momentum;
  if (s == "adam") return OptimizerKind::adam;
  throw InputError("unknown optimizer '" + s + "'");
}

void OptimizerConfig::validate() const {
  if (!(initial_lr > 0.0)) throw InputError("optimizer: initial_lr must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InputError("optimizer: momentum must be in [0,1)");
  if (!(weight_decay >= 0.0)) throw InputError("optimizer: weight_decay must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw InputError("optimizer: adam betas must be in [0,1)");
  }
  if (!(epsilon > 0.0)) throw InputError("optimizer: epsilon must be > 0");
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) {
    throw InputError("optimizer: decay_factor must be in (0,1]");
  }
  if (decay_epoch < 0) throw InputError("optimizer: decay_epoch must be >= 0");
}

double lr_at(const OptimizerConfig& opt, int epoch) {
  return epoch < opt.decay_epoch ? opt.initial_lr : opt.initial_lr * opt.decay_factor;
}

void optimizer_step(std::span<double> params, std::span<const double> grads,
                    OptimizerState& state, const OptimizerConfig& opt, int epoch) {
  const std::size_t n = params.size();
  if (grads.size() != n || state.first.size() != n || state.second.size() != n) {
    throw InputError("optimizer_step: shape mismatch");
  }
  const double lr = lr_at(opt, epoch);
  ++state.step;
  if (opt.kind == OptimizerKind::sgd_momentum) {
    for (std::size_t i = 0; i < n; ++i) {
      const double g = grads[i] + opt.weight_decay * params[i];
      state.first[i] = opt.momentum * state.first[i] + g;
      params[i] -= lr * state.first[i];
    }
    return;
  }
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(opt.beta1, t);
  const double c2 = 1.0 - std::pow(opt.beta2, t);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grads[i] + opt.weight_decay * params[i];
    state.first[i] = opt.beta1 * state.first[i] + (1.0 - opt.beta1) * g;
    state.second[i] = opt.beta2 * state.second[i] + (1.0 - opt.beta2) * g * g;
    const double m_hat = state.first[i] / c1;
    const double v_hat = state.second[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + opt.epsilon);
  }
}

}  // namespace tidal::net
