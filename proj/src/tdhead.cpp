#include "tidal/tdhead.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "tidal/errors.hpp"
#include "tidal/rng.hpp"

namespace tidal::head {

void HeadConfig::validate() const {
  if (reduced_dim == 0) throw InputError("head: reduced_dim must be positive");
  if (tap_dims.empty()) throw InputError("head: at least one tap is required");
  for (auto d : tap_dims) {
    if (d == 0) throw InputError("head: tap dimensions must be positive");
  }
  if (n_classes < 2) throw InputError("head: n_classes must be >= 2");
}

TdHead::TdHead(HeadConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  std::size_t offset = 0;
  for (auto d : cfg_.tap_dims) {
    reducers_.push_back({d, cfg_.reduced_dim, offset, offset + d * cfg_.reduced_dim});
    offset += d * cfg_.reduced_dim + cfg_.reduced_dim;
  }
  const std::size_t concat = cfg_.reduced_dim * cfg_.n_taps();
  output_ = {concat, cfg_.n_classes, offset, offset + concat * cfg_.n_classes};
  offset += concat * cfg_.n_classes + cfg_.n_classes;
  params_.assign(offset, 0.0);
}

void TdHead::initialize(std::uint64_t seed) {
  Rng rng(seed);
  auto fill = [&](const Block& b, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < b.in * b.out; ++i) params_[b.w + i] = dist(rng);
    std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(b.b), b.out, 0.0);
  };
  for (const auto& r : reducers_) fill(r, std::sqrt(6.0 / static_cast<double>(r.in)));
  fill(output_, std::sqrt(6.0 / static_cast<double>(output_.in + output_.out)));
}

HeadTrace TdHead::forward(const std::vector<std::vector<double>>& taps) const {
  if (taps.size() != reducers_.size()) {
    throw InputError("head_forward: expected " + std::to_string(reducers_.size()) +
                     " taps, got " + std::to_string(taps.size()));
  }
  HeadTrace tr;
  tr.reduced_pre.resize(taps.size());
  tr.concat.reserve(output_.in);
  for (std::size_t t = 0; t < taps.size(); ++t) {
    const auto& r = reducers_[t];
    if (taps[t].size() != r.in) throw InputError("head_forward: tap dimension mismatch");
    auto& z = tr.reduced_pre[t];
    z.assign(r.out, 0.0);
    for (std::size_t o = 0; o < r.out; ++o) {
      const double* row = params_.data() + r.w + o * r.in;
      double s = params_[r.b + o];
      for (std::size_t i = 0; i < r.in; ++i) s += row[i] * taps[t][i];
      z[o] = s;
      tr.concat.push_back(s > 0.0 ? s : 0.0);
    }
  }
  tr.logits.assign(output_.out, 0.0);
  for (std::size_t o = 0; o < output_.out; ++o) {
    const double* row = params_.data() + output_.w + o * output_.in;
    double s = params_[output_.b + o];
    for (std::size_t i = 0; i < output_.in; ++i) s += row[i] * tr.concat[i];
    tr.logits[o] = s;
  }
  for (double z : tr.logits) {
    if (!std::isfinite(z)) throw NumericalError("head_forward: non-finite logit", -1);
  }
  tr.probs = softmax(tr.logits);
  return tr;
}

std::vector<std::vector<double>> TdHead::backward(const HeadTrace& trace,
                                                  const std::vector<std::vector<double>>& taps,
                                                  std::span<const double> dlogits,
                                                  std::span<double> grad) const {
  if (grad.size() != params_.size()) throw InputError("head backward: gradient size mismatch");
  if (dlogits.size() != output_.out) throw InputError("head backward: dlogits size mismatch");

  std::vector<double> dconcat(output_.in, 0.0);
  for (std::size_t o = 0; o < output_.out; ++o) {
    const double* row = params_.data() + output_.w + o * output_.in;
    double* grow = grad.data() + output_.w + o * output_.in;
    for (std::size_t i = 0; i < output_.in; ++i) {
      grow[i] += dlogits[o] * trace.concat[i];
      dconcat[i] += row[i] * dlogits[o];
    }
    grad[output_.b + o] += dlogits[o];
  }

  std::vector<std::vector<double>> dtaps(reducers_.size());
  for (std::size_t t = 0; t < reducers_.size(); ++t) {
    const auto& r = reducers_[t];
    dtaps[t].assign(r.in, 0.0);
    for (std::size_t o = 0; o < r.out; ++o) {
      if (trace.reduced_pre[t][o] <= 0.0) continue;
      const double d = dconcat[t * cfg_.reduced_dim + o];
      const double* row = params_.data() + r.w + o * r.in;
      double* grow = grad.data() + r.w + o * r.in;
      for (std::size_t i = 0; i < r.in; ++i) {
        grow[i] += d * taps[t][i];
        dtaps[t][i] += row[i] * d;
      }
      grad[r.b + o] += d;
    }
  }
  return dtaps;
}

ProbVector head_forward(const TdHead& head, const std::vector<std::vector<double>>& taps) {
  return head.forward(taps).probs;
}

double kl_divergence(const ProbVector& target, const ProbVector& pred) {
  if (target.size() != pred.size()) throw InputError("kl_divergence: dimension mismatch");
  double kl = 0.0;
  for (std::size_t c = 0; c < target.size(); ++c) {
    const double t = target[c];
    if (t <= 0.0) continue;
    kl += t * (std::log(t) - std::log(std::max(pred[c], kProbFloor)));
  }
  return kl;
}

ModuleLoss module_loss(const TdHead& head,
                       const std::vector<std::vector<std::vector<double>>>& taps_batch,
                       const std::vector<ProbVector>& targets) {
  if (taps_batch.size() != targets.size() || targets.empty()) {
    throw InputError("module_loss: batch/target size mismatch");
  }
  ModuleLoss out;
  out.grad.assign(head.parameter_count(), 0.0);
  const double inv_b = 1.0 / static_cast<double>(targets.size());
  std::vector<double> dlogits(head.config().n_classes);
  for (std::size_t b = 0; b < targets.size(); ++b) {
    auto tr = head.forward(taps_batch[b]);
    out.loss += inv_b * kl_divergence(targets[b], tr.probs);
    for (std::size_t c = 0; c < dlogits.size(); ++c) {
      dlogits[c] = inv_b * (tr.probs[c] - targets[b][c]);
    }
    head.backward(tr, taps_batch[b], dlogits, out.grad);
  }
  return out;
}

}  // namespace tidal::head
