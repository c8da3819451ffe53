#include "tidal/joint.hpp"

#include <cmath>
#include <string>

#include "tidal/errors.hpp"

namespace tidal::net {

JointGradients joint_backward(const Mlp& net, const head::TdHead& head, const Batch& batch,
                              const std::vector<ForwardTrace>& traces,
                              const std::vector<std::optional<ProbVector>>& td_targets,
                              double lambda, bool detach) {
  const std::size_t n = batch.size();
  if (n == 0) throw InputError("grad_joint: empty batch");
  if (traces.size() != n || td_targets.size() != n || batch.features.size() != n ||
      batch.labels.size() != n) {
    throw InputError("grad_joint: batch component sizes differ");
  }
  if (!(lambda >= 0.0)) throw InputError("grad_joint: lambda must be >= 0");

  JointGradients out;
  out.net.assign(net.parameter_count(), 0.0);
  out.head.assign(head.parameter_count(), 0.0);

  std::size_t n_targets = 0;
  for (const auto& t : td_targets) n_targets += t.has_value();
  const double inv_b = 1.0 / static_cast<double>(n);
  const double inv_m = n_targets ? 1.0 / static_cast<double>(n_targets) : 0.0;
  const std::size_t C = net.config().n_classes;

  std::vector<double> dlogits(C);
  std::vector<double> dhead_logits(C);
  const std::vector<std::vector<double>> no_taps;

  for (std::size_t b = 0; b < n; ++b) {
    const auto& tr = traces[b];
    const std::size_t y = batch.labels[b];
    if (y >= C) throw InputError("grad_joint: label out of range for sample " + std::to_string(batch.ids[b]));
    const double ce = cross_entropy(tr.probs, y);
    if (!std::isfinite(ce)) {
      throw NumericalError("non-finite cross-entropy for sample " + std::to_string(batch.ids[b]),
                           batch.ids[b]);
    }
    out.loss_target += inv_b * ce;
    for (std::size_t c = 0; c < C; ++c) dlogits[c] = inv_b * (tr.probs[c] - (c == y ? 1.0 : 0.0));

    if (!td_targets[b]) {
      net.backward(tr, batch.features[b], dlogits, no_taps, out.net);
      continue;
    }
    const auto& target = *td_targets[b];
    if (target.size() != C) throw InputError("grad_joint: TD target has wrong class count");
    head::HeadTrace htr;
    try {
      htr = head.forward(tr.taps);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " for sample " + std::to_string(batch.ids[b]), batch.ids[b]);
    }
    const double kl = head::kl_divergence(target, htr.probs);
    if (!std::isfinite(kl)) {
      throw NumericalError("non-finite module loss for sample " + std::to_string(batch.ids[b]),
                           batch.ids[b]);
    }
    out.loss_module += inv_m * kl;
    // d KL(t || softmax(z)) / dz = softmax(z) - t
    for (std::size_t c = 0; c < C; ++c) dhead_logits[c] = lambda * inv_m * (htr.probs[c] - target[c]);
    auto dtaps = head.backward(htr, tr.taps, dhead_logits, out.head);
    net.backward(tr, batch.features[b], dlogits, detach ? no_taps : dtaps, out.net);
  }
  out.loss_total = out.loss_target + lambda * out.loss_module;
  return out;
}

JointGradients grad_joint(const Mlp& net, const head::TdHead& head, const Batch& batch,
                          const std::vector<ProbVector>& td_targets, double lambda, bool detach) {
  if (td_targets.size() != batch.size()) throw InputError("grad_joint: one TD target per sample required");
  std::vector<ForwardTrace> traces;
  traces.reserve(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    try {
      traces.push_back(net.forward(batch.features[b]));
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " for sample " + std::to_string(batch.ids[b]), batch.ids[b]);
    }
  }
  std::vector<std::optional<ProbVector>> targets(td_targets.begin(), td_targets.end());
  return joint_backward(net, head, batch, traces, targets, lambda, detach);
}

}  // namespace tidal::net
