#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tidal/netcore.hpp"
#include "tidal/tdhead.hpp"
#include "tidal/tdtrack.hpp"

namespace tidal::net {

/// Non-owning view of a training batch.
struct Batch {
  std::vector<td::SampleId> ids;
  std::vector<std::span<const double>> features;
  std::vector<std::size_t> labels;

  std::size_t size() const noexcept { return ids.size(); }
};

struct JointGradients {
  std::vector<double> net;   // d L / d classifier params
  std::vector<double> head;  // d L / d head params
  double loss_target = 0.0;  // batch-mean cross-entropy
  double loss_module = 0.0;  // batch-mean KL over samples that have a target
  double loss_total = 0.0;   // loss_target + lambda * loss_module
};

/// Gradients of L = CE + lambda * KL(td || head) from precomputed forward
/// traces. Samples without a target contribute only to the CE term. With
/// `detach`, the KL term does not reach classifier parameters.
JointGradients joint_backward(const Mlp& net, const head::TdHead& head, const Batch& batch,
                              const std::vector<ForwardTrace>& traces,
                              const std::vector<std::optional<ProbVector>>& td_targets,
                              double lambda, bool detach);

/// Forward + joint_backward for a batch where every sample has a TD target.
JointGradients grad_joint(const Mlp& net, const head::TdHead& head, const Batch& batch,
                          const std::vector<ProbVector>& td_targets, double lambda,
                          bool detach = false);

}  // namespace tidal::net
