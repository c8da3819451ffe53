#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tidal/prob.hpp"

namespace tidal::head {

struct HeadConfig {
  std::size_t reduced_dim = 16;
  std::vector<std::size_t> tap_dims;
  std::size_t n_classes = 2;

  std::size_t n_taps() const noexcept { return tap_dims.size(); }
  void validate() const;
};

struct HeadTrace {
  std::vector<std::vector<double>> reduced_pre;  // per tap, before relu
  std::vector<double> concat;                    // relu'd reductions, tap-major
  std::vector<double> logits;
  ProbVector probs;
};

/// TD prediction module: each tap goes through affine+relu to `reduced_dim`,
/// the reductions are concatenated, and a final affine layer + softmax gives
/// the predicted training dynamics.
/// Layout: per tap U (reduced x tap_dim, row-major), c (reduced); then V (C x
/// reduced*n_taps), e (C).
class TdHead {
 public:
  explicit TdHead(HeadConfig cfg);

  void initialize(std::uint64_t seed);

  const HeadConfig& config() const noexcept { return cfg_; }
  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }

  HeadTrace forward(const std::vector<std::vector<double>>& taps) const;

  /// Accumulates parameter gradients into `grad` and returns d(loss)/d(tap).
  std::vector<std::vector<double>> backward(const HeadTrace& trace,
                                            const std::vector<std::vector<double>>& taps,
                                            std::span<const double> dlogits,
                                            std::span<double> grad) const;

 private:
  struct Block {
    std::size_t in, out, w, b;
  };
  HeadConfig cfg_;
  std::vector<Block> reducers_;
  Block output_{};
  std::vector<double> params_;
};

ProbVector head_forward(const TdHead& head, const std::vector<std::vector<double>>& taps);

/// KL(target || pred) in nats; pred floored at kProbFloor, 0 log 0 = 0.
double kl_divergence(const ProbVector& target, const ProbVector& pred);

struct ModuleLoss {
  double loss = 0.0;          // batch-mean KL
  std::vector<double> grad;   // d(loss)/d(head params)
};

/// Batch-mean KL between targets and head predictions, with exact gradients.
ModuleLoss module_loss(const TdHead& head,
                       const std::vector<std::vector<std::vector<double>>>& taps_batch,
                       const std::vector<ProbVector>& targets);

}  // namespace tidal::head
