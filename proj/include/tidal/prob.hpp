#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tidal {

/// Floor applied to probabilities before taking a logarithm.
inline constexpr double kProbFloor = 1e-12;

/// Tolerance on |sum - 1| accepted for a probability vector.
inline constexpr double kSimplexTolerance = 1e-9;

/// A point on the probability simplex: nonnegative entries summing to one.
/// Construction validates; the stored values are never modified afterwards.
class ProbVector {
 public:
  ProbVector() = default;

  /// Throws InputError unless `values` is a length >= 1 simplex vector.
  static ProbVector from(std::vector<double> values);
  static ProbVector uniform(std::size_t n_classes);
  static ProbVector one_hot(std::size_t n_classes, std::size_t index);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

  /// Index of the largest entry; ties resolve to the lowest index.
  std::size_t argmax() const;

  friend bool operator==(const ProbVector&, const ProbVector&) = default;

 private:
  explicit ProbVector(std::vector<double> v) : values_(std::move(v)) {}
  std::vector<double> values_;
};

/// Log-sum-exp stable softmax.
ProbVector softmax(std::span<const double> logits);

/// Lowest index of the maximum element.
std::size_t argmax(std::span<const double> values);

bool is_prob_vector(std::span<const double> values, double tol = kSimplexTolerance);

}  // namespace tidal
