#include "tidal/prob.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tidal/errors.hpp"

namespace tidal {

bool is_prob_vector(std::span<const double> values, double tol) {
  if (values.empty()) return false;
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tol;
}

ProbVector ProbVector::from(std::vector<double> values) {
  if (!is_prob_vector(values)) {
    throw InputError("not a probability vector (length " + std::to_string(values.size()) + ")");
  }
  return ProbVector(std::move(values));
}

ProbVector ProbVector::uniform(std::size_t n_classes) {
  if (n_classes == 0) throw InputError("uniform: zero classes");
  return ProbVector(std::vector<double>(n_classes, 1.0 / static_cast<double>(n_classes)));
}

ProbVector ProbVector::one_hot(std::size_t n_classes, std::size_t index) {
  if (index >= n_classes) throw InputError("one_hot: index out of range");
  std::vector<double> v(n_classes, 0.0);
  v[index] = 1.0;
  return ProbVector(std::move(v));
}

std::size_t ProbVector::argmax() const { return tidal::argmax(values_); }

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw InputError("argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

ProbVector softmax(std::span<const double> logits) {
  if (logits.empty()) throw InputError("softmax of empty vector");
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return ProbVector::from(std::move(out));
}

}  // namespace tidal
