#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

#include "tidal/prob.hpp"

namespace tidal::theory {

/// Local-elasticity model of class-1 easy, class-1 hard and class-2 samples.
struct ElasticityParams {
  std::size_t n_1e = 30;
  std::size_t n_1h = 30;
  std::size_t n_2 = 30;
  double alpha_e = 1.0;
  double alpha_h = 0.5;
  double beta = 0.1;
  double h = 1e-3;      // discrete step size
  double sigma = 0.0;   // per-step noise std
  std::array<double, 3> x0{1.0, 1.0, 1.0};  // initial logit per group (1e, 1h, 2)
  std::size_t steps = 1000;
  std::uint64_t seed = 0;

  std::size_t n() const noexcept { return n_1e + n_1h + n_2; }

  /// Checks that the model is well formed: positive easy/hard group sizes,
  /// nonnegative elasticities, h > 0, sigma >= 0.
  void validate_basic() const;
  /// validate_basic() plus the easiness ordering alpha_e > alpha_h > beta > 0
  /// and a positive class-2 group.
  void validate() const;

  friend bool operator==(const ElasticityParams&, const ElasticityParams&) = default;
};

/// Group-averaged logits; entry m is the state after m steps (time m * time_step).
struct GroupTrajectory {
  double time_step = 0.0;
  std::vector<double> xbar_1e;
  std::vector<double> xbar_1h;
  std::vector<double> xbar_2;

  std::size_t size() const noexcept { return xbar_1e.size(); }
};

/// One realization of the per-sample update
///   X_s(m) = X_s(m-1) + h E[s, J_m] X_{J_m}(m-1) + sqrt(h) zeta,  zeta ~ N(0, sigma^2)
/// with J_m drawn uniformly with replacement. time_step = h.
GroupTrajectory simulate_discrete(const ElasticityParams& p);

/// Mean of `runs` realizations seeded from derive_seed(p.seed, r).
GroupTrajectory simulate_discrete_mean(const ElasticityParams& p, std::size_t runs);

/// Right-hand side of the averaged linear ODE for the three group means.
std::array<double, 3> ode_rhs(const ElasticityParams& p, const std::array<double, 3>& x);

/// Forward-Euler integration of the averaged ODE from x0 over [0, t_end].
GroupTrajectory integrate_ode(const ElasticityParams& p, double dt, double t_end);

/// xbar_1e - xbar_1h at each step.
std::vector<double> convergence_gap(const GroupTrajectory& traj);

/// Entropy of [s_y, (1-s_y)/(C-1), ...]: H2(s_y) + (1 - s_y) ln(C - 1).
double theorem2_entropy(double s_y, std::size_t n_classes);
/// Margin of the same vector at the true class: C/(C-1) s_y - 1/(C-1).
double theorem2_margin(double s_y, std::size_t n_classes);
/// The vector itself, true class at index 0.
ProbVector uniform_other_vector(double s_y, std::size_t n_classes);

/// CSV: step,xbar_1e,xbar_1h,xbar_2,gap
void write_trajectory_csv(const GroupTrajectory& traj, std::ostream& out);

}  // namespace tidal::theory
