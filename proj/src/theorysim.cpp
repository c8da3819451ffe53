#include "tidal/theorysim.hpp"

#include <cmath>
#include <random>
#include <string>

#include "tidal/csv.hpp"
#include "tidal/errors.hpp"
#include "tidal/rng.hpp"

namespace tidal::theory {

void ElasticityParams::validate_basic() const {
  if (n_1e == 0 || n_1h == 0) throw InputError("theory: n_1e and n_1h must be positive");
  if (!(alpha_e >= 0.0 && alpha_h >= 0.0 && beta >= 0.0)) {
    throw InputError("theory: elasticities must be nonnegative");
  }
  if (!(h > 0.0)) throw InputError("theory: step size h must be > 0");
  if (!(sigma >= 0.0)) throw InputError("theory: sigma must be >= 0");
}

void ElasticityParams::validate() const {
  validate_basic();
  if (n_2 == 0) throw InputError("theory: n_2 must be positive");
  if (!(alpha_e > alpha_h)) throw InputError("theory: constraint alpha_e > alpha_h violated");
  if (!(alpha_h > beta)) throw InputError("theory: constraint alpha_h > beta violated");
  if (!(beta > 0.0)) throw InputError("theory: constraint beta > 0 violated");
}

namespace {

enum Group : int { kEasy = 0, kHard = 1, kOther = 2 };

double elasticity(const ElasticityParams& p, int s, int j) {
  if ((s == kEasy && j == kEasy) || (s == kOther && j == kOther)) return p.alpha_e;
  if (s != kOther && j != kOther) return p.alpha_h;  // class-1 pair with a hard endpoint
  return p.beta;
}

void push_means(const ElasticityParams& p, const std::vector<double>& x, GroupTrajectory& t) {
  double e = 0.0, hd = 0.0, o = 0.0;
  for (std::size_t i = 0; i < p.n_1e; ++i) e += x[i];
  for (std::size_t i = p.n_1e; i < p.n_1e + p.n_1h; ++i) hd += x[i];
  for (std::size_t i = p.n_1e + p.n_1h; i < x.size(); ++i) o += x[i];
  t.xbar_1e.push_back(e / static_cast<double>(p.n_1e));
  t.xbar_1h.push_back(hd / static_cast<double>(p.n_1h));
  t.xbar_2.push_back(p.n_2 ? o / static_cast<double>(p.n_2) : 0.0);
}

}  // namespace

GroupTrajectory simulate_discrete(const ElasticityParams& p) {
  p.validate_basic();
  const std::size_t n = p.n();
  std::vector<int> group(n);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    group[i] = i < p.n_1e ? kEasy : (i < p.n_1e + p.n_1h ? kHard : kOther);
    x[i] = p.x0[static_cast<std::size_t>(group[i])];
  }
  // E[s, J] depends only on the two groups
  double table[3][3];
  for (int s = 0; s < 3; ++s) {
    for (int j = 0; j < 3; ++j) table[s][j] = elasticity(p, s, j);
  }

  Rng rng(p.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double noise_scale = std::sqrt(p.h) * p.sigma;

  GroupTrajectory traj;
  traj.time_step = p.h;
  push_means(p, x, traj);
  for (std::size_t m = 0; m < p.steps; ++m) {
    const std::size_t j = pick(rng);
    const double xj = x[j];
    const int gj = group[j];
    for (std::size_t s = 0; s < n; ++s) {
      x[s] += p.h * table[group[s]][gj] * xj;
      if (noise_scale > 0.0) x[s] += noise_scale * normal(rng);
    }
    push_means(p, x, traj);
  }
  return traj;
}

GroupTrajectory simulate_discrete_mean(const ElasticityParams& p, std::size_t runs) {
  if (runs == 0) throw InputError("simulate_discrete_mean: runs must be >= 1");
  GroupTrajectory acc;
  for (std::size_t r = 0; r < runs; ++r) {
    ElasticityParams q = p;
    q.seed = derive_seed(p.seed, r);
    auto t = simulate_discrete(q);
    if (r == 0) {
      acc = std::move(t);
      continue;
    }
    for (std::size_t m = 0; m < acc.size(); ++m) {
      acc.xbar_1e[m] += t.xbar_1e[m];
      acc.xbar_1h[m] += t.xbar_1h[m];
      acc.xbar_2[m] += t.xbar_2[m];
    }
  }
  const double inv = 1.0 / static_cast<double>(runs);
  for (std::size_t m = 0; m < acc.size(); ++m) {
    acc.xbar_1e[m] *= inv;
    acc.xbar_1h[m] *= inv;
    acc.xbar_2[m] *= inv;
  }
  return acc;
}

std::array<double, 3> ode_rhs(const ElasticityParams& p, const std::array<double, 3>& x) {
  const double n = static_cast<double>(p.n());
  const double we = static_cast<double>(p.n_1e) / n;
  const double wh = static_cast<double>(p.n_1h) / n;
  const double w2 = static_cast<double>(p.n_2) / n;
  return {
      we * p.alpha_e * x[0] + wh * p.alpha_h * x[1] + w2 * p.beta * x[2],
      we * p.alpha_h * x[0] + wh * p.alpha_h * x[1] + w2 * p.beta * x[2],
      we * p.beta * x[0] + wh * p.beta * x[1] + w2 * p.alpha_e * x[2],
  };
}

GroupTrajectory integrate_ode(const ElasticityParams& p, double dt, double t_end) {
  p.validate_basic();
  if (!(dt > 0.0)) throw InputError("integrate_ode: dt must be > 0");
  if (!(t_end >= 0.0)) throw InputError("integrate_ode: t_end must be >= 0");
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  GroupTrajectory traj;
  traj.time_step = dt;
  std::array<double, 3> x = p.x0;
  auto push = [&] {
    traj.xbar_1e.push_back(x[0]);
    traj.xbar_1h.push_back(x[1]);
    traj.xbar_2.push_back(x[2]);
  };
  push();
  for (std::size_t m = 0; m < steps; ++m) {
    const auto d = ode_rhs(p, x);
    for (int g = 0; g < 3; ++g) x[g] += dt * d[g];
    push();
  }
  return traj;
}

std::vector<double> convergence_gap(const GroupTrajectory& traj) {
  if (traj.xbar_1e.size() != traj.xbar_1h.size()) throw InputError("convergence_gap: length mismatch");
  std::vector<double> gap(traj.xbar_1e.size());
  for (std::size_t m = 0; m < gap.size(); ++m) gap[m] = traj.xbar_1e[m] - traj.xbar_1h[m];
  return gap;
}

namespace {

void check_theorem2_args(double s_y, std::size_t n_classes) {
  if (!(s_y > 0.0 && s_y < 1.0)) throw InputError("closed form: s_y must be in (0,1)");
  if (n_classes < 2) throw InputError("closed form: need at least 2 classes");
}

}  // namespace

double theorem2_entropy(double s_y, std::size_t n_classes) {
  check_theorem2_args(s_y, n_classes);
  const double binary = -s_y * std::log(s_y) - (1.0 - s_y) * std::log(1.0 - s_y);
  return binary + (1.0 - s_y) * std::log(static_cast<double>(n_classes - 1));
}

double theorem2_margin(double s_y, std::size_t n_classes) {
  check_theorem2_args(s_y, n_classes);
  const double c = static_cast<double>(n_classes);
  return c / (c - 1.0) * s_y - 1.0 / (c - 1.0);
}

ProbVector uniform_other_vector(double s_y, std::size_t n_classes) {
  check_theorem2_args(s_y, n_classes);
  std::vector<double> v(n_classes, (1.0 - s_y) / static_cast<double>(n_classes - 1));
  v[0] = s_y;
  return ProbVector::from(std::move(v));
}

void write_trajectory_csv(const GroupTrajectory& traj, std::ostream& out) {
  csv::write_row(out, {"step", "xbar_1e", "xbar_1h", "xbar_2", "gap"});
  for (std::size_t m = 0; m < traj.size(); ++m) {
    out << m << ',' << csv::format_double(traj.xbar_1e[m]) << ',' << csv::format_double(traj.xbar_1h[m])
        << ',' << csv::format_double(traj.xbar_2[m]) << ','
        << csv::format_double(traj.xbar_1e[m] - traj.xbar_1h[m]) << '\n';
  }
}

}  // namespace tidal::theory
