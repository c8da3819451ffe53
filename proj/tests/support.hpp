#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "tidal/joint.hpp"
#include "tidal/netcore.hpp"
#include "tidal/prob.hpp"
#include "tidal/tdhead.hpp"

namespace testing_support {

inline tidal::ProbVector random_prob(std::size_t n, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(n);
  double s = 0;
  for (double& x : v) s += (x = e(rng));
  for (double& x : v) x /= s;
  // absorb rounding so the vector passes the strict simplex check
  double total = 0;
  for (double x : v) total += x;
  v[0] += 1.0 - total;
  return tidal::ProbVector::from(v);
}

/// A small classifier + head + batch with fixed TD targets.
struct GradInstance {
  tidal::net::Mlp net;
  tidal::head::TdHead head;
  std::vector<std::vector<double>> xs;
  std::vector<std::size_t> ys;
  std::vector<tidal::ProbVector> targets;
  tidal::net::Batch batch() const {
    tidal::net::Batch b;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      b.ids.push_back(static_cast<std::int64_t>(i));
      b.features.emplace_back(xs[i]);
      b.labels.push_back(ys[i]);
    }
    return b;
  }
};

inline double min_abs_preactivation(const GradInstance& g) {
  double m = 1e300;
  for (const auto& x : g.xs) {
    auto tr = g.net.forward(x);
    for (const auto& layer : tr.pre)
      for (double v : layer) m = std::min(m, std::abs(v));
    auto ht = g.head.forward(tr.taps);
    for (const auto& layer : ht.reduced_pre)
      for (double v : layer) m = std::min(m, std::abs(v));
  }
  return m;
}

/// Random instance whose piecewise-linear units sit at least `margin` away from
/// their kinks, so central differences are meaningful.
inline GradInstance make_instance(std::uint64_t seed, tidal::net::NetConfig cfg, std::size_t head_dim,
                                  std::size_t batch, double margin = 1e-3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int attempt = 0;; ++attempt) {
    cfg.seed = seed + static_cast<std::uint64_t>(attempt) * 7919;
    tidal::net::Mlp net(cfg);
    net.initialize(cfg.seed);
    tidal::head::HeadConfig hc{head_dim, net.tap_dims(), cfg.n_classes};
    tidal::head::TdHead head(hc);
    head.initialize(cfg.seed + 1);
    // nonzero biases exercise the bias gradients too
    for (double& p : net.parameters()) p += 0.05 * n01(rng);
    for (double& p : head.parameters()) p += 0.05 * n01(rng);
    GradInstance g{net, head, {}, {}, {}};
    std::uniform_int_distribution<std::size_t> lab(0, cfg.n_classes - 1);
    for (std::size_t i = 0; i < batch; ++i) {
      std::vector<double> x(cfg.input_dim);
      for (double& v : x) v = n01(rng);
      g.xs.push_back(x);
      g.ys.push_back(lab(rng));
      g.targets.push_back(random_prob(cfg.n_classes, rng));
    }
    if (cfg.activation == tidal::net::Activation::tanh && margin <= 0) return g;
    if (min_abs_preactivation(g) > margin || attempt > 200) return g;
  }
}

/// Joint objective recomputed with the oracle forward passes.
inline double oracle_joint_loss(const GradInstance& g, const std::vector<double>& net_params,
                                const std::vector<double>& head_params, double lambda) {
  const auto& cfg = g.net.config();
  const bool relu = cfg.activation == tidal::net::Activation::relu;
  double ce = 0, klsum = 0;
  for (std::size_t i = 0; i < g.xs.size(); ++i) {
    auto out = oracle::mlp_forward(net_params, cfg.input_dim, cfg.hidden_sizes, cfg.n_classes, relu, g.xs[i]);
    ce += -std::log(std::max(out.probs[g.ys[i]], 1e-12));
    std::vector<std::vector<double>> taps;
    for (auto l : cfg.tap_layers) taps.push_back(out.hidden[l]);
    auto q = oracle::head_forward(head_params, taps, g.head.config().reduced_dim, cfg.n_classes);
    const auto t = g.targets[i].values();
    klsum += oracle::kl(std::vector<double>(t.begin(), t.end()), q);
  }
  const double b = static_cast<double>(g.xs.size());
  return ce / b + lambda * klsum / b;
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

struct FdReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

/// Central differences (step h) against grad_joint for every classifier and head parameter.
inline FdReport finite_difference_check(const GradInstance& g, double lambda, double h = 1e-5) {
  const auto grads = tidal::net::grad_joint(g.net, g.head, g.batch(), g.targets, lambda, false);
  std::vector<double> np(g.net.parameters().begin(), g.net.parameters().end());
  std::vector<double> hp(g.head.parameters().begin(), g.head.parameters().end());
  FdReport rep;
  auto probe = [&](std::vector<double>& params, const std::vector<double>& analytic) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double orig = params[i];
      params[i] = orig + h;
      const double up = oracle_joint_loss(g, np, hp, lambda);
      params[i] = orig - h;
      const double down = oracle_joint_loss(g, np, hp, lambda);
      params[i] = orig;
      rep.max_rel_error = std::max(rep.max_rel_error, relative_error(analytic[i], (up - down) / (2 * h)));
      ++rep.checked;
    }
  };
  probe(np, grads.net);
  probe(hp, grads.head);
  return rep;
}

}  // namespace testing_support
