#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "lossylearn/prob.hpp"
#include "lossylearn/scenario.hpp"

namespace lossylearn::testing {

struct Shape {
  std::size_t min_w = 2, max_w = 4;
  std::size_t min_h = 2, max_h = 4;
  std::size_t min_s = 2, max_s = 3;
  std::size_t max_n = 2;
  double observe_p = 0.75;     // chance a sample is observable from a world
  double zero_world_p = 0.0;   // chance of a world with probability zero
};

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : g_(seed) {}

  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(g_);
  }
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(g_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(g_); }
  bool coin(double p) { return uniform() < p; }

  /// Dirichlet(1) draw; with `sparse`, each entry is zeroed with that chance (at least one survives).
  std::vector<double> simplex(std::size_t m, double sparse = 0.0) {
    std::vector<double> v(m);
    double s = 0.0;
    for (auto& x : v) s += (x = -std::log(1.0 - uniform()));
    if (sparse > 0.0) {
      const std::size_t keep = index(0, m - 1);
      for (std::size_t i = 0; i < m; ++i)
        if (i != keep && coin(sparse)) {
          s -= v[i];
          v[i] = 0.0;
        }
    }
    for (auto& x : v) x /= s;
    return v;
  }

  std::mt19937_64& engine() { return g_; }

 private:
  std::mt19937_64 g_;
};

inline Labels names(const std::string& prefix, std::size_t m) {
  Labels out;
  for (std::size_t i = 0; i < m; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

inline Kernel random_kernel(Gen& g, const Labels& from, const Labels& to, double sparse = 0.0) {
  std::vector<double> rows;
  for (std::size_t i = 0; i < from.size(); ++i) {
    auto r = g.simplex(to.size(), sparse);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  return Kernel(from, to, std::move(rows));
}

/// Vote-based learner: each sample carries a score vector over H, datasets add
/// scores and a softmax (or hard argmax with lowest-index ties) picks H.
inline Algorithm vote_algorithm(Gen& g, const LearningProblem& p, std::size_t max_n) {
  const std::size_t ns = p.num_samples(), nh = p.num_h();
  std::vector<double> score(ns * nh), bias(nh);
  for (auto& x : score) x = g.normal();
  for (auto& x : bias) x = 0.5 * g.normal();
  const bool hard = g.coin(0.25);
  const double temp = g.uniform(0.5, 3.0);
  std::map<std::size_t, Kernel> kernels;
  for (std::size_t n = 0; n <= max_n; ++n) {
    DatasetUniverse u(p, n);
    std::vector<double> rows(u.size() * nh);
    for (std::size_t t = 0; t < u.size(); ++t) {
      std::vector<double> logit(bias);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t h = 0; h < nh; ++h) logit[h] += score[u.sample_at(t, i) * nh + h];
      if (hard) {
        const auto best = static_cast<std::size_t>(std::max_element(logit.begin(), logit.end()) - logit.begin());
        rows[t * nh + best] = 1.0;
        continue;
      }
      const double mx = *std::max_element(logit.begin(), logit.end());
      double z = 0.0;
      for (std::size_t h = 0; h < nh; ++h) z += (rows[t * nh + h] = std::exp(temp * (logit[h] - mx)));
      for (std::size_t h = 0; h < nh; ++h) rows[t * nh + h] /= z;
    }
    kernels.emplace(n, Kernel(u.labels(), p.h, std::move(rows)));
  }
  return Algorithm(std::move(kernels));
}

inline Scenario random_scenario(Gen& g, const Shape& shape) {
  const std::size_t nw = g.index(shape.min_w, shape.max_w);
  const std::size_t nh = g.index(shape.min_h, shape.max_h);
  const std::size_t ns = g.index(shape.min_s, shape.max_s);
  LearningProblem p;
  auto pw = g.simplex(nw);
  if (shape.zero_world_p > 0.0 && nw > 1 && g.coin(shape.zero_world_p)) {
    const std::size_t z = g.index(0, nw - 1);
    pw[z] = 0.0;
    double s = 0.0;
    for (double x : pw) s += x;
    for (double& x : pw) x /= s;
  }
  p.w = Distribution(names("w", nw), pw);
  p.samples = names("s", ns);
  p.b_bits = std::log2(static_cast<double>(ns));
  p.h = names("h", nh);
  p.observable.assign(nw, std::vector<bool>(ns, false));
  std::vector<double> law(nw * ns, 0.0);
  for (std::size_t w = 0; w < nw; ++w) {
    const std::size_t keep = g.index(0, ns - 1);
    for (std::size_t s = 0; s < ns; ++s) p.observable[w][s] = s == keep || g.coin(shape.observe_p);
    double z = 0.0;
    for (std::size_t s = 0; s < ns; ++s)
      if (p.observable[w][s]) z += (law[w * ns + s] = 0.1 + g.uniform());
    for (std::size_t s = 0; s < ns; ++s) law[w * ns + s] /= z;
  }
  p.iid = Kernel(p.w.labels(), p.samples, std::move(law));
  p.distortion.resize(nw * nh);
  for (auto& x : p.distortion) x = g.uniform();
  p.validate();
  Algorithm a = vote_algorithm(g, p, shape.max_n);
  validate_algorithm(p, a);
  return Scenario{std::move(p), std::move(a)};
}

struct MarkovTriple {
  Distribution w;
  Kernel t_given_w;
  Kernel h_given_t;
};

inline MarkovTriple random_markov_triple(Gen& g) {
  const std::size_t nw = g.index(1, 4), nt = g.index(1, 5), nh = g.index(1, 4);
  MarkovTriple m;
  m.w = Distribution(names("w", nw), g.simplex(nw, 0.2));
  m.t_given_w = random_kernel(g, m.w.labels(), names("t", nt), 0.3);
  m.h_given_t = random_kernel(g, m.t_given_w.to(), names("h", nh), 0.3);
  return m;
}

}  // namespace lossylearn::testing
