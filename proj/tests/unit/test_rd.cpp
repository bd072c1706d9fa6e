#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lossylearn/info.hpp"
#include "lossylearn/rd.hpp"
#include "../support/check.hpp"
#include "../support/oracles.hpp"
#include "../support/random_problems.hpp"

using namespace lossylearn;
namespace lt = lossylearn::testing;

TEST_CASE("binary Hamming closed forms") {
  const Scenario sym = builtin_sym2(), skew = builtin_skew2();
  for (double d : {0.05, 0.11, 0.2, 0.3, 0.45}) {
    RDSolution s = rate_distortion(sym.problem, sym.algorithm, 1, d);
    CHECK(s.regime == RDRegime::interior);
    CHECK(std::abs(s.rate_bits - (1.0 - lt::h2(d))) < 1e-5);
    CHECK(std::abs(s.achieved_distortion - d) < 1e-6);
    CHECK(s.lambda_star == doctest::Approx(std::log2((1.0 - d) / d)).epsilon(0.01));
  }
  RDSolution s = rate_distortion(skew.problem, skew.algorithm, 1, 0.1);
  CHECK(std::abs(s.rate_bits - 0.252932) < 1e-5);
  CHECK(s.lambda_star == doctest::Approx(3.169925).epsilon(0.01));
  CHECK(s.meta.duality_gap_bits <= 1e-7);
}

TEST_CASE("endpoints") {
  const Scenario sym = builtin_sym2(), skew = builtin_skew2();
  CHECK(d_min(sym.problem, sym.algorithm, 1) == 0.0);
  Endpoints e = rd_endpoints(sym.problem, sym.algorithm, 1);
  CHECK(e.d_max == doctest::Approx(0.5));
  CHECK(!e.d_max_infinite);
  CHECK(rd_endpoints(skew.problem, skew.algorithm, 1).d_max == doctest::Approx(0.2));

  std::map<std::size_t, Kernel> noisy;
  noisy.emplace(1, Kernel(sym.algorithm.at(1).from(), sym.problem.h, {0.9, 0.1, 0.1, 0.9}));
  CHECK(d_min(sym.problem, Algorithm(noisy), 1) == doctest::Approx(0.1));

  LearningProblem disjoint = sym.problem;
  disjoint.observable = {{true, false}, {false, true}};
  disjoint.iid.reset();
  Endpoints inf = rd_endpoints(disjoint, sym.algorithm, 1);
  CHECK(inf.d_max_infinite);
}

TEST_CASE("regimes outside the interior") {
  const Scenario sym = builtin_sym2();
  RDSolution top = rate_distortion(sym.problem, sym.algorithm, 1, 0.6);
  CHECK(top.regime == RDRegime::rate_zero);
  CHECK(top.flagged);
  CHECK(top.rate_bits == doctest::Approx(0.0).epsilon(1e-12));
  RDSolution bottom = rate_distortion(sym.problem, sym.algorithm, 1, 0.0);
  CHECK(bottom.regime == RDRegime::at_d_min);
  CHECK(std::isinf(bottom.lambda_star));
  CHECK(bottom.rate_bits == doctest::Approx(1.0).epsilon(1e-9));

  std::map<std::size_t, Kernel> noisy;
  noisy.emplace(1, Kernel(sym.algorithm.at(1).from(), sym.problem.h, {0.9, 0.1, 0.1, 0.9}));
  CHECK_KIND(rate_distortion(sym.problem, Algorithm(noisy), 1, 0.05), ErrorKind::domain);
  CHECK_KIND(rate_distortion(sym.problem, sym.algorithm, 9, 0.2), ErrorKind::capability);
}

TEST_CASE("multiplier and inversion") {
  const Scenario sym = builtin_sym2(), skew = builtin_skew2();
  LambdaReport l = lambda_star(sym.problem, sym.algorithm, 1, 0.2);
  CHECK(l.dual_bits == doctest::Approx(2.0).epsilon(0.01));
  CHECK(l.agree);
  CHECK(distortion_rate(sym.problem, sym.algorithm, 1, 1.0 - lt::h2(0.11)) == doctest::Approx(0.11).epsilon(1e-4));
  CHECK(std::abs(distortion_rate(skew.problem, skew.algorithm, 1, 0.252932) - 0.1) < 1e-5);
  CHECK_KIND(distortion_rate(sym.problem, sym.algorithm, 1, 1.5), ErrorKind::domain);
  CHECK_KIND(distortion_rate(sym.problem, sym.algorithm, 1, 0.0), ErrorKind::domain);
}

TEST_CASE("solutions are self-consistent on random problems") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    lt::Gen g(seed);
    Scenario s = lt::random_scenario(g, lt::Shape{});
    for (std::size_t n = 1; n <= 2; ++n) {
      Endpoints ep = rd_endpoints(s.problem, s.algorithm, n);
      const double top = ep.d_max_infinite ? s.problem.max_distortion() : ep.d_max;
      if (top - ep.d_min < 1e-6) continue;
      std::vector<double> grid;
      for (double f : {0.15, 0.35, 0.55, 0.75, 0.95}) grid.push_back(ep.d_min + f * (top - ep.d_min));
      RDCurve c = rd_curve(s.problem, s.algorithm, n, grid);
      for (std::size_t i = 0; i < c.points.size(); ++i) {
        const RDSolution& p = c.points[i];
        CHECK(p.achieved_distortion <= p.d + 1e-8);
        if (p.regime == RDRegime::interior) CHECK(std::abs(p.achieved_distortion - p.d) < 1e-6);
        std::vector<double> m(p.induced_joint.mass().begin(), p.induced_joint.mass().end());
        CHECK(std::abs(p.rate_bits - lt::mi_from_entropies(m, s.problem.num_w(), s.problem.num_h())) < 1e-9);
        // structural zeros
        DatasetUniverse u(s.problem, n);
        for (std::size_t w = 0; w < s.problem.num_w(); ++w)
          for (std::size_t t = 0; t < u.size(); ++t)
            if (!u.obtainable(w, t)) CHECK(p.kernel(w, t) == 0.0);
        if (i > 0) CHECK(p.rate_bits <= c.points[i - 1].rate_bits + 1e-9);
        if (i > 0 && i + 1 < c.points.size()) {
          const RDSolution &a = c.points[i - 1], &b = c.points[i + 1];
          const double chord = a.rate_bits + (b.rate_bits - a.rate_bits) * (p.d - a.d) / (b.d - a.d);
          CHECK(p.rate_bits <= chord + 1e-7);
        }
      }
    }
  }
}

// min I(W;H) s.t. E d <= d over kernels on a 1/200 lattice; two worlds only.
static double lattice_rate(const LearningProblem& p, const Algorithm& alg, std::size_t n, double d) {
  DatasetUniverse u(p, n);
  const Kernel& a = alg.at(n);
  const std::size_t nh = p.num_h();
  auto rows_for = [&](std::size_t w) {
    std::vector<std::size_t> ok;
    for (std::size_t t = 0; t < u.size(); ++t)
      if (u.obtainable(w, t)) ok.push_back(t);
    std::vector<std::vector<double>> out;  // P(h|w), E d
    const int steps = 200;
    auto emit = [&](const std::vector<double>& q) {
      std::vector<double> ph(nh + 1, 0.0);
      for (std::size_t i = 0; i < ok.size(); ++i)
        for (std::size_t h = 0; h < nh; ++h) ph[h] += q[i] * a(ok[i], h);
      for (std::size_t h = 0; h < nh; ++h) ph[nh] += ph[h] * p.d(w, h);
      out.push_back(ph);
    };
    if (ok.size() == 1) emit({1.0});
    if (ok.size() == 2)
      for (int i = 0; i <= steps; ++i) emit({i / 200.0, 1.0 - i / 200.0});
    if (ok.size() == 3)
      for (int i = 0; i <= steps; ++i)
        for (int j = 0; i + j <= steps; ++j) emit({i / 200.0, j / 200.0, (steps - i - j) / 200.0});
    return out;
  };
  const auto r0 = rows_for(0), r1 = rows_for(1);
  const double p0 = p.w[0], p1 = p.w[1];
  double best = INFINITY;
  std::vector<double> joint(2 * nh);
  for (const auto& x : r0)
    for (const auto& y : r1) {
      if (p0 * x[nh] + p1 * y[nh] > d + 1e-12) continue;
      for (std::size_t h = 0; h < nh; ++h) {
        joint[h] = p0 * x[h];
        joint[nh + h] = p1 * y[h];
      }
      best = std::min(best, lt::mi_from_entropies(joint, 2, nh));
    }
  return best;
}

TEST_CASE("matches a lattice search over kernels") {
  int compared = 0;
  for (std::uint64_t seed = 1; seed <= 60 && compared < 12; ++seed) {
    lt::Gen g(seed);
    lt::Shape sh;
    sh.min_w = sh.max_w = 2;
    sh.max_s = 3;
    sh.max_n = 1;
    Scenario s = lt::random_scenario(g, sh);
    Endpoints ep = rd_endpoints(s.problem, s.algorithm, 1);
    const double top = ep.d_max_infinite ? s.problem.max_distortion() : ep.d_max;
    if (top - ep.d_min < 0.02) continue;
    const double d = ep.d_min + 0.4 * (top - ep.d_min);
    const RDSolution sol = rate_distortion(s.problem, s.algorithm, 1, d);
    const double lattice = lattice_rate(s.problem, s.algorithm, 1, d);
    CHECK(sol.rate_bits <= lattice + 1e-9);
    CHECK(std::abs(sol.rate_bits - lattice) < 2e-3);
    ++compared;
  }
  CHECK(compared >= 8);
}

TEST_CASE("default rate size") {
  const Scenario sym = builtin_sym2();
  CHECK(default_rate_n(sym.problem, sym.algorithm, 0.2) == 1);
  std::map<std::size_t, Kernel> ks;
  ks.emplace(0, sym.algorithm.at(0));
  ks.emplace(2, sym.algorithm.at(2));
  CHECK(default_rate_n(sym.problem, Algorithm(ks), 0.3) == 2);
}
