// Acceptance suite: one PASS/FAIL line per criterion.
// Exit status is non-zero when a criterion fails that is not listed in kKnownRed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "lossylearn/bounds.hpp"
#include "lossylearn/dispersion.hpp"
#include "lossylearn/error.hpp"
#include "lossylearn/info.hpp"
#include "lossylearn/oracle.hpp"
#include "lossylearn/rd.hpp"
#include "lossylearn/scenario.hpp"
#include "support/oracles.hpp"
#include "support/random_problems.hpp"

using namespace lossylearn;
namespace lt = lossylearn::testing;

namespace {

// Single-hypothesis excess at k > 1 can sit below the product-form epsilon bound.
const std::set<int> kKnownRed = {7};

struct Outcome {
  bool ok = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Solved points shared by criteria 1-4.
struct Solved {
  LearningProblem problem;
  RDSolution sol;
};
std::vector<Solved> g_solved;

// Criterion 3 instances, reused by 8 and 9.
struct Instance {
  Scenario s;
  std::size_t n;
  double d;
};
std::vector<Instance> g_instances;

double midpoint(const Endpoints& ep, const LearningProblem& p) {
  const double top = ep.d_max_infinite ? p.max_distortion() : ep.d_max;
  return ep.d_min + 0.5 * (top - ep.d_min);
}

Outcome c1() {
  Outcome o;
  const Scenario sym = builtin_sym2(), skew = builtin_skew2();
  double worst = 0.0;
  for (int i = 1; i <= 9; ++i) {
    const double d = 0.05 * i;
    RDSolution s = rate_distortion(sym.problem, sym.algorithm, 1, d);
    worst = std::max(worst, std::abs(s.rate_bits - (1.0 - lt::h2(d))));
    g_solved.push_back({sym.problem, s});
  }
  RDSolution s = rate_distortion(skew.problem, skew.algorithm, 1, 0.1);
  g_solved.push_back({skew.problem, s});
  const double r_ref = lt::h2(0.2) - lt::h2(0.1);
  const double l_ref = std::log2(0.9 / 0.1);
  o.ok = worst <= 1e-5 && std::abs(s.rate_bits - r_ref) <= 1e-4 && std::abs(s.lambda_star / l_ref - 1.0) <= 0.01;
  o.detail = fmt("SYM2 worst |R-(1-h2)| %.2e; SKEW2 R(0.1) %.6f, lambda %.6f", worst, s.rate_bits, s.lambda_star);
  return o;
}

Outcome c2() {
  Outcome o;
  const Scenario sym = builtin_sym2(), skew = builtin_skew2();
  double sym_worst = 0.0, skew_worst = 0.0;
  for (double d : {0.05, 0.1, 0.15}) {
    for (const Scenario* sc : {&sym, &skew}) {
      RDSolution s = rate_distortion(sc->problem, sc->algorithm, 1, d);
      g_solved.push_back({sc->problem, s});
      const DispersionReport r = rate_dispersion(tilted_information(sc->problem, s));
      if (sc == &sym) sym_worst = std::max(sym_worst, std::abs(r.V));
      else skew_worst = std::max(skew_worst, std::abs(r.V - 0.64));
    }
  }
  o.ok = sym_worst <= 1e-9 && skew_worst <= 1e-6;
  o.detail = fmt("SYM2 max |V| %.2e; SKEW2 max |V-0.64| %.2e", sym_worst, skew_worst);
  return o;
}

Outcome c3() {
  Outcome o;
  std::size_t problems = 0, points = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; problems < 100 && seed <= 400; ++seed) {
    lt::Gen g(seed);
    Scenario s = lt::random_scenario(g, lt::Shape{});
    std::vector<double> pw(s.problem.w.probs().begin(), s.problem.w.probs().end());
    bool any = false;
    for (std::size_t n = 1; n <= 2; ++n) {
      const Endpoints ep = rd_endpoints(s.problem, s.algorithm, n);
      const double d = midpoint(ep, s.problem);
      if (d - ep.d_min < 1e-6) continue;
      RDSolution sol = rate_distortion(s.problem, s.algorithm, n, d);
      if (sol.flagged) continue;
      const TiltedTable t = tilted_information(s.problem, sol);
      const DispersionReport r = decompose_dispersion(s.problem, s.algorithm, sol, t);
      const double scale = std::max(1.0, r.V);
      worst = std::max({worst, std::abs(r.V - r.V_in - r.V_bet) / scale,
                        std::abs(r.V_in - r.reconstructed_in(pw)) / scale,
                        std::abs(r.V_bet - r.reconstructed_bet()) / scale});
      g_solved.push_back({s.problem, sol});
      g_instances.push_back({s, n, d});
      any = true;
      ++points;
    }
    if (any) ++problems;
  }
  o.ok = problems >= 100 && worst <= 1e-10;
  o.detail = fmt("%zu problems, %zu points, worst error %.2e (relative to max(1,V))", problems, points, worst);
  return o;
}

Outcome c4() {
  Outcome o;
  double worst = 0.0;
  std::size_t tuples = 0, additivity_bad = 0;
  for (const auto& sp : g_solved) {
    const TiltedTable t = tilted_information(sp.problem, sp.sol);
    worst = std::max(worst, std::abs(t.expectation() - sp.sol.rate_bits));
    std::vector<std::pair<std::size_t, std::size_t>> support;
    for (std::size_t w = 0; w < t.num_w(); ++w)
      for (std::size_t h = 0; h < t.num_h(); ++h)
        if (t.mass(w, h) > 0.0) support.push_back({w, h});
    for (std::size_t k = 1; k <= 3; ++k) {
      std::size_t combos = 1;
      for (std::size_t i = 0; i < k; ++i) combos *= support.size();
      for (std::size_t c = 0; c < combos && c < 512; ++c) {
        std::vector<std::size_t> ws, hs;
        double expect = 0.0;
        for (std::size_t i = 0, r = c; i < k; ++i, r /= support.size()) {
          ws.push_back(support[r % support.size()].first);
          hs.push_back(support[r % support.size()].second);
          expect += t.at(ws.back(), hs.back());
        }
        if (tilted_information_k(t, ws, hs) != expect) ++additivity_bad;
        ++tuples;
      }
    }
  }
  o.ok = worst <= 1e-8 && additivity_bad == 0;
  o.detail = fmt("%zu points, worst |E[j]-R| %.2e; %zu/%zu k-fold sums differ", g_solved.size(), worst,
                 additivity_bad, tuples);
  return o;
}

Outcome c5() {
  Outcome o;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    lt::Gen g(5000 + seed);
    auto m = lt::random_markov_triple(g);
    const Joint c = chain(m.w, m.t_given_w, m.h_given_t);
    const Joint wh = marginal_pair(c, 0, 2), wt = marginal_pair(c, 0, 1), th = marginal_pair(c, 1, 2);
    const double iwh = mutual_information(wh), iwt = mutual_information(wt), ith = mutual_information(th);
    const std::vector<double> pwh(wh.mass().begin(), wh.mass().end());
    const double ref = lt::mi_from_entropies(pwh, wh.extent(0), wh.extent(1));
    worst = std::max({worst, std::abs(iwh - ref), std::abs(iwh - (iwt - conditional_mutual_information(c, 2))),
                      std::abs(iwh - (ith - conditional_mutual_information(c, 0))),
                      std::max(0.0, conditional_mutual_information(c, 1)),
                      std::max(0.0, iwh - std::min(iwt, ith))});
  }
  o.ok = worst <= 1e-10;
  o.detail = fmt("100 triples, worst identity or inequality slack %.2e bits", worst);
  return o;
}

struct SweepTotals {
  std::size_t problems = 0, points = 0, pass = 0, fail = 0, vacuous = 0, infeasible = 0, domain = 0;
  std::size_t eps_checks = 0, eps_failures = 0, errors = 0;
  double worst_margin = INFINITY;
  bool skew_k4_vacuous = false, skew_large_k_finite = false;
};
SweepTotals g_sweep;

void sweep_one(const Scenario& s) {
  const Endpoints ep = rd_endpoints(s.problem, s.algorithm, 1);
  const double top = ep.d_max_infinite ? s.problem.max_distortion() : ep.d_max;
  std::vector<GridPoint> grid;
  for (std::size_t k : {1, 2, 3})
    for (double d : {ep.d_min + 0.05, 0.5 * (ep.d_min + top)})
      for (double e : {0.05, 0.2}) grid.push_back({k, d, e});
  try {
    const VerifyReport r = verify_converse(s.problem, s.algorithm, grid, 6);
    ++g_sweep.problems;
    g_sweep.points += r.points.size();
    g_sweep.pass += r.passes;
    g_sweep.fail += r.failures;
    g_sweep.vacuous += r.vacuous;
    g_sweep.infeasible += r.infeasible;
    g_sweep.domain += r.domain;
    g_sweep.eps_checks += r.eps_checks;
    g_sweep.eps_failures += r.eps_failures;
    for (const auto& p : r.points)
      if (p.margin_bits) g_sweep.worst_margin = std::min(g_sweep.worst_margin, *p.margin_bits);
  } catch (const Error&) {
    ++g_sweep.errors;
  }
}

Outcome c6() {
  Outcome o;
  const Scenario skew = builtin_skew2();
  sweep_one(builtin_sym2());
  sweep_one(skew);
  for (std::uint64_t seed = 1001; seed <= 1100; ++seed) {
    lt::Gen g(seed);
    lt::Shape sh;
    sh.max_w = 3;
    sh.max_n = 6;
    sweep_one(lt::random_scenario(g, sh));
  }
  const RDSolution sol = rate_distortion(skew.problem, skew.algorithm, 1, 0.1);
  const DispersionReport rep = rate_dispersion(tilted_information(skew.problem, sol));
  g_sweep.skew_k4_vacuous = rate_converse_explicit(sol, rep, 4, 0.1).vacuous;
  g_sweep.skew_large_k_finite = !rate_converse_explicit(sol, rep, 10000, 0.1).vacuous;
  o.ok = g_sweep.fail == 0 && g_sweep.errors == 0 && g_sweep.skew_k4_vacuous && g_sweep.skew_large_k_finite;
  o.detail = fmt("%zu problems, %zu points: pass %zu fail %zu vacuous %zu infeasible %zu domain %zu errors %zu; "
                 "worst margin %.3g bits; SKEW2 k=4 vacuous %s",
                 g_sweep.problems, g_sweep.points, g_sweep.pass, g_sweep.fail, g_sweep.vacuous, g_sweep.infeasible,
                 g_sweep.domain, g_sweep.errors, g_sweep.worst_margin, g_sweep.skew_k4_vacuous ? "yes" : "no");
  return o;
}

Outcome c7() {
  Outcome o;
  o.ok = g_sweep.eps_checks > 0 && g_sweep.eps_failures == 0;
  o.detail = fmt("%zu cross-checks at n*-1, %zu below the epsilon bound", g_sweep.eps_checks, g_sweep.eps_failures);
  return o;
}

Outcome c8() {
  Outcome o;
  std::size_t feasible = 0;
  double worst = INFINITY;
  for (const auto& in : g_instances) {
    const MiChainReport r = mi_chain_diagnostics(in.s.problem, in.s.algorithm, in.d, in.n, 2);
    if (!r.feasible) continue;
    ++feasible;
    worst = std::min({worst, r.i_w_h - r.rate_bits, r.i_t_h - r.i_w_h});
  }
  o.ok = feasible > 0 && worst >= -1e-9;
  o.detail = fmt("%zu feasible of %zu instances, least slack %.3g bits", feasible, g_instances.size(), worst);
  return o;
}

Outcome c9() {
  Outcome o;
  std::size_t checked = 0, bad = 0;
  for (const auto& in : g_instances) {
    const StabilityReport r = stability_diagnostics(in.s.problem, in.s.algorithm, in.n);
    for (double lhs : r.lhs) {
      ++checked;
      if (lhs > r.rhs) ++bad;
    }
  }
  o.ok = checked > 0 && bad == 0;
  o.detail = fmt("%zu per-world checks over %zu instances, %zu violations", checked, g_instances.size(), bad);
  return o;
}

Outcome c10() {
  Outcome o;
  std::size_t outside = 0, unstable = 0;
  double worst_z = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    lt::Gen g(7000 + seed);
    lt::Shape sh;
    sh.max_w = 3;
    sh.max_h = 3;
    Scenario s = lt::random_scenario(g, sh);
    const std::size_t k = g.index(1, 2), n = g.index(1, 2);
    const double d = g.uniform(0.1, 0.9);
    const WorldTuples wt(s.problem.w, k);
    const DatasetUniverse u(s.problem, n);
    Labels from;
    std::vector<double> rows;
    for (std::size_t x = 0; x < wt.size(); ++x) {
      from.push_back(wt.label(x));
      auto r = g.simplex(u.size(), 0.5);
      rows.insert(rows.end(), r.begin(), r.end());
    }
    const Kernel strategy(from, u.labels(), std::move(rows));
    const double exact = excess_for_strategy(s.problem, s.algorithm, strategy, k, n, d);
    const MonteCarloEstimate a = monte_carlo_excess(s.problem, s.algorithm, strategy, k, n, d, 100000, seed);
    const MonteCarloEstimate b = monte_carlo_excess(s.problem, s.algorithm, strategy, k, n, d, 100000, seed);
    if (a.hits != b.hits || a.estimate != b.estimate) ++unstable;
    const double sigma = std::sqrt(exact * (1.0 - exact) / 1e5);
    const double dev = std::abs(a.estimate - exact);
    if (sigma == 0.0 ? dev > 1e-12 : dev > 3.0 * sigma) ++outside;
    if (sigma > 0.0) worst_z = std::max(worst_z, dev / sigma);
  }
  o.ok = outside == 0 && unstable == 0;
  o.detail = fmt("50 triples, %zu outside 3 sigma (largest %.2f sigma), %zu non-reproducible", outside, worst_z,
                 unstable);
  return o;
}

Outcome c11() {
  Outcome o;
  double worst = 0.0;
  const double lo = std::log(1e-10), hi = std::log1p(-1e-10);
  for (int i = 0; i < 10000; ++i) {
    const double p = std::exp(lo + (hi - lo) * i / 9999.0);
    worst = std::max(worst, std::abs(gaussian_Q(gaussian_Q_inv(p)) - p));
  }
  o.ok = worst <= 1e-12;
  o.detail = fmt("10000 points, worst |Q(Qinv(p))-p| %.2e", worst);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;  // 0: no runtime limit
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "rate-distortion golden values", 5.0, c1},
      {2, "dispersion golden values", 1.0, c2},
      {3, "dispersion decomposition identities", 60.0, c3},
      {4, "tilted expectation and k-fold additivity", 0.0, c4},
      {5, "information identities and data processing", 5.0, c5},
      {6, "converse verification sweep", 600.0, c6},
      {7, "epsilon bound cross-check at n*-1", 0.0, c7},
      {8, "mutual information chain", 0.0, c8},
      {9, "Efron-Stein stability", 0.0, c9},
      {10, "Monte Carlo agreement and reproducibility", 120.0, c10},
      {11, "Q round trip", 0.0, c11},
  };
  int unexpected = 0;
  for (const auto& c : all) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = seconds_since(t0);
    if (c.budget_s > 0.0 && dt > c.budget_s) {
      o.ok = false;
      o.detail += fmt(" [over budget %.0f s]", c.budget_s);
    }
    const bool known = kKnownRed.count(c.id) > 0;
    std::printf("%s C%-2d %-45s %7.2fs  %s%s\n", o.ok ? "PASS" : "FAIL", c.id, c.name, dt, o.detail.c_str(),
                !o.ok && known ? "  (known red)" : "");
    std::fflush(stdout);
    if (!o.ok && !known) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
