#include "lossylearn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "lossylearn/dispersion.hpp"
#include "lossylearn/error.hpp"
#include "rng.hpp"

namespace lossylearn {

const char* to_string(VerifyStatus s) {
  switch (s) {
    case VerifyStatus::pass: return "pass";
    case VerifyStatus::fail: return "fail";
    case VerifyStatus::skipped_vacuous: return "skipped_vacuous";
    case VerifyStatus::skipped_infeasible: return "skipped_infeasible";
    case VerifyStatus::skipped_domain: return "skipped_domain";
  }
  return "unknown";
}

namespace {

struct Enumeration {
  DatasetUniverse u;
  WorldTuples wt;
};

Enumeration enumerate(const LearningProblem& p, std::size_t k, std::size_t n, std::size_t cap) {
  if (k == 0) throw Error(ErrorKind::domain, "k must be positive");
  Enumeration e{DatasetUniverse(p, n, cap), WorldTuples(p.w, k, cap)};
  if (e.wt.size() > cap / e.u.size()) {
    throw Error(ErrorKind::enumeration_cap, "|W|^k x |T_n| = " + std::to_string(e.wt.size()) + " x " +
                                                std::to_string(e.u.size()) + " exceeds the cap of " +
                                                std::to_string(cap) + "; use Monte Carlo for a fixed strategy");
  }
  return e;
}

// Obtainable datasets per set of queried worlds (bitmask), built on demand.
class UnionMasks {
 public:
  explicit UnionMasks(const DatasetUniverse& u, std::size_t nw) : u_(u), nw_(nw) {}

  const std::vector<bool>& get(const std::vector<std::size_t>& ws) {
    std::size_t key = 0;
    for (std::size_t w : ws) key |= std::size_t{1} << w;
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::vector<std::size_t> present;
    for (std::size_t w = 0; w < nw_; ++w)
      if (key >> w & 1U) present.push_back(w);
    std::vector<bool> m(u_.size());
    for (std::size_t t = 0; t < u_.size(); ++t) m[t] = u_.obtainable_union(present, t);
    return cache_.emplace(key, std::move(m)).first->second;
  }

 private:
  const DatasetUniverse& u_;
  std::size_t nw_;
  std::map<std::size_t, std::vector<bool>> cache_;
};

// (1/k) sum_i d(w_i, h) for every h.
std::vector<double> average_distortion(const LearningProblem& p, const std::vector<std::size_t>& ws) {
  std::vector<double> out(p.num_h(), 0.0);
  for (std::size_t h = 0; h < p.num_h(); ++h) {
    double s = 0.0;
    for (std::size_t w : ws) s += p.d(w, h);
    out[h] = s / static_cast<double>(ws.size());
  }
  return out;
}

std::vector<bool> exceeds(const LearningProblem& p, const std::vector<std::size_t>& ws, double d) {
  const auto avg = average_distortion(p, ws);
  std::vector<bool> out(avg.size());
  for (std::size_t h = 0; h < avg.size(); ++h) out[h] = avg[h] > d + kExcessTolerance;
  return out;
}

}  // namespace

ExcessResult optimal_excess_probability(const LearningProblem& problem, const Algorithm& algorithm, std::size_t k,
                                        std::size_t n, double d, std::size_t cap) {
  const Kernel& a = algorithm.at(n);
  Enumeration e = enumerate(problem, k, n, cap);
  if (problem.w.size() > 62) throw Error(ErrorKind::enumeration_cap, "too many worlds for the union cache");
  UnionMasks masks(e.u, problem.num_w());
  ExcessResult r;
  r.k = k;
  r.n = n;
  r.d = d;
  r.argmin.assign(e.wt.size(), SIZE_MAX);
  for (std::size_t x = 0; x < e.wt.size(); ++x) {
    const double px = e.wt.prob(x);
    const auto ws = e.wt.tuple(x);
    const auto bad = exceeds(problem, ws, d);
    const auto& ok = masks.get(ws);
    double best = 2.0;
    for (std::size_t t = 0; t < e.u.size(); ++t) {
      if (!ok[t]) continue;
      double s = 0.0;
      for (std::size_t h = 0; h < bad.size(); ++h)
        if (bad[h]) s += a(t, h);
      if (s < best) {
        best = s;
        r.argmin[x] = t;
      }
    }
    if (r.argmin[x] == SIZE_MAX) throw Error(ErrorKind::domain, "world tuple " + e.wt.label(x) + " has no obtainable dataset");
    r.value += px * best;
  }
  r.value = std::clamp(r.value, 0.0, 1.0);
  return r;
}

double excess_for_strategy(const LearningProblem& problem, const Algorithm& algorithm, const Kernel& strategy,
                           std::size_t k, std::size_t n, double d, std::size_t cap) {
  const Kernel& a = algorithm.at(n);
  Enumeration e = enumerate(problem, k, n, cap);
  if (strategy.rows() != e.wt.size() || strategy.cols() != e.u.size()) {
    throw Error(ErrorKind::dimension, "strategy must map W^k to T_n");
  }
  double total = 0.0;
  for (std::size_t x = 0; x < e.wt.size(); ++x) {
    const auto bad = exceeds(problem, e.wt.tuple(x), d);
    double s = 0.0;
    for (std::size_t t = 0; t < e.u.size(); ++t) {
      const double q = strategy(x, t);
      if (q == 0.0) continue;
      double m = 0.0;
      for (std::size_t h = 0; h < bad.size(); ++h)
        if (bad[h]) m += a(t, h);
      s += q * m;
    }
    total += e.wt.prob(x) * s;
  }
  return std::clamp(total, 0.0, 1.0);
}

Kernel strategy_kernel(const LearningProblem& problem, std::size_t k, std::size_t n,
                       const std::vector<std::size_t>& choice, std::size_t cap) {
  Enumeration e = enumerate(problem, k, n, cap);
  if (choice.size() != e.wt.size()) throw Error(ErrorKind::dimension, "one dataset choice per world tuple");
  Labels from;
  std::vector<double> rows(e.wt.size() * e.u.size(), 0.0);
  for (std::size_t x = 0; x < e.wt.size(); ++x) {
    from.push_back(e.wt.label(x));
    if (choice[x] >= e.u.size()) throw Error(ErrorKind::dimension, "dataset index out of range");
    rows[x * e.u.size() + choice[x]] = 1.0;
  }
  return Kernel(std::move(from), e.u.labels(), std::move(rows));
}

double min_expected_distortion(const LearningProblem& problem, const Algorithm& algorithm, std::size_t k,
                               std::size_t n, std::size_t cap) {
  const Kernel& a = algorithm.at(n);
  Enumeration e = enumerate(problem, k, n, cap);
  UnionMasks masks(e.u, problem.num_w());
  double total = 0.0;
  for (std::size_t x = 0; x < e.wt.size(); ++x) {
    const auto ws = e.wt.tuple(x);
    const auto avg = average_distortion(problem, ws);
    const auto& ok = masks.get(ws);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < e.u.size(); ++t) {
      if (!ok[t]) continue;
      double s = 0.0;
      for (std::size_t h = 0; h < avg.size(); ++h) s += a(t, h) * avg[h];
      best = std::min(best, s);
    }
    total += e.wt.prob(x) * best;
  }
  return total;
}

OracleReport min_sample_size(const LearningProblem& problem, const Algorithm& algorithm, std::size_t k, double d,
                             double epsilon, std::size_t n_max, std::size_t cap) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error(ErrorKind::domain, "epsilon must lie in [0, 1]");
  OracleReport rep;
  rep.k = k;
  rep.d = d;
  rep.epsilon = epsilon;
  rep.n_max = n_max;
  std::optional<ExcessResult> previous;
  for (std::size_t n : algorithm.sizes()) {
    if (n > n_max) break;
    ExcessResult ex;
    try {
      ex = optimal_excess_probability(problem, algorithm, k, n, d, cap);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::enumeration_cap) throw;
      rep.note = "scan stopped at n = " + std::to_string(n) + ": " + e.detail();
      break;
    }
    rep.scan.emplace_back(n, ex.value);
    if (ex.value <= epsilon + kExcessTolerance) {
      rep.n_star = n;
      rep.at_n_star = ex;
      if (n > 0 && previous && previous->n == n - 1) {
        rep.below_n_star = std::move(previous);
      } else if (n == 0) {
        rep.note = "n* = 0; n* - 1 is undefined";
      } else if (algorithm.has(n - 1)) {
        rep.below_n_star = optimal_excess_probability(problem, algorithm, k, n - 1, d, cap);
      } else {
        rep.note = "algorithm does not define n* - 1 = " + std::to_string(n - 1);
      }
      return rep;
    }
    previous = std::move(ex);
  }
  if (rep.note.empty()) rep.note = "not found up to n_max = " + std::to_string(n_max);
  return rep;
}

MonteCarloEstimate monte_carlo_excess(const LearningProblem& problem, const Algorithm& algorithm,
                                      const Kernel& strategy, std::size_t k, std::size_t n, double d,
                                      std::size_t trials, std::uint64_t seed) {
  if (trials < 100) throw Error(ErrorKind::domain, "Monte Carlo needs at least 100 trials");
  if (k == 0) throw Error(ErrorKind::domain, "k must be positive");
  const Kernel& a = algorithm.at(n);
  const std::size_t nw = problem.num_w();
  const std::size_t tuples = checked_power(nw, k, std::numeric_limits<std::size_t>::max() / 2, "world tuples");
  if (strategy.rows() != tuples || strategy.cols() != a.rows()) {
    throw Error(ErrorKind::dimension, "strategy must map W^k to T_n");
  }
  const auto w_cdf = detail::cumulative(problem.w.probs());
  std::vector<std::vector<double>> s_cdf(tuples), a_cdf(a.rows());
  std::vector<std::vector<bool>> bad(tuples);
  std::size_t hits = 0;
  std::vector<std::size_t> ws(k);
  for (std::size_t done = 0, block = 0; done < trials; ++block) {
    auto g = detail::block_engine(seed, block);
    const std::size_t m = std::min<std::size_t>(detail::kBlockTrials, trials - done);
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t x = 0;
      for (std::size_t j = 0; j < k; ++j) {
        ws[j] = detail::draw(w_cdf, detail::uniform01(g));
        x = x * nw + ws[j];
      }
      if (s_cdf[x].empty()) {
        s_cdf[x] = detail::cumulative(strategy.row(x));
        bad[x] = exceeds(problem, ws, d);
      }
      const std::size_t t = detail::draw(s_cdf[x], detail::uniform01(g));
      if (a_cdf[t].empty()) a_cdf[t] = detail::cumulative(a.row(t));
      const std::size_t h = detail::draw(a_cdf[t], detail::uniform01(g));
      if (bad[x][h]) ++hits;
    }
    done += m;
  }
  MonteCarloEstimate est;
  est.trials = trials;
  est.seed = seed;
  est.hits = hits;
  est.estimate = static_cast<double>(hits) / static_cast<double>(trials);
  est.std_error = std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(trials));
  est.ci_lo = std::max(0.0, est.estimate - 1.96 * est.std_error);
  est.ci_hi = std::min(1.0, est.estimate + 1.96 * est.std_error);
  return est;
}

namespace {

bool skippable(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::domain:
    case ErrorKind::hypothesis:
    case ErrorKind::capability:
    case ErrorKind::enumeration_cap: return true;
    default: return false;
  }
}

}  // namespace

VerifyReport verify_converse(const LearningProblem& problem, const Algorithm& algorithm,
                             const std::vector<GridPoint>& grid, std::size_t n_max, const SolverOptions& opts,
                             const EpsilonOptions& eps_opts) {
  VerifyReport out;
  for (const GridPoint& g : grid) {
    if (!(g.epsilon > 0.0 && g.epsilon < 1.0)) throw Error(ErrorKind::domain, "epsilon must lie in (0, 1)");
    if (g.k == 0) throw Error(ErrorKind::domain, "k must be positive");
    VerifyPoint vp;
    vp.at = g;
    std::optional<TiltedTable> tilted;
    std::optional<BoundReport> bound;
    try {
      vp.rate_n = default_rate_n(problem, algorithm, g.d, opts.cap);
      const Endpoints ep = rd_endpoints(problem, algorithm, vp.rate_n, opts.cap);
      if (g.d <= ep.d_min + 1e-12 || (!ep.d_max_infinite && g.d >= ep.d_max - 1e-12)) {
        vp.reason = "d outside (d_min, d_max) = (" + decimal(ep.d_min) + ", " +
                    (ep.d_max_infinite ? std::string("inf") : decimal(ep.d_max)) + ") at n = " +
                    std::to_string(vp.rate_n);
      } else {
        const RDSolution sol = rate_distortion(problem, algorithm, vp.rate_n, g.d, opts);
        tilted = tilted_information(problem, sol);
        bound = rate_converse_explicit(sol, rate_dispersion(*tilted), g.k, g.epsilon);
      }
    } catch (const Error& e) {
      if (!skippable(e)) throw;
      vp.reason = e.what();
    }
    if (!bound) {
      vp.status = VerifyStatus::skipped_domain;
      ++out.domain;
      out.points.push_back(std::move(vp));
      continue;
    }

    OracleReport oracle;
    try {
      oracle = min_sample_size(problem, algorithm, g.k, g.d, g.epsilon, n_max, opts.cap);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::enumeration_cap) throw;
      oracle.note = e.what();
    }
    vp.n_star = oracle.n_star;
    if (!bound->vacuous) vp.bound_bits = bound->value;

    if (oracle.n_star && oracle.below_n_star) {
      const std::size_t below = *oracle.n_star - 1;
      const BoundReport eb = epsilon_converse(problem, *tilted, g.k, below, eps_opts);
      vp.eps_checked = true;
      vp.eps_oracle = oracle.below_n_star->value;
      vp.eps_bound_raw = eb.components.at("raw");
      vp.eps_ok = vp.eps_oracle >= vp.eps_bound_raw - 1e-9;
      ++out.eps_checks;
      if (!vp.eps_ok) ++out.eps_failures;
    }

    if (bound->vacuous) {
      vp.status = VerifyStatus::skipped_vacuous;
      vp.reason = bound->note;
      ++out.vacuous;
    } else if (!oracle.n_star) {
      vp.status = VerifyStatus::skipped_infeasible;
      vp.reason = oracle.note;
      ++out.infeasible;
    } else {
      vp.oracle_bits = problem.b_bits * static_cast<double>(*oracle.n_star) / static_cast<double>(g.k);
      vp.margin_bits = *vp.oracle_bits - *vp.bound_bits;
      if (*vp.margin_bits < -1e-9) {
        vp.status = VerifyStatus::fail;
        ++out.failures;
        if (g.k > 1) vp.reason = "negative margin at k > 1: single-hypothesis excess vs product tilted sum";
      } else {
        vp.status = VerifyStatus::pass;
        ++out.passes;
      }
    }
    out.points.push_back(std::move(vp));
  }
  return out;
}

}  // namespace lossylearn
