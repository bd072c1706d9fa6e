#include "lossylearn/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lossylearn/error.hpp"
#include "lossylearn/info.hpp"
#include "rng.hpp"

namespace lossylearn {

const char* to_string(BoundKind k) {
  switch (k) {
    case BoundKind::epsilon_converse: return "epsilon_converse";
    case BoundKind::rate_explicit: return "rate_explicit";
    case BoundKind::rate_asymptotic: return "rate_asymptotic";
    case BoundKind::distortion_asymptotic: return "distortion_asymptotic";
  }
  return "unknown";
}

double gaussian_Q(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

namespace {

// Acklam's rational approximation to the standard normal quantile.
double acklam(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                             1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                             6.680131188771972e+01,  -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                             -2.549671464427670e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                             3.754408661907416e+00};
  const double lo = 0.02425, hi = 1.0 - lo;
  if (p < lo) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > hi) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5, r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double gaussian_Q_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::domain, "Q^-1 needs p in (0, 1), got " + decimal(p));
  double x = -acklam(p);
  // Halley refinement on Q(x) - p; Q'(x) = -phi(x).
  for (int i = 0; i < 3; ++i) {
    const double e = gaussian_Q(x) - p;
    const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    if (phi == 0.0) break;
    const double u = -e / phi;
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

namespace {

struct Atoms {
  std::vector<double> value;
  std::vector<double> prob;
};

// sup over gamma of tail(c + gamma) - e^-gamma for a discrete law sorted by value.
void sup_over_gamma(const Atoms& a, double c, const EpsilonOptions& opts, BoundReport& rep) {
  const std::size_t m = a.value.size();
  std::vector<double> tail(m + 1, 0.0);
  for (std::size_t i = m; i-- > 0;) tail[i] = tail[i + 1] + a.prob[i];
  for (double& v : tail) v = std::min(v, 1.0);
  auto tail_at = [&](double x) {
    const auto it = std::lower_bound(a.value.begin(), a.value.end(), x);
    return tail[static_cast<std::size_t>(it - a.value.begin())];
  };
  double best = tail_at(c) - 1.0, best_gamma = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (a.value[i] < c) continue;
    const double g = a.value[i] - c;
    const double v = tail[i] - std::exp(-g);
    if (v > best) {
      best = v;
      best_gamma = g;
    }
  }
  const std::size_t pts = std::max<std::size_t>(opts.grid_points, 2);
  const double g_lo = 1e-6;
  for (std::size_t i = 1; i < pts; ++i) {
    const double g = g_lo * std::pow(opts.grid_max_nats / g_lo, static_cast<double>(i - 1) / static_cast<double>(pts - 2));
    const double v = tail_at(c + g) - std::exp(-g);
    if (v > best) {
      best = v;
      best_gamma = g;
    }
  }
  rep.components["raw"] = best;
  rep.components["clipped"] = std::max(0.0, best);
  rep.components["gamma"] = best_gamma;
  rep.value = std::max(0.0, best);
}

}  // namespace

BoundReport epsilon_converse(const LearningProblem& problem, const TiltedTable& t, std::size_t k, std::size_t n,
                             const EpsilonOptions& opts) {
  if (k == 0) throw Error(ErrorKind::domain, "k must be positive");
  BoundReport rep;
  rep.kind = BoundKind::epsilon_converse;
  rep.k = k;
  rep.d = t.d;
  rep.n = n;
  const double unit = opts.literal_mixed_base ? 1.0 : kLn2;
  const double c = problem.b_bits * static_cast<double>(n) * unit;
  rep.components["threshold"] = c;
  rep.components["literal_mixed_base"] = opts.literal_mixed_base ? 1.0 : 0.0;
  rep.note = opts.literal_mixed_base ? "sum in bits against b n + gamma, penalty e^-gamma"
                                     : "sum in nats against b n ln2 + gamma, penalty e^-gamma";

  std::vector<double> single_v, single_p;
  for (std::size_t w = 0; w < t.num_w(); ++w)
    for (std::size_t h = 0; h < t.num_h(); ++h)
      if (t.mass(w, h) > 0.0) {
        single_v.push_back(t.at(w, h) * unit);
        single_p.push_back(t.mass(w, h));
      }

  // Exact k-fold convolution with exact-value merging.
  std::map<double, double> law{{0.0, 1.0}};
  bool exact = true;
  for (std::size_t i = 0; i < k && exact; ++i) {
    std::map<double, double> next;
    for (const auto& [v, p] : law)
      for (std::size_t a = 0; a < single_v.size(); ++a) next[v + single_v[a]] += p * single_p[a];
    if (next.size() > opts.atom_cap) exact = false;
    law = std::move(next);
  }

  Atoms atoms;
  if (exact) {
    for (const auto& [v, p] : law) {
      atoms.value.push_back(v);
      atoms.prob.push_back(p);
    }
  } else {
    const auto cdf = detail::cumulative(single_p);
    std::map<double, std::size_t> counts;
    for (std::size_t done = 0, block = 0; done < opts.trials; ++block) {
      auto g = detail::block_engine(opts.seed, block);
      const std::size_t m = std::min<std::size_t>(detail::kBlockTrials, opts.trials - done);
      for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) s += single_v[detail::draw(cdf, detail::uniform01(g))];
        ++counts[s];
      }
      done += m;
    }
    for (const auto& [v, cnt] : counts) {
      atoms.value.push_back(v);
      atoms.prob.push_back(static_cast<double>(cnt) / static_cast<double>(opts.trials));
    }
    rep.note += "; Monte Carlo estimate of the tail";
  }
  rep.components["atoms"] = static_cast<double>(atoms.value.size());
  rep.components["monte_carlo"] = exact ? 0.0 : 1.0;
  sup_over_gamma(atoms, c, opts, rep);
  if (!exact) {
    const double g = rep.components["gamma"];
    const auto it = std::lower_bound(atoms.value.begin(), atoms.value.end(), c + g);
    double p = 0.0;
    for (auto j = static_cast<std::size_t>(it - atoms.value.begin()); j < atoms.prob.size(); ++j) p += atoms.prob[j];
    rep.components["mc_halfwidth"] = 1.96 * std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(opts.trials));
  }
  return rep;
}

namespace {

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorKind::domain, "epsilon must lie in (0, 1), got " + decimal(eps));
}

void check_solution(const RDSolution& sol) {
  if (sol.flagged) throw Error(ErrorKind::domain, "bound needs an interior solution (" + sol.flag_reason + ")");
}

}  // namespace

BoundReport rate_converse_explicit(const RDSolution& sol, const DispersionReport& report, std::size_t k,
                                   double epsilon) {
  check_eps(epsilon);
  check_solution(sol);
  if (k == 0) throw Error(ErrorKind::domain, "k must be positive");
  BoundReport rep;
  rep.kind = BoundKind::rate_explicit;
  rep.k = k;
  rep.d = sol.d;
  rep.epsilon = epsilon;
  rep.n = sol.n;
  const double kk = static_cast<double>(k);
  const double r_nats = sol.rate_bits * kLn2;
  const double v_nats = report.V * kLn2 * kLn2;
  rep.components["R_bits"] = sol.rate_bits;
  rep.components["V_bits2"] = report.V;
  if (report.V > kZeroDispersion) {
    const double gamma = 0.5 * std::log(kk);
    const double B = berry_esseen_B(report);
    const double eps_k = epsilon + std::exp(-gamma) + B / std::sqrt(kk);
    rep.components["gamma_nats"] = gamma;
    rep.components["B"] = B;
    rep.components["eps_k"] = eps_k;
    if (eps_k >= 1.0) {
      rep.vacuous = true;
      rep.note = "eps_k >= 1";
      return rep;
    }
    const double qi = gaussian_Q_inv(eps_k);
    const double disp = std::sqrt(v_nats / kk) * qi;
    const double gterm = gamma / kk;
    rep.components["Q_inv"] = qi;
    rep.components["dispersion_term_bits"] = disp / kLn2;
    rep.components["gamma_term_bits"] = -gterm / kLn2;
    rep.value = (r_nats + disp - gterm) / kLn2;
  } else {
    const double gamma = std::log(1.0 / (1.0 - epsilon));
    rep.components["gamma_nats"] = gamma;
    rep.components["gamma_term_bits"] = -gamma / kk / kLn2;
    rep.note = "zero dispersion";
    rep.value = (r_nats - gamma / kk) / kLn2;
  }
  return rep;
}

BoundReport rate_converse_asymptotic(const RDSolution& sol, const DispersionReport& report, std::size_t k,
                                     double epsilon) {
  check_eps(epsilon);
  check_solution(sol);
  if (k == 0) throw Error(ErrorKind::domain, "k must be positive");
  BoundReport rep;
  rep.kind = BoundKind::rate_asymptotic;
  rep.k = k;
  rep.d = sol.d;
  rep.epsilon = epsilon;
  rep.n = sol.n;
  rep.diagnostic = true;
  rep.note = "asymptotic display: O(log k / k) dropped";
  const double qi = gaussian_Q_inv(epsilon);
  const double disp = std::sqrt(report.V * kLn2 * kLn2 / static_cast<double>(k)) * qi;
  rep.components["R_bits"] = sol.rate_bits;
  rep.components["V_bits2"] = report.V;
  rep.components["Q_inv"] = qi;
  rep.components["dispersion_term_bits"] = disp / kLn2;
  rep.value = (sol.rate_bits * kLn2 + disp) / kLn2;
  return rep;
}

BoundReport distortion_converse(const LearningProblem& problem, const Algorithm& algorithm, std::size_t n,
                                double rate_bits, std::size_t k, double epsilon, const SolverOptions& opts) {
  check_eps(epsilon);
  if (k == 0) throw Error(ErrorKind::domain, "k must be positive");
  const double D = distortion_rate(problem, algorithm, n, rate_bits, opts);
  const RDSolution sol = rate_distortion(problem, algorithm, n, D, opts);
  if (sol.regime != RDRegime::interior || !(sol.lambda_star > 0.0) || !std::isfinite(sol.lambda_star)) {
    throw Error(ErrorKind::hypothesis, "the rate-distortion curve is not strictly decreasing at d = " + decimal(D));
  }
  const TiltedTable t = tilted_information(problem, sol);
  const DispersionReport disp = rate_dispersion(t);
  BoundReport rep;
  rep.kind = BoundKind::distortion_asymptotic;
  rep.k = k;
  rep.rate_bits = rate_bits;
  rep.epsilon = epsilon;
  rep.n = n;
  rep.d = D;
  rep.diagnostic = true;
  rep.note = "asymptotic display: derivative remainder and O(log k / k) dropped";
  const double lam = sol.lambda_star;
  const double curly_v = disp.V / (lam * lam);
  const double qi = gaussian_Q_inv(epsilon);
  rep.components["D"] = D;
  rep.components["lambda_star"] = lam;
  rep.components["D_prime"] = -1.0 / lam;
  rep.components["V_bits2"] = disp.V;
  rep.components["distortion_dispersion"] = curly_v;
  rep.components["Q_inv"] = qi;
  rep.value = D + std::sqrt(curly_v / static_cast<double>(k)) * qi;
  return rep;
}

std::optional<std::size_t> sample_complexity_lower(const BoundReport& bound, const LearningProblem& problem,
                                                   std::size_t k) {
  if (bound.vacuous || !bound.value) return std::nullopt;
  const double v = *bound.value;
  if (v <= 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(static_cast<double>(k) * v / problem.b_bits - 1e-9));
}

}  // namespace lossylearn
