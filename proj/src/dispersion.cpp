#include "lossylearn/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lossylearn/error.hpp"
#include "lossylearn/info.hpp"

namespace lossylearn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Weighted moments over the positive-weight entries, two-pass.
double weighted_mean(const std::vector<double>& p, const std::vector<double>& x) {
  double m = 0.0, z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) {
      m += p[i] * x[i];
      z += p[i];
    }
  return z > 0.0 ? m / z : 0.0;
}

double weighted_cov(const std::vector<double>& p, const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = weighted_mean(p, x), my = weighted_mean(p, y);
  double s = 0.0, z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) {
      s += p[i] * (x[i] - mx) * (y[i] - my);
      z += p[i];
    }
  return z > 0.0 ? s / z : 0.0;
}

double weighted_var(const std::vector<double>& p, const std::vector<double>& x) { return weighted_cov(p, x, x); }

}  // namespace

double TiltedTable::expectation() const {
  double s = 0.0;
  for (std::size_t w = 0; w < num_w(); ++w)
    for (std::size_t h = 0; h < num_h(); ++h)
      if (mass(w, h) > 0.0) s += mass(w, h) * at(w, h);
  return s;
}

TiltedTable tilted_information(const LearningProblem& problem, const RDSolution& sol) {
  if (sol.flagged) {
    throw Error(ErrorKind::domain, "tilted information needs an interior solution (" + sol.flag_reason + ")");
  }
  if (!std::isfinite(sol.lambda_star) || sol.lambda_star <= 0.0) {
    throw Error(ErrorKind::domain, "tilted information needs a finite positive multiplier");
  }
  TiltedTable t;
  t.d = sol.d;
  t.lambda_star = sol.lambda_star;
  t.rate_bits = sol.rate_bits;
  t.joint = sol.induced_joint;
  const DensityTable dens = information_density(t.joint);
  const std::size_t nw = t.num_w(), nh = t.num_h();
  t.values.assign(nw * nh, -kInf);
  t.iota.assign(nw * nh, -kInf);
  for (std::size_t w = 0; w < nw; ++w)
    for (std::size_t h = 0; h < nh; ++h) {
      if (t.mass(w, h) <= 0.0) continue;
      const double iota = dens.at(w, h) / kLn2;
      t.iota[w * nh + h] = iota;
      t.values[w * nh + h] = iota + t.lambda_star * (problem.d(w, h) - t.d);
    }
  return t;
}

double tilted_information_k(const TiltedTable& t, const std::vector<std::size_t>& w_tuple,
                            const std::vector<std::size_t>& h_tuple) {
  if (w_tuple.size() != h_tuple.size()) throw Error(ErrorKind::dimension, "world and hypothesis tuples differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < w_tuple.size(); ++i) {
    const std::size_t w = w_tuple[i], h = h_tuple[i];
    if (w >= t.num_w() || h >= t.num_h()) throw Error(ErrorKind::dimension, "tuple index out of range");
    if (t.mass(w, h) <= 0.0) {
      throw Error(ErrorKind::domain, "pair (" + t.joint.axis(0)[w] + ", " + t.joint.axis(1)[h] +
                                         ") lies outside the support of the optimal chain");
    }
    s += t.at(w, h);
  }
  return s;
}

DispersionReport rate_dispersion(const TiltedTable& t) {
  DispersionReport r;
  r.lambda_star = t.lambda_star;
  r.mean = t.expectation();
  for (std::size_t w = 0; w < t.num_w(); ++w)
    for (std::size_t h = 0; h < t.num_h(); ++h) {
      const double p = t.mass(w, h);
      if (p <= 0.0) continue;
      const double c = t.at(w, h) - r.mean;
      r.V += p * c * c;
      r.A3 += p * std::abs(c) * c * c;
    }
  return r;
}

double DispersionReport::reconstructed_in(const std::vector<double>& pw) const {
  double s = 0.0;
  for (std::size_t w = 0; w < pw.size(); ++w) {
    s += pw[w] * (weight_iota * (v_in_iota_S[w] + v_in_iota_A[w]) + weight_d * (v_in_d_S[w] + v_in_d_A[w]) +
                  weight_cov * v_in_cov[w]);
  }
  return s;
}

double DispersionReport::reconstructed_bet() const {
  return weight_iota * v_bet_iota + weight_d * v_bet_d + weight_cov * v_bet_cov;
}

DispersionReport decompose_dispersion(const LearningProblem& problem, const Algorithm& algorithm,
                                      const RDSolution& sol, const TiltedTable& t) {
  DispersionReport r = rate_dispersion(t);
  const Kernel& a = algorithm.at(sol.n);
  const Kernel& s = sol.kernel;
  if (s.cols() != a.rows()) throw Error(ErrorKind::dimension, "sampling kernel and algorithm disagree on T_n");
  const std::size_t nw = t.num_w(), nh = t.num_h(), nt = a.rows();
  const double lam = t.lambda_star;
  r.decomposed = true;
  r.weight_iota = 1.0;
  r.weight_d = lam * lam;
  r.weight_cov = 2.0 * lam;
  r.v_in_iota_S.assign(nw, 0.0);
  r.v_in_iota_A.assign(nw, 0.0);
  r.v_in_d_S.assign(nw, 0.0);
  r.v_in_d_A.assign(nw, 0.0);
  r.v_in_cov.assign(nw, 0.0);

  std::vector<double> pw(nw), mean_iota(nw, 0.0), mean_d(nw, 0.0), mean_j(nw, 0.0), var_j(nw, 0.0);
  for (std::size_t w = 0; w < nw; ++w) {
    pw[w] = problem.w[w];
    if (pw[w] <= 0.0) continue;
    // T | w and, per t, H | t.
    std::vector<double> pt(nt), et_iota(nt, 0.0), et_d(nt, 0.0), vt_iota(nt, 0.0), vt_d(nt, 0.0);
    std::vector<double> ph(nh, 0.0);
    for (std::size_t tt = 0; tt < nt; ++tt) {
      pt[tt] = s(w, tt);
      if (pt[tt] <= 0.0) continue;
      std::vector<double> row(a.row(tt).begin(), a.row(tt).end()), io(nh, 0.0), dd(nh, 0.0);
      for (std::size_t h = 0; h < nh; ++h) {
        ph[h] += pt[tt] * row[h];
        if (row[h] <= 0.0) continue;
        io[h] = t.iota[w * nh + h];
        dd[h] = problem.d(w, h);
        if (!std::isfinite(io[h])) {
          throw Error(ErrorKind::support, "optimal chain reaches a pair with zero induced mass");
        }
      }
      et_iota[tt] = weighted_mean(row, io);
      et_d[tt] = weighted_mean(row, dd);
      vt_iota[tt] = weighted_var(row, io);
      vt_d[tt] = weighted_var(row, dd);
    }
    r.v_in_iota_S[w] = weighted_var(pt, et_iota);
    r.v_in_d_S[w] = weighted_var(pt, et_d);
    r.v_in_iota_A[w] = weighted_mean(pt, vt_iota);
    r.v_in_d_A[w] = weighted_mean(pt, vt_d);

    std::vector<double> io(nh, 0.0), dd(nh, 0.0), jj(nh, 0.0);
    for (std::size_t h = 0; h < nh; ++h) {
      if (ph[h] <= 0.0) continue;
      io[h] = t.iota[w * nh + h];
      dd[h] = problem.d(w, h);
      jj[h] = io[h] + lam * (dd[h] - t.d);
    }
    r.v_in_cov[w] = weighted_cov(ph, io, dd);
    mean_iota[w] = weighted_mean(ph, io);
    mean_d[w] = weighted_mean(ph, dd);
    mean_j[w] = weighted_mean(ph, jj);
    var_j[w] = weighted_var(ph, jj);
  }
  r.v_bet_iota = weighted_var(pw, mean_iota);
  r.v_bet_d = weighted_var(pw, mean_d);
  r.v_bet_cov = weighted_cov(pw, mean_iota, mean_d);
  r.V_in = weighted_mean(pw, var_j);
  r.V_bet = weighted_var(pw, mean_j);
  return r;
}

double berry_esseen_B(const DispersionReport& r) {
  if (!(r.V > kZeroDispersion)) {
    throw Error(ErrorKind::domain, "Berry-Esseen constant is undefined for zero dispersion");
  }
  return 6.0 * r.A3 / std::pow(r.V, 1.5);
}

namespace {

std::vector<double> expected_distortion_rows(const LearningProblem& p, const Kernel& a) {
  std::vector<double> out(a.rows() * p.num_w(), 0.0);
  for (std::size_t t = 0; t < a.rows(); ++t)
    for (std::size_t w = 0; w < p.num_w(); ++w) {
      double e = 0.0;
      for (std::size_t h = 0; h < p.num_h(); ++h) e += a(t, h) * p.d(w, h);
      out[t * p.num_w() + w] = e;
    }
  return out;
}

}  // namespace

double uniform_stability_beta(const LearningProblem& problem, const Algorithm& algorithm, std::size_t n,
                              std::size_t cap) {
  if (n == 0) throw Error(ErrorKind::domain, "stability needs n >= 1");
  if (!algorithm.has(n) || !algorithm.has(n - 1)) {
    throw Error(ErrorKind::capability, "algorithm must define sizes " + std::to_string(n - 1) + " and " +
                                           std::to_string(n));
  }
  DatasetUniverse u(problem, n, cap);
  const auto full = expected_distortion_rows(problem, algorithm.at(n));
  const auto less = expected_distortion_rows(problem, algorithm.at(n - 1));
  const std::size_t nw = problem.num_w();
  double beta = 0.0;
  for (std::size_t t = 0; t < u.size(); ++t)
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t s = u.drop(t, i);
      for (std::size_t w = 0; w < nw; ++w) beta = std::max(beta, std::abs(full[t * nw + w] - less[s * nw + w]));
    }
  return beta;
}

StabilityReport stability_diagnostics(const LearningProblem& problem, const Algorithm& algorithm, std::size_t n,
                                      std::size_t cap) {
  if (!problem.iid) throw Error(ErrorKind::capability, "scenario carries no i.i.d. sample law");
  StabilityReport rep;
  rep.n = n;
  rep.beta = uniform_stability_beta(problem, algorithm, n, cap);
  rep.rhs = 2.0 * static_cast<double>(n) * rep.beta * rep.beta;
  const Kernel iid = iid_dataset_kernel(problem, n, cap);
  const Kernel& a = algorithm.at(n);
  const auto e = expected_distortion_rows(problem, a);
  const std::size_t nw = problem.num_w(), nt = a.rows();
  for (std::size_t w = 0; w < nw; ++w) {
    std::vector<double> pt(nt), f(nt), inner(nt);
    for (std::size_t t = 0; t < nt; ++t) {
      pt[t] = iid(w, t);
      f[t] = e[t * nw + w];
      std::vector<double> row(a.row(t).begin(), a.row(t).end()), dd(problem.num_h());
      for (std::size_t h = 0; h < dd.size(); ++h) dd[h] = problem.d(w, h);
      inner[t] = weighted_var(row, dd);
    }
    rep.lhs.push_back(weighted_var(pt, f));
    rep.expected_inner_variance.push_back(weighted_mean(pt, inner));
    if (rep.lhs.back() > rep.rhs + 1e-12) rep.holds = false;
  }

  if (const auto& det = algorithm.deterministic(); det && det->map.count(n)) {
    const auto& m = det->map.at(n);
    const std::size_t nr = det->seed_vectors();
    double rho = 0.0;
    for (std::size_t t = 0; t < nt; ++t)
      for (std::size_t r1 = 0; r1 < nr; ++r1)
        for (std::size_t r2 = r1 + 1; r2 < nr; ++r2) {
          std::size_t diff = 0;
          for (std::size_t i = 0; i < det->seed_len && diff < 2; ++i)
            if (det->seed_coord(r1, i) != det->seed_coord(r2, i)) ++diff;
          if (diff != 1) continue;
          for (std::size_t w = 0; w < nw; ++w)
            rho = std::max(rho, std::abs(problem.d(w, m[t * nr + r1]) - problem.d(w, m[t * nr + r2])));
        }
    rep.rho = rho;
    rep.rho_rhs_n = 0.5 * static_cast<double>(n) * rho * rho;
    rep.rho_rhs_seed = 0.5 * static_cast<double>(det->seed_len) * rho * rho;
  }
  return rep;
}

MiChainReport mi_chain_diagnostics(const LearningProblem& problem, const Algorithm& algorithm, double d,
                                   std::size_t n_start, std::size_t n_cap, const SolverOptions& opts) {
  if (!problem.iid) throw Error(ErrorKind::capability, "scenario carries no i.i.d. sample law");
  MiChainReport rep;
  rep.d = d;
  for (std::size_t n : algorithm.sizes()) {
    if (n < n_start) continue;
    if (n > n_cap) break;
    Kernel iid;
    try {
      iid = iid_dataset_kernel(problem, n, opts.cap);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::enumeration_cap) break;
      throw;
    }
    const Kernel channel = compose(iid, algorithm.at(n));
    const Joint wh = joint(problem.w, channel);
    double ed = 0.0;
    for (std::size_t w = 0; w < problem.num_w(); ++w)
      for (std::size_t h = 0; h < problem.num_h(); ++h) ed += wh.at(w, h) * problem.d(w, h);
    if (ed > d) continue;
    rep.feasible = true;
    rep.n = n;
    rep.iid_distortion = ed;
    rep.i_w_h = mutual_information(wh);
    const Distribution pt = marginal(joint(problem.w, iid), 1);
    rep.i_t_h = mutual_information(joint(pt, algorithm.at(n)));
    rep.rate_bits = rate_distortion(problem, algorithm, n, d, opts).rate_bits;
    rep.holds = rep.rate_bits <= rep.i_w_h + 1e-9 && rep.i_w_h <= rep.i_t_h + 1e-9;
    return rep;
  }
  return rep;
}

}  // namespace lossylearn
