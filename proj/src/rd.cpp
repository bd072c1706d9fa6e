#include "lossylearn/rd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Dense>

#include "lossylearn/error.hpp"
#include "lossylearn/info.hpp"
#include "lp.hpp"

namespace lossylearn {

const char* to_string(RDRegime r) {
  switch (r) {
    case RDRegime::interior: return "interior";
    case RDRegime::at_d_min: return "at_d_min";
    case RDRegime::rate_zero: return "rate_zero";
    case RDRegime::constraint_inactive: return "constraint_inactive";
  }
  return "unknown";
}

namespace {

constexpr double kFloor = 1e-250;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Datasets whose algorithm rows coincide are interchangeable for the program, so
// the search runs over distinct rows ("atoms") per world.
struct Reduced {
  std::size_t nw = 0, nh = 0;
  std::vector<double> pw;
  std::vector<std::vector<double>> rows;           // atom -> P(h | atom)
  std::vector<std::vector<std::size_t>> atoms;     // w -> available atom ids
  std::vector<std::vector<double>> e;              // w -> expected distortion per available atom
  std::vector<std::vector<std::size_t>> count;     // w -> obtainable datasets per available atom
  std::vector<std::size_t> atom_of;                // dataset -> atom
  std::vector<std::vector<bool>> obtainable;       // w -> dataset
  Labels tuple_labels;
};

Reduced reduce(const LearningProblem& p, const Algorithm& alg, std::size_t n, std::size_t cap) {
  const Kernel& a = alg.at(n);
  DatasetUniverse u(p, n, cap);
  Reduced r;
  r.nw = p.num_w();
  r.nh = p.num_h();
  r.pw.assign(p.w.probs().begin(), p.w.probs().end());
  r.tuple_labels = a.from();
  std::map<std::vector<double>, std::size_t> ids;
  r.atom_of.resize(u.size());
  for (std::size_t t = 0; t < u.size(); ++t) {
    std::vector<double> row(a.row(t).begin(), a.row(t).end());
    auto [it, fresh] = ids.emplace(row, r.rows.size());
    if (fresh) r.rows.push_back(std::move(row));
    r.atom_of[t] = it->second;
  }
  r.atoms.resize(r.nw);
  r.e.resize(r.nw);
  r.count.resize(r.nw);
  r.obtainable.resize(r.nw);
  for (std::size_t w = 0; w < r.nw; ++w) {
    r.obtainable[w] = u.obtainable_mask(w);
    std::vector<std::size_t> local(r.rows.size(), SIZE_MAX);
    for (std::size_t t = 0; t < u.size(); ++t) {
      if (!r.obtainable[w][t]) continue;
      const std::size_t id = r.atom_of[t];
      if (local[id] == SIZE_MAX) {
        local[id] = r.atoms[w].size();
        r.atoms[w].push_back(id);
        r.count[w].push_back(0);
        double e = 0.0;
        for (std::size_t h = 0; h < r.nh; ++h) e += r.rows[id][h] * p.d(w, h);
        r.e[w].push_back(e);
      }
      ++r.count[w][local[id]];
    }
    if (r.atoms[w].empty()) throw Error(ErrorKind::domain, "world '" + p.w.labels()[w] + "' has no obtainable dataset");
  }
  return r;
}

using Q = std::vector<std::vector<double>>;

Q start_point(const Reduced& r) {
  Q q(r.nw);
  for (std::size_t w = 0; w < r.nw; ++w) {
    double total = 0.0;
    for (std::size_t c : r.count[w]) total += static_cast<double>(c);
    for (std::size_t c : r.count[w]) q[w].push_back(static_cast<double>(c) / total);
  }
  return q;
}

struct Eval {
  double info = 0.0;  // nats
  double dist = 0.0;
  Q g;                // per-world gradient divided by P(w)
  double gap = 0.0;   // Frank-Wolfe gap, nats
  double gscale = 0.0;
  std::vector<std::vector<double>> m;  // P(h | w)
};

Eval evaluate(const Reduced& r, const Q& q, double lambda, bool grad) {
  Eval ev;
  ev.m.assign(r.nw, std::vector<double>(r.nh, 0.0));
  std::vector<double> ph(r.nh, 0.0);
  for (std::size_t w = 0; w < r.nw; ++w) {
    for (std::size_t i = 0; i < r.atoms[w].size(); ++i) {
      const double qi = q[w][i];
      if (qi == 0.0) continue;
      const auto& row = r.rows[r.atoms[w][i]];
      for (std::size_t h = 0; h < r.nh; ++h) ev.m[w][h] += qi * row[h];
      ev.dist += r.pw[w] * qi * r.e[w][i];
    }
    for (std::size_t h = 0; h < r.nh; ++h) ph[h] += r.pw[w] * ev.m[w][h];
  }
  std::vector<std::vector<double>> logratio(r.nw, std::vector<double>(r.nh, -700.0));
  for (std::size_t w = 0; w < r.nw; ++w)
    for (std::size_t h = 0; h < r.nh; ++h) {
      const double m = ev.m[w][h];
      if (m > 0.0 && ph[h] > 0.0) {
        logratio[w][h] = std::log(m / ph[h]);
        ev.info += r.pw[w] * m * logratio[w][h];
      } else if (ph[h] == 0.0 && r.pw[w] > 0.0) {
        logratio[w][h] = -std::log(r.pw[w]);  // one-sided derivative when no world reaches h yet
      }
    }
  ev.info = std::max(0.0, ev.info);
  if (!grad) return ev;
  ev.g.resize(r.nw);
  for (std::size_t w = 0; w < r.nw; ++w) {
    ev.g[w].resize(r.atoms[w].size());
    double gmin = kInf;
    for (std::size_t i = 0; i < r.atoms[w].size(); ++i) {
      const auto& row = r.rows[r.atoms[w][i]];
      double s = lambda * r.e[w][i];
      for (std::size_t h = 0; h < r.nh; ++h)
        if (row[h] > 0.0) s += row[h] * logratio[w][h];
      ev.g[w][i] = s;
      gmin = std::min(gmin, s);
    }
    if (r.pw[w] == 0.0) continue;
    for (std::size_t i = 0; i < r.atoms[w].size(); ++i) {
      ev.gap += r.pw[w] * q[w][i] * (ev.g[w][i] - gmin);
      if (q[w][i] > 1e-12) ev.gscale = std::max(ev.gscale, std::abs(ev.g[w][i]));
    }
  }
  return ev;
}

struct Inner {
  Q q;
  Eval ev;
  double lambda = 0.0;
  std::size_t iterations = 0;
  double eta = 1.0;
};

// Entropic mirror descent on F = I + lambda E[d]. Armijo backtracking while F
// still resolves progress; after that F is flat to rounding and a fixed step is
// driven by the Frank-Wolfe gap alone.
void mirror_step(const Reduced& r, const Q& q, const Eval& ev, double eta, Q& next, double* lin, double* breg) {
  *lin = 0.0;
  *breg = 0.0;
  for (std::size_t w = 0; w < r.nw; ++w) {
    if (r.pw[w] == 0.0) {
      next[w] = q[w];
      continue;
    }
    const double gmin = *std::min_element(ev.g[w].begin(), ev.g[w].end());
    double z = 0.0;
    for (std::size_t i = 0; i < q[w].size(); ++i) {
      next[w][i] = std::max(kFloor, q[w][i] * std::exp(-eta * (ev.g[w][i] - gmin)));
      z += next[w][i];
    }
    for (std::size_t i = 0; i < q[w].size(); ++i) {
      next[w][i] /= z;
      *lin += r.pw[w] * ev.g[w][i] * (next[w][i] - q[w][i]);
      if (next[w][i] > 0.0) *breg += r.pw[w] * next[w][i] * std::log(next[w][i] / q[w][i]);
    }
  }
}

// Newton steps on the current support with the per-world simplex constraints
// eliminated. Atoms below `kSupport` stay fixed; mirror steps move them.
constexpr double kSupport = 1e-11;

bool newton_polish(const Reduced& r, double lambda, Q& q, Eval& ev, std::size_t* iterations) {
  bool progressed = false;
  for (int step = 0; step < 30; ++step) {
    std::vector<std::pair<std::size_t, std::size_t>> vars;  // (w, atom slot)
    std::vector<std::size_t> first(r.nw + 1, 0);
    for (std::size_t w = 0; w < r.nw; ++w) {
      first[w] = vars.size();
      if (r.pw[w] == 0.0) continue;
      for (std::size_t i = 0; i < q[w].size(); ++i)
        if (q[w][i] > kSupport) vars.emplace_back(w, i);
    }
    first[r.nw] = vars.size();
    const std::size_t nv = vars.size();
    if (nv == 0) return progressed;

    std::vector<double> ph(r.nh, 0.0);
    for (std::size_t w = 0; w < r.nw; ++w)
      for (std::size_t h = 0; h < r.nh; ++h) ph[h] += r.pw[w] * ev.m[w][h];
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nv), static_cast<Eigen::Index>(nv));
    Eigen::VectorXd grad(static_cast<Eigen::Index>(nv));
    for (std::size_t a = 0; a < nv; ++a) {
      const auto [wa, ia] = vars[a];
      const auto& ra = r.rows[r.atoms[wa][ia]];
      grad(static_cast<Eigen::Index>(a)) = r.pw[wa] * ev.g[wa][ia];
      for (std::size_t b = a; b < nv; ++b) {
        const auto [wb, ib] = vars[b];
        const auto& rb = r.rows[r.atoms[wb][ib]];
        double v = 0.0;
        for (std::size_t h = 0; h < r.nh; ++h) {
          const double aa = ra[h] * rb[h];
          if (aa == 0.0 || ph[h] <= 0.0) continue;
          if (wa == wb && ev.m[wa][h] > 0.0) v += aa * r.pw[wa] / ev.m[wa][h];
          v -= aa * r.pw[wa] * r.pw[wb] / ph[h];
        }
        hess(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
        hess(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
      }
    }
    // Null-space basis of the constraints sum_i delta_wi = 0: e_i - e_last per world.
    std::size_t nz = 0;
    for (std::size_t w = 0; w < r.nw; ++w)
      if (first[w + 1] > first[w]) nz += first[w + 1] - first[w] - 1;
    if (nz == 0) return progressed;
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nv), static_cast<Eigen::Index>(nz));
    for (std::size_t w = 0, c = 0; w < r.nw; ++w) {
      if (first[w + 1] <= first[w]) continue;
      const std::size_t last = first[w + 1] - 1;
      for (std::size_t a = first[w]; a < last; ++a, ++c) {
        z(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) = 1.0;
        z(static_cast<Eigen::Index>(last), static_cast<Eigen::Index>(c)) = -1.0;
      }
    }
    const Eigen::MatrixXd zhz = z.transpose() * hess * z;
    const Eigen::VectorXd zg = z.transpose() * grad;
    const Eigen::VectorXd y = zhz.completeOrthogonalDecomposition().solve(-zg);
    const Eigen::VectorXd delta = z * y;
    if (!delta.allFinite()) return progressed;
    const double slope = grad.dot(delta);
    if (!(slope < 0.0)) return progressed;

    double alpha = 1.0;
    std::size_t blocking = SIZE_MAX;
    for (std::size_t a = 0; a < nv; ++a) {
      const double dv = delta(static_cast<Eigen::Index>(a));
      const double qv = q[vars[a].first][vars[a].second];
      if (dv < 0.0 && -qv / dv < alpha) {
        alpha = -qv / dv;
        blocking = a;
      }
    }
    const double f = ev.info + lambda * ev.dist;
    bool accepted = false;
    for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
      Q next = q;
      for (std::size_t a = 0; a < nv; ++a) {
        double& v = next[vars[a].first][vars[a].second];
        v = std::max(0.0, v + alpha * delta(static_cast<Eigen::Index>(a)));
      }
      if (blocking != SIZE_MAX && attempt == 0) next[vars[blocking].first][vars[blocking].second] = 0.0;
      for (std::size_t w = 0; w < r.nw; ++w) {
        if (first[w + 1] <= first[w]) continue;
        double zsum = 0.0;
        for (double v : next[w]) zsum += v;
        for (double& v : next[w]) v /= zsum;
      }
      Eval cand = evaluate(r, next, lambda, true);
      const double fc = cand.info + lambda * cand.dist;
      const bool flat = std::abs(fc - f) <= 1e-13 * (1.0 + std::abs(f));
      if (fc <= f + 1e-4 * alpha * slope || (flat && cand.gap < ev.gap)) {
        q = std::move(next);
        ev = std::move(cand);
        accepted = true;
      } else {
        alpha *= 0.5;
        blocking = SIZE_MAX;
      }
    }
    ++*iterations;
    if (!accepted) return progressed;
    progressed = true;
  }
  return progressed;
}

Q mix(const Q& a, const Q& b, double theta);

// Frank-Wolfe step toward each world's best atom, with backtracking. Revives
// atoms that multiplicative steps cannot reach in reasonable time.
bool vertex_step(const Reduced& r, double lambda, Q& q, Eval& ev) {
  if (!(ev.gap > 0.0)) return false;
  Q target = q;
  for (std::size_t w = 0; w < r.nw; ++w) {
    if (r.pw[w] == 0.0) continue;
    const auto best = static_cast<std::size_t>(std::min_element(ev.g[w].begin(), ev.g[w].end()) - ev.g[w].begin());
    std::fill(target[w].begin(), target[w].end(), 0.0);
    target[w][best] = 1.0;
  }
  const double f = ev.info + lambda * ev.dist;
  for (double t = 1.0; t > 1e-12; t *= 0.5) {
    Q next = mix(q, target, t);
    Eval cand = evaluate(r, next, lambda, true);
    if (cand.info + lambda * cand.dist <= f - 1e-4 * t * ev.gap) {
      q = std::move(next);
      ev = std::move(cand);
      return true;
    }
  }
  return false;
}

Inner minimize(const Reduced& r, double lambda, Q q, double eta, const SolverOptions& opts) {
  Inner out;
  out.lambda = lambda;
  Eval ev = evaluate(r, q, lambda, true);
  Q next(r.nw);
  for (std::size_t w = 0; w < r.nw; ++w) next[w].resize(q[w].size());
  auto converged = [&](const Eval& e) { return e.gap <= opts.gap_tolerance * std::max(1.0, e.gscale); };

  bool flat = false;
  double last_eta = eta;
  for (; out.iterations < opts.max_inner_iterations && !flat; ++out.iterations) {
    if (converged(ev)) break;
    const double f = ev.info + lambda * ev.dist;
    bool accepted = false;
    for (int attempt = 0; attempt < 60 && !accepted; ++attempt) {
      double lin, breg;
      mirror_step(r, q, ev, eta, next, &lin, &breg);
      Eval cand = evaluate(r, next, lambda, true);
      const double fc = cand.info + lambda * cand.dist;
      if (fc <= f + lin + std::max(0.0, breg) / eta) {
        accepted = true;
        if (f - fc <= 1e-13 * (1.0 + std::abs(f))) flat = true;
        std::swap(q, next);
        ev = std::move(cand);
        last_eta = eta;
        eta = std::min(eta * 2.0, 1e30);
      } else {
        eta *= 0.5;
      }
    }
    if (!accepted) flat = true;
  }

  // Newton rounds on the support, separated by short mirror runs that shrink
  // or revive atoms off the support.
  if (flat && !converged(ev)) {
    double step = last_eta;
    for (int round = 0; round < 100 && !converged(ev); ++round) {
      const double before = ev.gap;
      Q saved = q;
      Eval saved_ev = ev;
      vertex_step(r, lambda, q, ev);
      newton_polish(r, lambda, q, ev, &out.iterations);
      if (converged(ev)) break;
      for (std::size_t w = 0; w < r.nw; ++w) {
        if (r.pw[w] == 0.0) continue;
        double z = 0.0;
        for (double& v : q[w]) z += (v = std::max(v, 1e-14));
        for (double& v : q[w]) v /= z;
      }
      ev = evaluate(r, q, lambda, true);
      for (int i = 0; i < 20 && !converged(ev); ++i, ++out.iterations) {
        double lin, breg;
        mirror_step(r, q, ev, step, next, &lin, &breg);
        Eval cand = evaluate(r, next, lambda, true);
        if (cand.gap > 4.0 * ev.gap) {
          step *= 0.5;
          continue;
        }
        std::swap(q, next);
        ev = std::move(cand);
      }
      const double f_before = saved_ev.info + lambda * saved_ev.dist, f_after = ev.info + lambda * ev.dist;
      const bool lower = f_after < f_before - 1e-15 * (1.0 + std::abs(f_before));
      if (!lower && ev.gap > before) {
        q = std::move(saved);
        ev = std::move(saved_ev);
      }
      if (!lower && ev.gap > 0.9 * before) break;
    }
  }

  if (flat && !converged(ev)) {
    double step = last_eta * 0.5;
    Q best = q;
    Eval best_ev = ev;
    std::size_t since_best = 0;
    for (; out.iterations < opts.max_inner_iterations; ++out.iterations) {
      if (converged(ev)) break;
      double lin, breg;
      mirror_step(r, q, ev, step, next, &lin, &breg);
      Eval cand = evaluate(r, next, lambda, true);
      if (cand.gap > 4.0 * ev.gap) {
        step *= 0.5;
        q = best;
        ev = best_ev;
        if (step < 1e-8) break;
        continue;
      }
      std::swap(q, next);
      ev = std::move(cand);
      if (ev.gap < 0.5 * best_ev.gap) {
        best = q;
        best_ev = ev;
        since_best = 0;
      } else if (++since_best > 200) {
        break;
      }
    }
    if (best_ev.gap < ev.gap) {
      q = std::move(best);
      ev = std::move(best_ev);
    }
    eta = step;
  }
  out.q = std::move(q);
  out.ev = std::move(ev);
  out.eta = eta;
  return out;
}

void prune(const Reduced& r, Q& q) {
  for (std::size_t w = 0; w < r.nw; ++w) {
    double z = 0.0;
    for (double& v : q[w]) {
      if (v < 1e-20) v = 0.0;
      z += v;
    }
    for (double& v : q[w]) v /= z;
  }
}

Q mix(const Q& a, const Q& b, double theta) {
  Q out = a;
  for (std::size_t w = 0; w < a.size(); ++w)
    for (std::size_t i = 0; i < a[w].size(); ++i) out[w][i] = (1.0 - theta) * a[w][i] + theta * b[w][i];
  return out;
}

double d_min_reduced(const Reduced& r) {
  double s = 0.0;
  for (std::size_t w = 0; w < r.nw; ++w) s += r.pw[w] * *std::min_element(r.e[w].begin(), r.e[w].end());
  return s;
}

struct LpEndpoint {
  double d_max = kInf;
  Q q;  // rate-zero kernel attaining d_max
};

LpEndpoint d_max_reduced(const Reduced& r) {
  std::vector<std::size_t> live;
  for (std::size_t w = 0; w < r.nw; ++w)
    if (r.pw[w] > 0.0) live.push_back(w);
  std::vector<std::size_t> offset(r.nw, 0);
  std::size_t nvar = 0;
  for (std::size_t w : live) {
    offset[w] = nvar;
    nvar += r.atoms[w].size();
  }
  std::vector<double> a, b, c(nvar, 0.0);
  auto add_row = [&](double rhs) {
    a.resize(a.size() + nvar, 0.0);
    b.push_back(rhs);
    return a.size() - nvar;
  };
  for (std::size_t w : live) {
    const std::size_t row = add_row(1.0);
    for (std::size_t i = 0; i < r.atoms[w].size(); ++i) {
      a[row + offset[w] + i] = 1.0;
      c[offset[w] + i] = r.pw[w] * r.e[w][i];
    }
  }
  const std::size_t w0 = live.front();
  for (std::size_t k = 1; k < live.size(); ++k) {
    const std::size_t w = live[k];
    for (std::size_t h = 0; h < r.nh; ++h) {
      const std::size_t row = add_row(0.0);
      for (std::size_t i = 0; i < r.atoms[w].size(); ++i) a[row + offset[w] + i] = r.rows[r.atoms[w][i]][h];
      for (std::size_t i = 0; i < r.atoms[w0].size(); ++i) a[row + offset[w0] + i] -= r.rows[r.atoms[w0][i]][h];
    }
  }
  auto res = detail::solve_standard_lp(a, b, c);
  LpEndpoint out;
  if (res.status != detail::LpStatus::optimal) return out;
  out.d_max = res.objective;
  out.q = start_point(r);
  for (std::size_t w : live) {
    double z = 0.0;
    for (std::size_t i = 0; i < r.atoms[w].size(); ++i) z += res.x[offset[w] + i];
    for (std::size_t i = 0; i < r.atoms[w].size(); ++i) out.q[w][i] = res.x[offset[w] + i] / z;
  }
  return out;
}

double spread_of(const Reduced& r) {
  double lo = kInf, hi = -kInf;
  for (std::size_t w = 0; w < r.nw; ++w)
    for (double e : r.e[w]) {
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
  return hi - lo;
}

RDSolution assemble(const LearningProblem& p, const Reduced& r, std::size_t n, double d, const Q& q) {
  RDSolution s;
  s.n = n;
  s.d = d;
  const std::size_t nt = r.atom_of.size();
  std::vector<double> rows(r.nw * nt, 0.0);
  std::vector<bool> mask(r.nw * nt, false);
  for (std::size_t w = 0; w < r.nw; ++w) {
    std::vector<std::size_t> local(r.rows.size(), SIZE_MAX);
    for (std::size_t i = 0; i < r.atoms[w].size(); ++i) local[r.atoms[w][i]] = i;
    for (std::size_t t = 0; t < nt; ++t) {
      if (!r.obtainable[w][t]) continue;
      mask[w * nt + t] = true;
      const std::size_t i = local[r.atom_of[t]];
      if (i != SIZE_MAX) rows[w * nt + t] = q[w][i] / static_cast<double>(r.count[w][i]);
    }
  }
  s.kernel = Kernel(p.w.labels(), r.tuple_labels, std::move(rows), std::move(mask));
  Eval ev = evaluate(r, q, 0.0, false);
  std::vector<double> m;
  for (const auto& row : ev.m) m.insert(m.end(), row.begin(), row.end());
  s.channel = Kernel(p.w.labels(), p.h, std::move(m));
  s.induced_joint = joint(p.w, s.channel);
  s.rate_bits = mutual_information(s.induced_joint);
  double ed = 0.0;
  for (std::size_t w = 0; w < r.nw; ++w)
    for (std::size_t h = 0; h < r.nh; ++h) ed += s.induced_joint.at(w, h) * p.d(w, h);
  s.achieved_distortion = ed;
  return s;
}

void check_d(double d) {
  if (!std::isfinite(d)) throw Error(ErrorKind::domain, "target distortion must be finite");
}

}  // namespace

double d_min(const LearningProblem& problem, const Algorithm& algorithm, std::size_t n, std::size_t cap) {
  return d_min_reduced(reduce(problem, algorithm, n, cap));
}

Endpoints rd_endpoints(const LearningProblem& problem, const Algorithm& algorithm, std::size_t n, std::size_t cap) {
  Reduced r = reduce(problem, algorithm, n, cap);
  Endpoints ep;
  ep.d_min = d_min_reduced(r);
  LpEndpoint lp = d_max_reduced(r);
  ep.d_max = std::max(lp.d_max, ep.d_min);
  ep.d_max_infinite = !std::isfinite(lp.d_max);
  return ep;
}

RDSolution rate_distortion(const LearningProblem& problem, const Algorithm& algorithm, std::size_t n, double d,
                           const SolverOptions& opts) {
  check_d(d);
  Reduced r = reduce(problem, algorithm, n, opts.cap);
  Endpoints ep;
  ep.d_min = d_min_reduced(r);
  LpEndpoint lp = d_max_reduced(r);
  ep.d_max = std::max(lp.d_max, ep.d_min);
  ep.d_max_infinite = !std::isfinite(lp.d_max);

  const double tol = 1e-12;
  if (d < ep.d_min - tol) {
    throw Error(ErrorKind::domain, "d = " + decimal(d) + " is below d_min = " + decimal(ep.d_min) + " for n = " +
                                       std::to_string(n));
  }

  if (!ep.d_max_infinite && d >= ep.d_max - tol) {
    RDSolution s = assemble(problem, r, n, d, lp.q);
    s.regime = RDRegime::rate_zero;
    s.flagged = true;
    s.flag_reason = "d >= d_max: rate zero, expected distortion " + decimal(s.achieved_distortion) + " <= d";
    s.lambda_star = 0.0;
    s.endpoints = ep;
    return s;
  }

  if (d <= ep.d_min + tol) {
    // Only minimum-distortion datasets remain; minimize the rate among them.
    Reduced rr = r;
    for (std::size_t w = 0; w < r.nw; ++w) {
      const double lo = *std::min_element(r.e[w].begin(), r.e[w].end());
      std::vector<std::size_t> atoms, count;
      std::vector<double> e;
      for (std::size_t i = 0; i < r.atoms[w].size(); ++i)
        if (r.e[w][i] <= lo + tol * (1.0 + std::abs(lo))) {
          atoms.push_back(r.atoms[w][i]);
          count.push_back(r.count[w][i]);
          e.push_back(r.e[w][i]);
        }
      rr.atoms[w] = atoms;
      rr.count[w] = count;
      rr.e[w] = e;
    }
    Inner in = minimize(rr, 0.0, start_point(rr), 1.0, opts);
    prune(rr, in.q);
    RDSolution s = assemble(problem, rr, n, d, in.q);
    s.regime = RDRegime::at_d_min;
    s.flagged = true;
    s.flag_reason = "d = d_min: the multiplier is unbounded";
    s.lambda_star = kInf;
    s.endpoints = ep;
    s.meta.iterations = in.iterations;
    s.meta.lambda_evaluations = 1;
    s.meta.gradient_gap = in.ev.gap;
    return s;
  }

  const double spread = std::max(spread_of(r), 1e-300);
  const Q q0 = start_point(r);
  SolverMeta meta;
  double eta = 1.0;
  auto solve_at = [&](double lambda, const Q& warm) {
    Q init = mix(warm, q0, 1e-6);
    Inner in = minimize(r, lambda, std::move(init), eta, opts);
    eta = std::max(1.0, in.eta * 1e-3);
    meta.iterations += in.iterations;
    ++meta.lambda_evaluations;
    return in;
  };

  Inner lo, hi;
  Inner cur = solve_at(1.0 / spread, q0);
  if (cur.ev.dist > d) {
    lo = std::move(cur);
    for (;;) {
      const double lam = lo.lambda * 4.0;
      if (lam > 1e15 / spread) throw Error(ErrorKind::solver, "multiplier search diverged above 1e15");
      Inner next = solve_at(lam, lo.q);
      if (next.ev.dist <= d) {
        hi = std::move(next);
        break;
      }
      lo = std::move(next);
    }
  } else {
    hi = std::move(cur);
    for (;;) {
      const double lam = hi.lambda / 4.0;
      Inner next = solve_at(lam, hi.q);
      if (next.ev.dist > d) {
        lo = std::move(next);
        break;
      }
      hi = std::move(next);
      if (lam < 1e-12 / spread) {
        RDSolution s = assemble(problem, r, n, d, hi.q);
        s.regime = RDRegime::constraint_inactive;
        s.flagged = true;
        s.flag_reason = "the rate minimizer already satisfies E[d] <= d; multiplier is zero";
        s.lambda_star = 0.0;
        s.endpoints = ep;
        meta.gradient_gap = hi.ev.gap;
        s.meta = meta;
        return s;
      }
    }
  }

  for (std::size_t step = 0; step < opts.max_bisection_steps; ++step) {
    if (hi.lambda - lo.lambda <= 1e-13 * hi.lambda) break;
    if (lo.ev.dist - hi.ev.dist <= 1e-15) break;
    const double lam = hi.lambda > 2.0 * lo.lambda ? std::sqrt(lo.lambda * hi.lambda) : 0.5 * (lo.lambda + hi.lambda);
    Inner next = solve_at(lam, (lo.ev.dist - d < d - hi.ev.dist) ? lo.q : hi.q);
    if (next.ev.dist > d) lo = std::move(next);
    else hi = std::move(next);
  }

  // Lower bound on R(d) from weak duality at both multipliers.
  double lower = -kInf;
  for (const Inner* in : {&lo, &hi}) {
    lower = std::max(lower, in->ev.info + in->lambda * in->ev.dist - in->ev.gap - in->lambda * d);
  }

  Q qlo = lo.q, qhi = hi.q;
  prune(r, qlo);
  prune(r, qhi);
  const double dlo = evaluate(r, qlo, 0.0, false).dist, dhi = evaluate(r, qhi, 0.0, false).dist;
  double theta = dlo > dhi ? (dlo - d) / (dlo - dhi) : 1.0;
  theta = std::clamp(theta, 0.0, 1.0);
  Q q = mix(qlo, qhi, theta);

  RDSolution s = assemble(problem, r, n, d, q);
  s.endpoints = ep;
  s.regime = RDRegime::interior;
  s.lambda_star = 0.5 * (lo.lambda + hi.lambda) / kLn2;
  meta.gradient_gap = std::max(lo.ev.gap, hi.ev.gap);
  meta.lambda_lo_bits = lo.lambda / kLn2;
  meta.lambda_hi_bits = hi.lambda / kLn2;
  meta.duality_gap_bits = std::max(0.0, s.rate_bits - lower / kLn2);
  s.meta = meta;
  if (meta.duality_gap_bits > opts.duality_gap_limit_bits) {
    throw Error(ErrorKind::solver, "duality gap " + decimal(meta.duality_gap_bits) + " bits at d = " + decimal(d) +
                                       " after " + std::to_string(meta.iterations) + " iterations and " +
                                       std::to_string(meta.lambda_evaluations) + " multipliers");
  }
  return s;
}

LambdaReport lambda_star(const LearningProblem& problem, const Algorithm& algorithm, std::size_t n, double d,
                         const SolverOptions& opts) {
  RDSolution s = rate_distortion(problem, algorithm, n, d, opts);
  if (s.regime != RDRegime::interior) {
    throw Error(ErrorKind::domain, std::string("lambda_star needs d_min < d < d_max (regime ") + to_string(s.regime) + ")");
  }
  LambdaReport rep;
  rep.dual_bits = s.lambda_star;
  const Endpoints& ep = s.endpoints;
  const double upper = ep.d_max_infinite ? problem.max_distortion() : ep.d_max;
  const double h = std::max(1e-4, 1e-3 * (upper - ep.d_min));
  rep.step = h;
  const bool can_lo = d - h > ep.d_min, can_hi = ep.d_max_infinite || d + h < ep.d_max;
  auto rate = [&](double x) { return rate_distortion(problem, algorithm, n, x, opts).rate_bits; };
  if (can_lo && can_hi) {
    rep.finite_difference_bits = -(rate(d + h) - rate(d - h)) / (2.0 * h);
  } else if (can_hi) {
    rep.one_sided = true;
    rep.finite_difference_bits = -(rate(d + h) - s.rate_bits) / h;
  } else if (can_lo) {
    rep.one_sided = true;
    rep.finite_difference_bits = -(s.rate_bits - rate(d - h)) / h;
  } else {
    rep.one_sided = true;
    rep.finite_difference_bits = rep.dual_bits;
  }
  const double scale = std::max(std::abs(rep.dual_bits), std::abs(rep.finite_difference_bits));
  rep.agree = std::abs(rep.dual_bits - rep.finite_difference_bits) <= 0.02 * scale + 1e-9;
  return rep;
}

double distortion_rate(const LearningProblem& problem, const Algorithm& algorithm, std::size_t n, double rate_bits,
                       const SolverOptions& opts) {
  if (!std::isfinite(rate_bits) || rate_bits <= 0.0) throw Error(ErrorKind::domain, "rate must be positive");
  Endpoints ep = rd_endpoints(problem, algorithm, n, opts.cap);
  const double r_top = rate_distortion(problem, algorithm, n, ep.d_min, opts).rate_bits;
  if (rate_bits >= r_top) {
    throw Error(ErrorKind::domain, "rate " + decimal(rate_bits) + " is not below R(d_min) = " + decimal(r_top));
  }
  double lo = ep.d_min, hi = ep.d_max;
  if (ep.d_max_infinite) {
    hi = problem.max_distortion();
    const RDSolution s = rate_distortion(problem, algorithm, n, hi, opts);
    if (rate_bits <= s.rate_bits) {
      throw Error(ErrorKind::domain, "rate " + decimal(rate_bits) + " is below the least attainable rate " +
                                         decimal(s.rate_bits));
    }
  }
  double x = 0.5 * (lo + hi);
  double best_err = kInf, best_x = x;
  for (int it = 0; it < 200; ++it) {
    const RDSolution s = rate_distortion(problem, algorithm, n, x, opts);
    const double err = s.rate_bits - rate_bits;
    if (std::abs(err) < best_err) {
      best_err = std::abs(err);
      best_x = x;
    }
    if (std::abs(err) <= 1e-10 || hi - lo <= 1e-14) break;
    if (err > 0.0) lo = x;
    else hi = x;
    double next = 0.5 * (lo + hi);
    if (s.regime == RDRegime::interior && s.lambda_star > 0.0) {
      const double newton = x + err / s.lambda_star;
      if (newton > lo && newton < hi) next = newton;
    }
    x = next;
  }
  if (best_err > 1e-6) {
    throw Error(ErrorKind::solver, "distortion-rate inversion stalled at |R(d) - R| = " + decimal(best_err));
  }
  return best_x;
}

RDCurve rd_curve(const LearningProblem& problem, const Algorithm& algorithm, std::size_t n,
                 const std::vector<double>& grid, const SolverOptions& opts) {
  RDCurve c;
  c.endpoints = rd_endpoints(problem, algorithm, n, opts.cap);
  std::vector<double> ds = grid;
  std::sort(ds.begin(), ds.end());
  for (double d : ds) c.points.push_back(rate_distortion(problem, algorithm, n, d, opts));
  return c;
}

std::size_t default_rate_n(const LearningProblem& problem, const Algorithm& algorithm, double d, std::size_t cap) {
  std::size_t fallback = SIZE_MAX;
  for (std::size_t n : algorithm.sizes()) {
    if (n == 0) continue;
    std::size_t size = 0;
    try {
      size = checked_power(problem.num_samples(), n, cap, "dataset universe");
    } catch (const Error&) {
      break;
    }
    (void)size;
    if (fallback == SIZE_MAX) fallback = n;
    if (d_min(problem, algorithm, n, cap) < d) return n;
  }
  if (fallback == SIZE_MAX) {
    throw Error(ErrorKind::capability, "algorithm defines no non-empty dataset size within the enumeration cap");
  }
  return fallback;
}

}  // namespace lossylearn
