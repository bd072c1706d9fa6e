#include "lossylearn/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "lossylearn/error.hpp"
#include "lossylearn/info.hpp"

namespace lossylearn {

std::string decimal(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::size_t checked_power(std::size_t base, std::size_t exp, std::size_t cap, const char* what) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && out > cap / base) {
      throw Error(ErrorKind::enumeration_cap, std::string(what) + ": " + std::to_string(base) + "^" +
                                                  std::to_string(exp) + " exceeds the cap of " +
                                                  std::to_string(cap));
    }
    out *= base;
  }
  if (out > cap) {
    throw Error(ErrorKind::enumeration_cap, std::string(what) + ": size " + std::to_string(out) +
                                                " exceeds the cap of " + std::to_string(cap));
  }
  return out;
}

double LearningProblem::max_distortion() const {
  double m = 0.0;
  for (double v : distortion) m = std::max(m, v);
  return m;
}

void LearningProblem::validate() const {
  if (w.size() == 0) throw Error(ErrorKind::dimension, "w: no worlds");
  for (const auto& l : w.labels())
    if (l.find(',') != std::string::npos) throw Error(ErrorKind::schema, "w: label '" + l + "' contains ','");
  if (samples.empty()) throw Error(ErrorKind::dimension, "samples: empty alphabet");
  {
    Labels sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw Error(ErrorKind::dimension, "samples: duplicate label");
  }
  for (const auto& l : samples)
    if (l.empty() || l.find(',') != std::string::npos)
      throw Error(ErrorKind::schema, "samples: label '" + l + "' is empty or contains ','");
  if (!(b_bits > 0.0) || !std::isfinite(b_bits)) throw Error(ErrorKind::domain, "samples.b_bits must be positive");
  if (b_bits < std::log2(static_cast<double>(samples.size())) - 1e-12) {
    throw Error(ErrorKind::domain, "samples.b_bits is below log2 of the alphabet size");
  }
  if (observable.size() != w.size()) throw Error(ErrorKind::dimension, "observable: one entry per world required");
  for (std::size_t i = 0; i < observable.size(); ++i) {
    if (observable[i].size() != samples.size()) throw Error(ErrorKind::dimension, "observable: wrong width");
    if (std::none_of(observable[i].begin(), observable[i].end(), [](bool b) { return b; })) {
      throw Error(ErrorKind::domain, "observable." + w.labels()[i] + ": empty");
    }
  }
  if (h.empty()) throw Error(ErrorKind::dimension, "h: no hypotheses");
  {
    Labels sorted = h;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw Error(ErrorKind::dimension, "h: duplicate label");
  }
  if (distortion.size() != w.size() * h.size()) throw Error(ErrorKind::dimension, "distortion: shape is not W x H");
  for (std::size_t i = 0; i < distortion.size(); ++i) {
    if (!std::isfinite(distortion[i]) || distortion[i] < 0.0) {
      throw Error(ErrorKind::domain, "distortion[" + std::to_string(i / h.size()) + "][" +
                                         std::to_string(i % h.size()) + "] must be finite and >= 0");
    }
  }
  if (iid) {
    if (iid->from() != w.labels() || iid->to() != samples) {
      throw Error(ErrorKind::dimension, "iid: kernel must map worlds to samples");
    }
    for (std::size_t i = 0; i < w.size(); ++i)
      for (std::size_t s = 0; s < samples.size(); ++s)
        if ((*iid)(i, s) > 0.0 && !observable[i][s]) {
          throw Error(ErrorKind::support, "iid." + w.labels()[i] + ": mass on unobservable sample '" +
                                              samples[s] + "'");
        }
  }
}

std::size_t DeterministicMap::seed_vectors() const {
  return checked_power(seed.size(), seed_len, kDefaultEnumerationCap, "seed vectors");
}

double DeterministicMap::seed_prob(std::size_t r) const {
  double p = 1.0;
  for (std::size_t i = 0; i < seed_len; ++i) p *= seed[seed_coord(r, i)];
  return p;
}

std::size_t DeterministicMap::seed_coord(std::size_t r, std::size_t i) const {
  std::size_t div = 1;
  for (std::size_t j = i + 1; j < seed_len; ++j) div *= seed.size();
  return (r / div) % seed.size();
}

Algorithm::Algorithm(std::map<std::size_t, Kernel> kernels) : kernels_(std::move(kernels)) {}

Algorithm::Algorithm(const LearningProblem& problem, DeterministicMap det) {
  const std::size_t R = det.seed_vectors();
  for (const auto& [n, table] : det.map) {
    DatasetUniverse u(problem, n);
    if (table.size() != u.size() * R) {
      throw Error(ErrorKind::dimension, "algorithm.deterministic.map." + std::to_string(n) + ": expected " +
                                            std::to_string(u.size()) + " rows of " + std::to_string(R));
    }
    std::vector<double> rows(u.size() * problem.num_h(), 0.0);
    for (std::size_t t = 0; t < u.size(); ++t)
      for (std::size_t r = 0; r < R; ++r) {
        const std::size_t hi = table[t * R + r];
        if (hi >= problem.num_h()) throw Error(ErrorKind::dimension, "deterministic map: hypothesis out of range");
        rows[t * problem.num_h() + hi] += det.seed_prob(r);
      }
    kernels_.emplace(n, Kernel(u.labels(), problem.h, std::move(rows)));
  }
  det_ = std::move(det);
}

const Kernel& Algorithm::at(std::size_t n) const {
  auto it = kernels_.find(n);
  if (it == kernels_.end()) {
    throw Error(ErrorKind::capability, "algorithm is not defined for datasets of size " + std::to_string(n));
  }
  return it->second;
}

std::vector<std::size_t> Algorithm::sizes() const {
  std::vector<std::size_t> out;
  for (const auto& [n, k] : kernels_) out.push_back(n);
  return out;
}

void validate_algorithm(const LearningProblem& problem, const Algorithm& algorithm) {
  if (algorithm.kernels().empty()) throw Error(ErrorKind::schema, "algorithm: no dataset sizes");
  for (const auto& [n, k] : algorithm.kernels()) {
    DatasetUniverse u(problem, n);
    if (k.rows() != u.size() || k.from() != u.labels()) {
      throw Error(ErrorKind::dimension, "algorithm." + std::to_string(n) + ": rows must enumerate the " +
                                            std::to_string(u.size()) + " datasets in lexicographic order");
    }
    if (k.to() != problem.h) throw Error(ErrorKind::dimension, "algorithm." + std::to_string(n) + ": columns must be h");
  }
}

DatasetUniverse::DatasetUniverse(const LearningProblem& problem, std::size_t n, std::size_t cap)
    : observable_(problem.observable),
      samples_(problem.samples),
      n_(n),
      sigma_(problem.samples.size()),
      size_(checked_power(problem.samples.size(), n, cap, "dataset universe")),
      b_(problem.b_bits) {
  pow_.assign(n + 1, 1);
  for (std::size_t i = n; i-- > 0;) pow_[i] = pow_[i + 1] * sigma_;
}

std::size_t DatasetUniverse::sample_at(std::size_t t, std::size_t i) const { return (t / pow_[i + 1]) % sigma_; }

std::vector<std::size_t> DatasetUniverse::tuple(std::size_t t) const {
  std::vector<std::size_t> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = sample_at(t, i);
  return out;
}

std::string DatasetUniverse::label(std::size_t t) const {
  std::string s;
  for (std::size_t i = 0; i < n_; ++i) {
    if (i) s += ',';
    s += samples_[sample_at(t, i)];
  }
  return s;
}

Labels DatasetUniverse::labels() const {
  Labels out;
  out.reserve(size_);
  for (std::size_t t = 0; t < size_; ++t) out.push_back(label(t));
  return out;
}

std::size_t DatasetUniverse::drop(std::size_t t, std::size_t i) const {
  std::size_t out = 0;
  for (std::size_t j = 0; j < n_; ++j)
    if (j != i) out = out * sigma_ + sample_at(t, j);
  return out;
}

bool DatasetUniverse::all_obtainable_from(const std::vector<bool>& allowed, std::size_t t) const {
  for (std::size_t i = 0; i < n_; ++i)
    if (!allowed[sample_at(t, i)]) return false;
  return true;
}

bool DatasetUniverse::obtainable(std::size_t w, std::size_t t) const { return all_obtainable_from(observable_[w], t); }

std::vector<bool> DatasetUniverse::obtainable_mask(std::size_t w) const {
  std::vector<bool> out(size_);
  for (std::size_t t = 0; t < size_; ++t) out[t] = obtainable(w, t);
  return out;
}

bool DatasetUniverse::obtainable_union(const std::vector<std::size_t>& ws, std::size_t t) const {
  std::vector<bool> allowed(sigma_, false);
  for (std::size_t w : ws)
    for (std::size_t s = 0; s < sigma_; ++s)
      if (observable_[w][s]) allowed[s] = true;
  return all_obtainable_from(allowed, t);
}

WorldTuples::WorldTuples(const Distribution& w, std::size_t k, std::size_t cap)
    : w_(w), k_(k), size_(checked_power(w.size(), k, cap, "world tuples")) {}

std::vector<std::size_t> WorldTuples::tuple(std::size_t idx) const {
  std::vector<std::size_t> out(k_);
  for (std::size_t i = k_; i-- > 0;) {
    out[i] = idx % w_.size();
    idx /= w_.size();
  }
  return out;
}

double WorldTuples::prob(std::size_t idx) const {
  double p = 1.0;
  for (std::size_t i = 0; i < k_; ++i) {
    p *= w_[idx % w_.size()];
    idx /= w_.size();
  }
  return p;
}

std::string WorldTuples::label(std::size_t idx) const {
  std::string s;
  auto t = tuple(idx);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) s += ',';
    s += w_.labels()[t[i]];
  }
  return s;
}

GridPartition grid_partition(const Distribution& base, const std::vector<std::string>& region_of) {
  if (region_of.size() != base.size()) throw Error(ErrorKind::dimension, "grid_partition: one region per point");
  Labels regions;
  std::vector<std::size_t> region_idx(base.size());
  for (std::size_t x = 0; x < base.size(); ++x) {
    auto it = std::find(regions.begin(), regions.end(), region_of[x]);
    region_idx[x] = static_cast<std::size_t>(it - regions.begin());
    if (it == regions.end()) regions.push_back(region_of[x]);
  }
  std::vector<double> pw(regions.size(), 0.0);
  for (std::size_t x = 0; x < base.size(); ++x) pw[region_idx[x]] += base[x];
  std::vector<double> rows(regions.size() * base.size(), 0.0);
  for (std::size_t r = 0; r < regions.size(); ++r) {
    if (!(pw[r] > 0.0)) throw Error(ErrorKind::degenerate, "grid_partition: region '" + regions[r] + "' has zero mass");
  }
  for (std::size_t x = 0; x < base.size(); ++x) {
    const std::size_t r = region_idx[x];
    rows[r * base.size() + x] = base[x] / pw[r];
  }
  return {Distribution(regions, std::move(pw)), Kernel(regions, base.labels(), std::move(rows))};
}

LearningProblem build_from_generative(const Distribution& p_w, const GenerativeSpec& spec, Labels h_labels) {
  const Kernel& px = spec.p_x_given_w;
  const Kernel& py = spec.p_y_given_x;
  if (px.from() != p_w.labels()) throw Error(ErrorKind::dimension, "generative.p_x_given_w: rows must be the worlds");
  if (py.from() != px.to()) throw Error(ErrorKind::dimension, "generative.p_y_given_x: rows must be the x labels");
  if (spec.hypotheses.size() != h_labels.size()) {
    throw Error(ErrorKind::dimension, "generative.hypotheses: one predictive per hypothesis");
  }
  for (std::size_t hi = 0; hi < h_labels.size(); ++hi) {
    if (spec.hypotheses[hi].from() != px.to() || spec.hypotheses[hi].to() != py.to()) {
      throw Error(ErrorKind::dimension, "generative.hypotheses." + h_labels[hi] + ": must map x to y");
    }
  }
  const std::size_t nx = px.cols(), ny = py.cols(), nw = p_w.size(), nh = h_labels.size();
  if (spec.mode == DistortionMode::loss) {
    if (spec.loss.size() != ny * ny) throw Error(ErrorKind::dimension, "generative.loss: must be Y x Y");
    for (double v : spec.loss)
      if (!std::isfinite(v) || v < 0.0) throw Error(ErrorKind::domain, "generative.loss: entries must be finite and >= 0");
  } else if (!spec.loss.empty()) {
    throw Error(ErrorKind::schema, "generative.loss: only allowed in loss mode");
  }

  LearningProblem p;
  p.w = p_w;
  p.h = std::move(h_labels);
  p.generative = spec;
  for (const auto& x : px.to())
    for (const auto& y : py.to()) p.samples.push_back(x + ":" + y);
  p.b_bits = std::log2(static_cast<double>(p.samples.size()));
  if (p.samples.size() == 1) p.b_bits = 0.0;
  p.observable.assign(nw, std::vector<bool>(nx * ny, false));
  std::vector<double> iid(nw * nx * ny, 0.0);
  for (std::size_t w = 0; w < nw; ++w)
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y) {
        const double m = px(w, x) * py(x, y);
        iid[w * nx * ny + x * ny + y] = m;
        p.observable[w][x * ny + y] = px(w, x) > 0.0 && py(x, y) > 0.0;
      }
  p.iid = Kernel(p_w.labels(), p.samples, std::move(iid));

  p.distortion.assign(nw * nh, 0.0);
  for (std::size_t w = 0; w < nw; ++w)
    for (std::size_t hi = 0; hi < nh; ++hi) {
      const Kernel& q = spec.hypotheses[hi];
      double acc = 0.0;
      for (std::size_t x = 0; x < nx; ++x) {
        if (px(w, x) <= 0.0) continue;
        double term = 0.0;
        if (spec.mode == DistortionMode::kl) {
          const Divergence kl = kl_divergence(py.row_distribution(x), q.row_distribution(x));
          if (kl.support_violation) {
            throw Error(ErrorKind::support, "generative.hypotheses." + p.h[hi] + ": zero probability where the truth at x='" +
                                                px.to()[x] + "' is positive (infinite distortion)");
          }
          term = kl.bits;
        } else {
          for (std::size_t y = 0; y < ny; ++y)
            for (std::size_t yh = 0; yh < ny; ++yh) term += py(x, y) * q(x, yh) * spec.loss[y * ny + yh];
        }
        acc += px(w, x) * term;
      }
      p.distortion[w * nh + hi] = acc;
    }
  if (p.b_bits <= 0.0) throw Error(ErrorKind::domain, "generative: a single-sample alphabet carries no bits");
  p.validate();
  return p;
}

Kernel iid_dataset_kernel(const LearningProblem& problem, std::size_t n, std::size_t cap) {
  if (!problem.iid) throw Error(ErrorKind::capability, "scenario has no i.i.d. sampling model");
  DatasetUniverse u(problem, n, cap);
  const Kernel& law = *problem.iid;
  std::vector<double> rows(problem.num_w() * u.size());
  for (std::size_t w = 0; w < problem.num_w(); ++w)
    for (std::size_t t = 0; t < u.size(); ++t) {
      double p = 1.0;
      for (std::size_t i = 0; i < n && p > 0.0; ++i) p *= law(w, u.sample_at(t, i));
      rows[w * u.size() + t] = p;
    }
  return Kernel(problem.w.labels(), u.labels(), std::move(rows));
}

Kernel iid_strategy(const LearningProblem& problem, std::size_t k, std::size_t cap) {
  if (!problem.iid) throw Error(ErrorKind::capability, "scenario has no i.i.d. sampling model");
  DatasetUniverse u(problem, k, cap);
  WorldTuples wt(problem.w, k, cap);
  if (wt.size() > cap / u.size()) {
    throw Error(ErrorKind::enumeration_cap, "i.i.d. strategy: |W|^k x |T_k| exceeds the cap of " + std::to_string(cap));
  }
  const Kernel& law = *problem.iid;
  Labels from;
  std::vector<double> rows(wt.size() * u.size());
  for (std::size_t a = 0; a < wt.size(); ++a) {
    from.push_back(wt.label(a));
    const auto ws = wt.tuple(a);
    for (std::size_t t = 0; t < u.size(); ++t) {
      double p = 1.0;
      for (std::size_t i = 0; i < k && p > 0.0; ++i) p *= law(ws[i], u.sample_at(t, i));
      rows[a * u.size() + t] = p;
    }
  }
  return Kernel(std::move(from), u.labels(), std::move(rows));
}

Kernel majority_vote_kernel(const LearningProblem& problem, std::size_t n, const std::vector<std::size_t>& vote_of,
                            std::size_t tie_h) {
  DatasetUniverse u(problem, n);
  const std::size_t nh = problem.num_h();
  if (vote_of.size() != problem.num_samples() || tie_h >= nh) {
    throw Error(ErrorKind::dimension, "majority vote: need one vote per sample and a valid tie hypothesis");
  }
  std::vector<double> rows(u.size() * nh, 0.0);
  std::vector<std::size_t> count(nh);
  for (std::size_t t = 0; t < u.size(); ++t) {
    std::fill(count.begin(), count.end(), 0);
    for (std::size_t i = 0; i < n; ++i) ++count[vote_of[u.sample_at(t, i)]];
    const std::size_t best = *std::max_element(count.begin(), count.end());
    std::size_t winner = tie_h;
    if (n > 0 && std::count(count.begin(), count.end(), best) == 1) {
      winner = static_cast<std::size_t>(std::find(count.begin(), count.end(), best) - count.begin());
    }
    rows[t * nh + winner] = 1.0;
  }
  return Kernel(u.labels(), problem.h, std::move(rows));
}

namespace {

Scenario binary_builtin(std::vector<double> pw) {
  LearningProblem p;
  p.w = Distribution({"w0", "w1"}, std::move(pw));
  p.samples = {"s0", "s1"};
  p.b_bits = 1.0;
  p.observable = {{true, true}, {true, true}};
  p.h = {"h0", "h1"};
  p.distortion = {0.0, 1.0, 1.0, 0.0};
  p.iid = Kernel({"w0", "w1"}, p.samples, {1.0, 0.0, 0.0, 1.0});
  p.validate();
  std::map<std::size_t, Kernel> ks;
  for (std::size_t n = 0; n <= 6; ++n) ks.emplace(n, majority_vote_kernel(p, n, {0, 1}, 0));
  Scenario s{std::move(p), Algorithm(std::move(ks))};
  validate_algorithm(s.problem, s.algorithm);
  return s;
}

}  // namespace

Scenario builtin_sym2() { return binary_builtin({0.5, 0.5}); }
Scenario builtin_skew2() { return binary_builtin({0.8, 0.2}); }

Scenario builtin_scenario(const std::string& name) {
  if (name == "sym2" || name == "SYM2") return builtin_sym2();
  if (name == "skew2" || name == "SKEW2") return builtin_skew2();
  throw Error(ErrorKind::domain, "unknown built-in scenario '" + name + "' (known: sym2, skew2)");
}

}  // namespace lossylearn
