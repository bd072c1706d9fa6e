#include "lossylearn/info.hpp"

#include <cmath>
#include <limits>

#include "lossylearn/error.hpp"

namespace lossylearn {

namespace {

// Mutual information in nats of an a x b mass array (need not be normalized to 1).
double mi_nats(const double* m, std::size_t a, std::size_t b) {
  std::vector<double> ra(a, 0.0), rb(b, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t k = 0; k < b; ++k) {
      ra[i] += m[i * b + k];
      rb[k] += m[i * b + k];
      total += m[i * b + k];
    }
  if (total <= 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t k = 0; k < b; ++k) {
      const double v = m[i * b + k];
      if (v > 0.0) s += v * std::log(v * total / (ra[i] * rb[k]));
    }
  return std::max(0.0, s / total);
}

}  // namespace

double entropy_bits(const Distribution& p) {
  double h = 0.0;
  for (double v : p.probs())
    if (v > 0.0) h -= v * std::log2(v);
  return std::max(0.0, h);
}

Divergence kl_divergence(const Distribution& p, const Distribution& q) {
  if (p.labels() != q.labels()) throw Error(ErrorKind::dimension, "kl_divergence: label sets differ");
  Divergence out;
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) {
      out.support_violation = true;
      out.bits = std::numeric_limits<double>::infinity();
      return out;
    }
    s += p[i] * std::log(p[i] / q[i]);
  }
  out.bits = std::max(0.0, s / kLn2);
  return out;
}

double mutual_information(const Joint& j) {
  if (j.rank() != 2) throw Error(ErrorKind::dimension, "mutual_information needs a two-axis joint");
  return mi_nats(j.mass().data(), j.extent(0), j.extent(1)) / kLn2;
}

double conditional_mutual_information(const Joint& j, std::size_t cond_axis) {
  if (j.rank() != 3 || cond_axis > 2) {
    throw Error(ErrorKind::dimension, "conditional_mutual_information needs a three-axis joint");
  }
  std::size_t a_axis = cond_axis == 0 ? 1 : 0;
  std::size_t b_axis = cond_axis == 2 ? 1 : 2;
  const std::size_t na = j.extent(a_axis), nb = j.extent(b_axis), nc = j.extent(cond_axis);
  std::vector<double> slab(na * nb);
  double s = 0.0;
  for (std::size_t c = 0; c < nc; ++c) {
    double pc = 0.0;
    for (std::size_t x = 0; x < na; ++x)
      for (std::size_t y = 0; y < nb; ++y) {
        std::size_t idx[3];
        idx[cond_axis] = c;
        idx[a_axis] = x;
        idx[b_axis] = y;
        const double v = j.at(idx[0], idx[1], idx[2]);
        slab[x * nb + y] = v;
        pc += v;
      }
    if (pc > 0.0) s += pc * mi_nats(slab.data(), na, nb);
  }
  return std::max(0.0, s / kLn2);
}

double DensityTable::expectation_nats() const {
  double s = 0.0;
  auto m = joint.mass();
  for (std::size_t c = 0; c < m.size(); ++c)
    if (m[c] > 0.0) s += m[c] * values[c];
  return s;
}

DensityTable information_density(const Joint& j) {
  if (j.rank() != 2) throw Error(ErrorKind::dimension, "information_density needs a two-axis joint");
  const std::size_t a = j.extent(0), b = j.extent(1);
  std::vector<double> ra(a, 0.0), rb(b, 0.0);
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t k = 0; k < b; ++k) {
      ra[i] += j.at(i, k);
      rb[k] += j.at(i, k);
    }
  DensityTable t{j, std::vector<double>(a * b, -std::numeric_limits<double>::infinity())};
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t k = 0; k < b; ++k) {
      const double v = j.at(i, k);
      if (v > 0.0) t.values[i * b + k] = std::log(v / (ra[i] * rb[k]));
    }
  return t;
}

}  // namespace lossylearn
