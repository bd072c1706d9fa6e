#include "lossylearn/prob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "lossylearn/error.hpp"

namespace lossylearn {

namespace {

void check_unique(const Labels& labels, const char* what) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(labels.size());
  for (const auto& l : labels) {
    if (!seen.insert(l).second) {
      throw Error(ErrorKind::dimension, std::string(what) + ": duplicate label '" + l + "'");
    }
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void normalize_weights(std::span<double> weights, const std::string& what) {
  double sum = 0.0;
  for (double& w : weights) {
    if (!std::isfinite(w)) throw Error(ErrorKind::stochasticity, what + ": non-finite entry");
    if (w < 0.0) {
      if (w < -kProbTolerance) {
        throw Error(ErrorKind::stochasticity, what + ": negative entry " + fmt(w));
      }
      w = 0.0;
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > kProbTolerance) {
    throw Error(ErrorKind::stochasticity, what + ": sums to " + fmt(sum));
  }
  // Rounding-level drift is left alone so that renormalization is idempotent.
  const double eps = 4.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(weights.size() + 1);
  if (std::abs(sum - 1.0) > eps)
    for (double& w : weights) w /= sum;
}

Distribution::Distribution(Labels labels, std::vector<double> probs)
    : labels_(std::move(labels)), probs_(std::move(probs)) {
  if (labels_.size() != probs_.size()) {
    throw Error(ErrorKind::dimension, "distribution has " + std::to_string(labels_.size()) +
                                          " labels but " + std::to_string(probs_.size()) + " weights");
  }
  if (labels_.empty()) throw Error(ErrorKind::dimension, "distribution over an empty label set");
  check_unique(labels_, "distribution");
  normalize_weights(probs_, "distribution");
}

Distribution Distribution::uniform(Labels labels) {
  std::vector<double> p(labels.size(), labels.empty() ? 0.0 : 1.0 / static_cast<double>(labels.size()));
  return Distribution(std::move(labels), std::move(p));
}

Distribution Distribution::point_mass(Labels labels, std::size_t index) {
  std::vector<double> p(labels.size(), 0.0);
  p.at(index) = 1.0;
  return Distribution(std::move(labels), std::move(p));
}

std::size_t Distribution::index_of(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw Error(ErrorKind::dimension, "unknown label '" + std::string(label) + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

Kernel::Kernel(Labels from, Labels to, std::vector<double> rows)
    : from_(std::move(from)), to_(std::move(to)), data_(std::move(rows)) {
  validate();
}

Kernel::Kernel(Labels from, Labels to, std::vector<double> rows, std::vector<bool> support_mask)
    : from_(std::move(from)), to_(std::move(to)), data_(std::move(rows)), mask_(std::move(support_mask)) {
  validate();
}

void Kernel::validate() {
  if (from_.empty() || to_.empty()) throw Error(ErrorKind::dimension, "kernel with an empty label set");
  if (data_.size() != from_.size() * to_.size()) {
    throw Error(ErrorKind::dimension, "kernel is " + std::to_string(from_.size()) + "x" +
                                          std::to_string(to_.size()) + " but has " +
                                          std::to_string(data_.size()) + " entries");
  }
  check_unique(from_, "kernel rows");
  check_unique(to_, "kernel columns");
  if (mask_) {
    if (mask_->size() != data_.size()) throw Error(ErrorKind::dimension, "support mask shape mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) {
      if ((*mask_)[k]) continue;
      if (std::abs(data_[k]) > kProbTolerance) {
        throw Error(ErrorKind::support, "row " + std::to_string(k / to_.size()) + " puts mass " +
                                            fmt(data_[k]) + " on structural zero '" +
                                            to_[k % to_.size()] + "'");
      }
      data_[k] = 0.0;
    }
  }
  for (std::size_t i = 0; i < from_.size(); ++i) {
    normalize_weights(std::span<double>(data_).subspan(i * to_.size(), to_.size()),
                      "row " + std::to_string(i) + " ('" + from_[i] + "')");
  }
}

Kernel Kernel::identity(Labels labels) {
  const std::size_t n = labels.size();
  std::vector<double> rows(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) rows[i * n + i] = 1.0;
  Labels to = labels;
  return Kernel(std::move(labels), std::move(to), std::move(rows));
}

Kernel Kernel::constant(Labels from, const Distribution& row) {
  std::vector<double> rows;
  rows.reserve(from.size() * row.size());
  for (std::size_t i = 0; i < from.size(); ++i) rows.insert(rows.end(), row.probs().begin(), row.probs().end());
  return Kernel(std::move(from), row.labels(), std::move(rows));
}

Distribution Kernel::row_distribution(std::size_t i) const {
  auto r = row(i);
  return Distribution(to_, std::vector<double>(r.begin(), r.end()));
}

Joint::Joint(std::vector<Labels> axes, std::vector<double> mass) : axes_(std::move(axes)), mass_(std::move(mass)) {
  if (axes_.size() < 2 || axes_.size() > 3) throw Error(ErrorKind::dimension, "joint must have 2 or 3 axes");
  std::size_t cells = 1;
  for (const auto& a : axes_) {
    if (a.empty()) throw Error(ErrorKind::dimension, "joint axis with no labels");
    check_unique(a, "joint axis");
    cells *= a.size();
  }
  if (cells != mass_.size()) throw Error(ErrorKind::dimension, "joint mass tensor has the wrong size");
  normalize_weights(mass_, "joint");
}

Kernel compose(const Kernel& first, const Kernel& second) {
  if (first.to() != second.from()) {
    throw Error(ErrorKind::dimension, "compose: first kernel's outputs do not match second kernel's inputs");
  }
  const std::size_t rows = first.rows(), mid = first.cols(), cols = second.cols();
  std::vector<double> out(rows * cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    double* dst = out.data() + i * cols;
    for (std::size_t m = 0; m < mid; ++m) {
      const double a = first(i, m);
      if (a == 0.0) continue;
      auto r = second.row(m);
      for (std::size_t j = 0; j < cols; ++j) dst[j] += a * r[j];
    }
  }
  return Kernel(first.from(), second.to(), std::move(out));
}

Joint joint(const Distribution& source, const Kernel& channel) {
  if (source.labels() != channel.from()) {
    throw Error(ErrorKind::dimension, "joint: source labels do not match channel inputs");
  }
  std::vector<double> mass(channel.data().begin(), channel.data().end());
  const std::size_t cols = channel.cols();
  for (std::size_t i = 0; i < source.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) mass[i * cols + j] *= source[i];
  }
  return Joint({source.labels(), channel.to()}, std::move(mass));
}

Joint chain(const Distribution& source, const Kernel& first, const Kernel& second) {
  if (source.labels() != first.from() || first.to() != second.from()) {
    throw Error(ErrorKind::dimension, "chain: label mismatch between stages");
  }
  const std::size_t a = source.size(), b = first.cols(), c = second.cols();
  std::vector<double> mass(a * b * c, 0.0);
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      const double pij = source[i] * first(i, j);
      if (pij == 0.0) continue;
      for (std::size_t k = 0; k < c; ++k) mass[(i * b + j) * c + k] = pij * second(j, k);
    }
  }
  return Joint({source.labels(), first.to(), second.to()}, std::move(mass));
}

Distribution marginal(const Joint& j, std::size_t axis) {
  if (axis >= j.rank()) throw Error(ErrorKind::domain, "marginal: axis out of range");
  std::vector<double> out(j.extent(axis), 0.0);
  if (j.rank() == 2) {
    for (std::size_t a = 0; a < j.extent(0); ++a)
      for (std::size_t b = 0; b < j.extent(1); ++b) out[axis == 0 ? a : b] += j.at(a, b);
  } else {
    for (std::size_t a = 0; a < j.extent(0); ++a)
      for (std::size_t b = 0; b < j.extent(1); ++b)
        for (std::size_t c = 0; c < j.extent(2); ++c) {
          const std::size_t idx[3] = {a, b, c};
          out[idx[axis]] += j.at(a, b, c);
        }
  }
  return Distribution(j.axis(axis), std::move(out));
}

Joint marginal_pair(const Joint& j, std::size_t a, std::size_t b) {
  if (j.rank() != 3 || a >= 3 || b >= 3 || a == b) {
    throw Error(ErrorKind::domain, "marginal_pair needs a three-axis joint and two distinct axes");
  }
  const std::size_t na = j.extent(a), nb = j.extent(b);
  std::vector<double> out(na * nb, 0.0);
  for (std::size_t x = 0; x < j.extent(0); ++x)
    for (std::size_t y = 0; y < j.extent(1); ++y)
      for (std::size_t z = 0; z < j.extent(2); ++z) {
        const std::size_t idx[3] = {x, y, z};
        out[idx[a] * nb + idx[b]] += j.at(x, y, z);
      }
  return Joint({j.axis(a), j.axis(b)}, std::move(out));
}

Conditional condition(const Joint& j, std::size_t given_axis) {
  if (given_axis >= j.rank()) throw Error(ErrorKind::domain, "condition: axis out of range");
  // Move the given axis to the front and flatten the rest.
  std::vector<std::size_t> rest;
  for (std::size_t a = 0; a < j.rank(); ++a)
    if (a != given_axis) rest.push_back(a);

  Labels out_labels;
  if (rest.size() == 1) {
    out_labels = j.axis(rest[0]);
  } else {
    for (const auto& x : j.axis(rest[0]))
      for (const auto& y : j.axis(rest[1])) out_labels.push_back(x + "|" + y);
  }
  const std::size_t g = j.extent(given_axis), cols = out_labels.size();
  std::vector<double> slab(g * cols, 0.0);
  if (j.rank() == 2) {
    for (std::size_t a = 0; a < j.extent(0); ++a)
      for (std::size_t b = 0; b < j.extent(1); ++b) {
        if (given_axis == 0) slab[a * cols + b] = j.at(a, b);
        else slab[b * cols + a] = j.at(a, b);
      }
  } else {
    const std::size_t n1 = j.extent(rest[1]);
    for (std::size_t x = 0; x < j.extent(0); ++x)
      for (std::size_t y = 0; y < j.extent(1); ++y)
        for (std::size_t z = 0; z < j.extent(2); ++z) {
          const std::size_t idx[3] = {x, y, z};
          slab[idx[given_axis] * cols + idx[rest[0]] * n1 + idx[rest[1]]] = j.at(x, y, z);
        }
  }

  Conditional out;
  Labels kept_labels;
  std::vector<double> rows, given;
  for (std::size_t i = 0; i < g; ++i) {
    const double m = std::accumulate(slab.begin() + i * cols, slab.begin() + (i + 1) * cols, 0.0);
    if (m <= 0.0) {
      out.dropped_rows.push_back(i);
      continue;
    }
    out.kept_rows.push_back(i);
    kept_labels.push_back(j.axis(given_axis)[i]);
    given.push_back(m);
    for (std::size_t c = 0; c < cols; ++c) rows.push_back(slab[i * cols + c] / m);
  }
  if (out.kept_rows.empty()) throw Error(ErrorKind::degenerate, "condition: every row has zero mass");
  const double total = std::accumulate(given.begin(), given.end(), 0.0);
  for (double& v : given) v /= total;
  out.given = Distribution(kept_labels, std::move(given));
  out.kernel = Kernel(std::move(kept_labels), std::move(out_labels), std::move(rows));
  return out;
}

}  // namespace lossylearn
