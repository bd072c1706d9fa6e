#pragma once

#include <vector>

#include "lossylearn/prob.hpp"

namespace lossylearn {

inline constexpr double kLn2 = 0.69314718055994530942;

double entropy_bits(const Distribution& p);

struct Divergence {
  double bits = 0.0;               // +inf when p is not absolutely continuous w.r.t. q
  bool support_violation = false;
};

Divergence kl_divergence(const Distribution& p, const Distribution& q);

/// I(axis0; axis1) of a two-axis joint, in bits.
double mutual_information(const Joint& j);

/// I(A;B|C) of a three-axis joint where C is `cond_axis` and A, B are the other
/// two axes in increasing order. Bits.
double conditional_mutual_information(const Joint& j, std::size_t cond_axis);

/// ln(P(a,b) / P(a)P(b)) in nats; -inf on zero-mass cells.
struct DensityTable {
  Joint joint;
  std::vector<double> values;  // row-major, same shape as joint
  double at(std::size_t i, std::size_t k) const { return values[i * joint.extent(1) + k]; }
  double expectation_nats() const;
};

DensityTable information_density(const Joint& j);

}  // namespace lossylearn
