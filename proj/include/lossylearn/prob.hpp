#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lossylearn {

using Labels = std::vector<std::string>;

/// Absolute tolerance for normalization of every distribution, kernel row and joint.
inline constexpr double kProbTolerance = 1e-12;

/// Clamps entries in [-tol, 0) to zero and renormalizes a sum within tol of one.
/// Anything worse throws a stochasticity error mentioning `what`.
void normalize_weights(std::span<double> weights, const std::string& what);

class Distribution {
 public:
  Distribution() = default;
  Distribution(Labels labels, std::vector<double> probs);

  static Distribution uniform(Labels labels);
  static Distribution point_mass(Labels labels, std::size_t index);

  const Labels& labels() const { return labels_; }
  std::span<const double> probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::size_t index_of(std::string_view label) const;

  bool operator==(const Distribution&) const = default;

 private:
  Labels labels_;
  std::vector<double> probs_;
};

/// Row-stochastic matrix from `from` labels to `to` labels, stored row-major.
class Kernel {
 public:
  Kernel() = default;
  Kernel(Labels from, Labels to, std::vector<double> rows);
  Kernel(Labels from, Labels to, std::vector<double> rows, std::vector<bool> support_mask);

  static Kernel identity(Labels labels);
  static Kernel constant(Labels from, const Distribution& row);

  const Labels& from() const { return from_; }
  const Labels& to() const { return to_; }
  std::size_t rows() const { return from_.size(); }
  std::size_t cols() const { return to_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * to_.size() + j]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * to_.size(), to_.size());
  }
  Distribution row_distribution(std::size_t i) const;
  std::span<const double> data() const { return data_; }
  const std::optional<std::vector<bool>>& support_mask() const { return mask_; }

  bool operator==(const Kernel&) const = default;

 private:
  void validate();

  Labels from_;
  Labels to_;
  std::vector<double> data_;
  std::optional<std::vector<bool>> mask_;
};

/// Joint probability tensor over two or three labelled axes, row-major.
class Joint {
 public:
  Joint() = default;
  Joint(std::vector<Labels> axes, std::vector<double> mass);

  std::size_t rank() const { return axes_.size(); }
  const Labels& axis(std::size_t a) const { return axes_.at(a); }
  std::size_t extent(std::size_t a) const { return axes_.at(a).size(); }
  std::span<const double> mass() const { return mass_; }
  double at(std::size_t i, std::size_t j) const { return mass_[i * axes_[1].size() + j]; }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return mass_[(i * axes_[1].size() + j) * axes_[2].size() + k];
  }

  bool operator==(const Joint&) const = default;

 private:
  std::vector<Labels> axes_;
  std::vector<double> mass_;
};

/// Matrix product of two kernels; `first.to()` must equal `second.from()`.
Kernel compose(const Kernel& first, const Kernel& second);

Joint joint(const Distribution& source, const Kernel& channel);

/// Three-axis joint of the Markov chain source -> first -> second.
Joint chain(const Distribution& source, const Kernel& first, const Kernel& second);

Distribution marginal(const Joint& j, std::size_t axis);

/// Two-axis marginal of a three-axis joint keeping axes `a` and `b` (in that order).
Joint marginal_pair(const Joint& j, std::size_t a, std::size_t b);

struct Conditional {
  Kernel kernel;
  Distribution given;                    // marginal of the retained rows, renormalized
  std::vector<std::size_t> kept_rows;    // indices into the given axis
  std::vector<std::size_t> dropped_rows; // zero-mass rows of the given axis
};

/// Conditions a joint on one axis. For three-axis joints the remaining two axes
/// are flattened row-major into labels "a|b".
Conditional condition(const Joint& j, std::size_t given_axis);

}  // namespace lossylearn
