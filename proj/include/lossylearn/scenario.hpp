#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lossylearn/prob.hpp"

namespace lossylearn {

inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

enum class DistortionMode { kl, loss };

/// Data-generating model from which a distortion matrix is derived.
struct GenerativeSpec {
  Kernel p_x_given_w;              // W -> X
  Kernel p_y_given_x;              // X -> Y
  std::vector<Kernel> hypotheses;  // one predictive X -> Y per hypothesis
  DistortionMode mode = DistortionMode::kl;
  std::vector<double> loss;        // Y x Y, loss(y_true, y_pred); only in loss mode

  bool operator==(const GenerativeSpec&) const = default;
};

struct LearningProblem {
  Distribution w;
  Labels samples;
  double b_bits = 1.0;
  bool b_explicit = false;                    // b was given rather than defaulted to log2|samples|
  std::vector<std::vector<bool>> observable;  // [w][sample]
  Labels h;
  std::vector<double> distortion;             // W x H row-major
  std::optional<Kernel> iid;                  // per-world single-sample law, W -> samples
  std::optional<GenerativeSpec> generative;

  std::size_t num_w() const { return w.size(); }
  std::size_t num_h() const { return h.size(); }
  std::size_t num_samples() const { return samples.size(); }
  double d(std::size_t wi, std::size_t hi) const { return distortion[wi * h.size() + hi]; }
  double max_distortion() const;

  /// Throws on any broken invariant.
  void validate() const;

  bool operator==(const LearningProblem&) const = default;
};

/// Seeded deterministic form of a learner: h = map(t, r) with r drawn from
/// seed^seed_len (coordinates i.i.d., enumerated lexicographically).
struct DeterministicMap {
  Distribution seed;
  std::size_t seed_len = 1;
  std::map<std::size_t, std::vector<std::size_t>> map;  // n -> [t * |seed|^seed_len + r] -> h index

  std::size_t seed_vectors() const;
  double seed_prob(std::size_t r) const;
  std::size_t seed_coord(std::size_t r, std::size_t i) const;

  bool operator==(const DeterministicMap&) const = default;
};

class Algorithm {
 public:
  Algorithm() = default;
  explicit Algorithm(std::map<std::size_t, Kernel> kernels);
  /// Builds the kernels by marginalizing the seed.
  Algorithm(const LearningProblem& problem, DeterministicMap det);

  bool has(std::size_t n) const { return kernels_.count(n) != 0; }
  const Kernel& at(std::size_t n) const;
  const std::map<std::size_t, Kernel>& kernels() const { return kernels_; }
  const std::optional<DeterministicMap>& deterministic() const { return det_; }
  std::vector<std::size_t> sizes() const;

  bool operator==(const Algorithm&) const = default;

 private:
  std::map<std::size_t, Kernel> kernels_;
  std::optional<DeterministicMap> det_;
};

struct Scenario {
  LearningProblem problem;
  Algorithm algorithm;

  bool operator==(const Scenario&) const = default;
};

/// All ordered n-tuples over the sample alphabet, lexicographic with the first
/// coordinate most significant. Tuple labels join sample labels with ','.
class DatasetUniverse {
 public:
  DatasetUniverse(const LearningProblem& problem, std::size_t n, std::size_t cap = kDefaultEnumerationCap);

  std::size_t n() const { return n_; }
  std::size_t size() const { return size_; }
  std::size_t alphabet() const { return sigma_; }
  double bits() const { return b_ * static_cast<double>(n_); }
  std::size_t sample_at(std::size_t t, std::size_t i) const;
  std::vector<std::size_t> tuple(std::size_t t) const;
  std::string label(std::size_t t) const;
  Labels labels() const;
  /// Index in the (n-1)-universe of t with coordinate i removed.
  std::size_t drop(std::size_t t, std::size_t i) const;

  bool obtainable(std::size_t w, std::size_t t) const;
  std::vector<bool> obtainable_mask(std::size_t w) const;
  /// Union rule: every sample observable from at least one world in `ws`.
  bool obtainable_union(const std::vector<std::size_t>& ws, std::size_t t) const;
  bool all_obtainable_from(const std::vector<bool>& allowed_samples, std::size_t t) const;

 private:
  std::vector<std::vector<bool>> observable_;
  Labels samples_;
  std::size_t n_, sigma_, size_;
  double b_;
  std::vector<std::size_t> pow_;
};

/// Product enumeration of W^k with lexicographic order and product probabilities.
class WorldTuples {
 public:
  WorldTuples(const Distribution& w, std::size_t k, std::size_t cap = kDefaultEnumerationCap);
  std::size_t size() const { return size_; }
  std::size_t k() const { return k_; }
  std::vector<std::size_t> tuple(std::size_t idx) const;
  double prob(std::size_t idx) const;
  std::string label(std::size_t idx) const;

 private:
  Distribution w_;
  std::size_t k_, size_;
};

/// Checked |base|^exp; throws enumeration_cap when the result exceeds cap.
std::size_t checked_power(std::size_t base, std::size_t exp, std::size_t cap, const char* what);

struct GridPartition {
  Distribution p_w;
  Kernel p_x_given_w;
};

/// Regions are labelled by `region_of[x]` and ordered by first appearance.
GridPartition grid_partition(const Distribution& base_p_x, const std::vector<std::string>& region_of);

/// Derives distortion, sample alphabet X x Y ("x:y" labels), observability and
/// the per-world sample law. KL distortions are in bits.
LearningProblem build_from_generative(const Distribution& p_w, const GenerativeSpec& spec, Labels h_labels);

/// Checks every kernel against the dataset universe and hypothesis set.
void validate_algorithm(const LearningProblem& problem, const Algorithm& algorithm);

/// Law of n i.i.d. samples drawn from one world: W -> T_n.
Kernel iid_dataset_kernel(const LearningProblem& problem, std::size_t n, std::size_t cap = kDefaultEnumerationCap);

/// i.i.d. sampling strategy W^k -> T_k: one sample from each queried world.
Kernel iid_strategy(const LearningProblem& problem, std::size_t k, std::size_t cap = kDefaultEnumerationCap);

/// Majority vote over sample labels mapped to hypothesis indices by `vote_of`
/// (sample -> h); ties and the empty dataset go to `tie_h`. Kernel over T_n -> H.
Kernel majority_vote_kernel(const LearningProblem& problem, std::size_t n, const std::vector<std::size_t>& vote_of,
                            std::size_t tie_h);

Scenario builtin_sym2();
Scenario builtin_skew2();
/// Throws domain error for an unknown name.
Scenario builtin_scenario(const std::string& name);

/// Canonical JSON text.
std::string save_scenario(const Scenario& s);
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
void write_scenario(const Scenario& s, const std::string& path);

/// Shortest decimal string that parses back to exactly v.
std::string decimal(double v);

}  // namespace lossylearn
