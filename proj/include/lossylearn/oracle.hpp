#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lossylearn/bounds.hpp"
#include "lossylearn/rd.hpp"
#include "lossylearn/scenario.hpp"

namespace lossylearn {

/// Per-tuple tolerance on the k-fold average distortion when testing "> d".
inline constexpr double kExcessTolerance = 1e-12;

struct ExcessResult {
  std::size_t k = 0, n = 0;
  double d = 0.0;
  double value = 0.0;                 // probability
  std::vector<std::size_t> argmin;    // per world tuple: chosen dataset index (lexicographic ties)
};

/// Least excess-distortion probability over all strategies W^k -> T_n.
ExcessResult optimal_excess_probability(const LearningProblem& problem, const Algorithm& algorithm, std::size_t k,
                                        std::size_t n, double d, std::size_t cap = kDefaultEnumerationCap);

/// Excess-distortion probability of a given strategy (rows indexed like WorldTuples).
double excess_for_strategy(const LearningProblem& problem, const Algorithm& algorithm, const Kernel& strategy,
                           std::size_t k, std::size_t n, double d, std::size_t cap = kDefaultEnumerationCap);

/// Deterministic strategy picking `choice[w^k]` as a kernel W^k -> T_n.
Kernel strategy_kernel(const LearningProblem& problem, std::size_t k, std::size_t n,
                       const std::vector<std::size_t>& choice, std::size_t cap = kDefaultEnumerationCap);

double min_expected_distortion(const LearningProblem& problem, const Algorithm& algorithm, std::size_t k,
                               std::size_t n, std::size_t cap = kDefaultEnumerationCap);

struct OracleReport {
  std::size_t k = 0;
  double d = 0.0, epsilon = 0.0;
  std::size_t n_max = 0;
  std::optional<std::size_t> n_star;
  std::optional<ExcessResult> at_n_star;
  std::optional<ExcessResult> below_n_star;  // witness at n* - 1 when the algorithm defines it
  std::vector<std::pair<std::size_t, double>> scan;  // (n, optimal excess)
  std::string method = "exhaustive";
  std::string note;
};

/// Scans the sizes the algorithm defines up to n_max.
OracleReport min_sample_size(const LearningProblem& problem, const Algorithm& algorithm, std::size_t k, double d,
                             double epsilon, std::size_t n_max, std::size_t cap = kDefaultEnumerationCap);

struct MonteCarloEstimate {
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::size_t hits = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // normal approximation, clipped to [0, 1]
};

MonteCarloEstimate monte_carlo_excess(const LearningProblem& problem, const Algorithm& algorithm,
                                      const Kernel& strategy, std::size_t k, std::size_t n, double d,
                                      std::size_t trials, std::uint64_t seed);

enum class VerifyStatus { pass, fail, skipped_vacuous, skipped_infeasible, skipped_domain };

const char* to_string(VerifyStatus s);

struct GridPoint {
  std::size_t k = 1;
  double d = 0.0;
  double epsilon = 0.0;
};

struct VerifyPoint {
  GridPoint at;
  VerifyStatus status = VerifyStatus::skipped_domain;
  std::string reason;
  std::size_t rate_n = 0;
  std::optional<std::size_t> n_star;
  std::optional<double> bound_bits;
  std::optional<double> oracle_bits;  // b n* / k
  std::optional<double> margin_bits;
  // Cross-check against the epsilon bound at n* - 1.
  bool eps_checked = false;
  double eps_oracle = 0.0;
  double eps_bound_raw = 0.0;
  bool eps_ok = true;
};

struct VerifyReport {
  std::vector<VerifyPoint> points;
  std::size_t passes = 0, failures = 0, vacuous = 0, infeasible = 0, domain = 0;
  std::size_t eps_checks = 0, eps_failures = 0;
  bool ok() const { return failures == 0 && eps_failures == 0; }
};

VerifyReport verify_converse(const LearningProblem& problem, const Algorithm& algorithm,
                             const std::vector<GridPoint>& grid, std::size_t n_max, const SolverOptions& opts = {},
                             const EpsilonOptions& eps_opts = {});

}  // namespace lossylearn
