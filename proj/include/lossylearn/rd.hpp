#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lossylearn/prob.hpp"
#include "lossylearn/scenario.hpp"

namespace lossylearn {

enum class RDRegime {
  interior,             // d_min < d < d_max, E[d] = d with a positive multiplier
  at_d_min,             // d = d_min, multiplier unbounded
  rate_zero,            // d >= d_max
  constraint_inactive,  // the rate minimizer already meets E[d] <= d (only when d_max is infinite)
};

const char* to_string(RDRegime r);

struct SolverOptions {
  double gap_tolerance = 1e-14;      // Frank-Wolfe gap per inner solve, nats
  std::size_t max_inner_iterations = 200000;
  std::size_t max_bisection_steps = 200;
  double duality_gap_limit_bits = 1e-7;
  std::size_t cap = kDefaultEnumerationCap;
};

struct SolverMeta {
  std::size_t iterations = 0;         // inner mirror-descent steps summed over all multipliers tried
  std::size_t lambda_evaluations = 0;
  double gradient_gap = 0.0;          // Frank-Wolfe gap at the returned multiplier(s), nats
  double duality_gap_bits = 0.0;
  double lambda_lo_bits = 0.0;        // final bracket on the multiplier
  double lambda_hi_bits = 0.0;
  double entropy_regularizer = 0.0;
  std::string tie_break = "uniform split over datasets with identical algorithm rows; uniform start";
};

struct Endpoints {
  double d_min = 0.0;
  double d_max = 0.0;
  bool d_max_infinite = false;
};

struct RDSolution {
  std::size_t n = 0;
  double d = 0.0;
  double rate_bits = 0.0;
  double lambda_star = 0.0;  // bits per distortion unit; +inf at d_min
  Kernel kernel;             // optimal sampling kernel W -> T_n
  Kernel channel;            // induced P_{H|W}
  Joint induced_joint;       // W x H
  double achieved_distortion = 0.0;
  RDRegime regime = RDRegime::interior;
  bool flagged = false;
  std::string flag_reason;
  Endpoints endpoints;
  SolverMeta meta;
};

double d_min(const LearningProblem& problem, const Algorithm& algorithm, std::size_t n,
             std::size_t cap = kDefaultEnumerationCap);

/// d_max is the least expected distortion among rate-zero kernels; infinite
/// (and flagged) when no rate-zero kernel exists.
Endpoints rd_endpoints(const LearningProblem& problem, const Algorithm& algorithm, std::size_t n,
                       std::size_t cap = kDefaultEnumerationCap);

RDSolution rate_distortion(const LearningProblem& problem, const Algorithm& algorithm, std::size_t n, double d,
                           const SolverOptions& opts = {});

struct LambdaReport {
  double dual_bits = 0.0;
  double finite_difference_bits = 0.0;
  double step = 0.0;
  bool one_sided = false;
  bool agree = true;  // within 2% relative
};

LambdaReport lambda_star(const LearningProblem& problem, const Algorithm& algorithm, std::size_t n, double d,
                         const SolverOptions& opts = {});

/// Inverse of the rate-distortion curve; domain error outside (0, R(d_min)).
double distortion_rate(const LearningProblem& problem, const Algorithm& algorithm, std::size_t n, double rate_bits,
                       const SolverOptions& opts = {});

struct RDCurve {
  std::vector<RDSolution> points;
  Endpoints endpoints;
};

RDCurve rd_curve(const LearningProblem& problem, const Algorithm& algorithm, std::size_t n,
                 const std::vector<double>& grid, const SolverOptions& opts = {});

/// Smallest dataset size the algorithm defines with d_min(n) < d, or the
/// smallest defined size if none qualifies.
std::size_t default_rate_n(const LearningProblem& problem, const Algorithm& algorithm, double d,
                           std::size_t cap = kDefaultEnumerationCap);

}  // namespace lossylearn
