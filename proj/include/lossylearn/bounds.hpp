#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "lossylearn/dispersion.hpp"
#include "lossylearn/rd.hpp"
#include "lossylearn/scenario.hpp"

namespace lossylearn {

double gaussian_Q(double x);
/// Domain error outside (0, 1).
double gaussian_Q_inv(double p);

enum class BoundKind { epsilon_converse, rate_explicit, rate_asymptotic, distortion_asymptotic };

const char* to_string(BoundKind k);

struct BoundReport {
  BoundKind kind = BoundKind::rate_explicit;
  std::size_t k = 1;
  std::optional<double> d, rate_bits, epsilon;
  std::optional<std::size_t> n;
  std::optional<double> value;  // absent when vacuous
  bool vacuous = false;
  bool diagnostic = false;      // an asymptotic display, not an inequality at finite k
  std::string note;
  std::map<std::string, double> components;
};

struct EpsilonOptions {
  std::size_t atom_cap = 1'000'000;  // distinct k-fold sums before switching to Monte Carlo
  std::size_t grid_points = 200;
  double grid_max_nats = 40.0;
  bool literal_mixed_base = false;   // compare the sum in bits against b n + gamma, penalty e^-gamma
  std::uint64_t seed = 1;
  std::size_t trials = 100000;
};

/// sup over gamma >= 0 of P[sum of k tilted values >= b n ln2 + gamma] - e^-gamma.
/// components: raw, clipped, gamma_nats, threshold_nats, atoms, and for Monte Carlo
/// runs the half-width of the probability estimate.
BoundReport epsilon_converse(const LearningProblem& problem, const TiltedTable& t, std::size_t k, std::size_t n,
                             const EpsilonOptions& opts = {});

/// Explicit finite-k lower bound on the rate (bits per opportunity).
BoundReport rate_converse_explicit(const RDSolution& sol, const DispersionReport& report, std::size_t k,
                                   double epsilon);

/// R + sqrt(V/k) Q^-1(eps); labelled diagnostic.
BoundReport rate_converse_asymptotic(const RDSolution& sol, const DispersionReport& report, std::size_t k,
                                     double epsilon);

/// D(R) + sqrt(V / lambda^2 / k) Q^-1(eps); labelled diagnostic.
BoundReport distortion_converse(const LearningProblem& problem, const Algorithm& algorithm, std::size_t n,
                                double rate_bits, std::size_t k, double epsilon, const SolverOptions& opts = {});

/// ceil(k * bound / b); nullopt when the bound is vacuous.
std::optional<std::size_t> sample_complexity_lower(const BoundReport& bound, const LearningProblem& problem,
                                                   std::size_t k);

}  // namespace lossylearn
