#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "lossylearn/prob.hpp"
#include "lossylearn/rd.hpp"
#include "lossylearn/scenario.hpp"

namespace lossylearn {

/// Below this a dispersion is treated as zero (bits^2).
inline constexpr double kZeroDispersion = 1e-12;

/// j(w,h) = iota(w;h) + lambda (d(w,h) - d) in bits, on the support of the induced joint.
struct TiltedTable {
  double d = 0.0;
  double lambda_star = 0.0;  // bits per distortion unit
  double rate_bits = 0.0;
  Joint joint;
  std::vector<double> values;  // W x H; -inf off the support
  std::vector<double> iota;    // information density in bits, same layout

  std::size_t num_w() const { return joint.extent(0); }
  std::size_t num_h() const { return joint.extent(1); }
  double at(std::size_t w, std::size_t h) const { return values[w * num_h() + h]; }
  double mass(std::size_t w, std::size_t h) const { return joint.at(w, h); }
  double expectation() const;
};

/// Refuses flagged solutions (domain error): tilted information needs E[d] = d
/// and a finite multiplier.
TiltedTable tilted_information(const LearningProblem& problem, const RDSolution& sol);

/// Sum of single-letter values; domain error on a pair outside the support.
double tilted_information_k(const TiltedTable& t, const std::vector<std::size_t>& w_tuple,
                            const std::vector<std::size_t>& h_tuple);

struct DispersionReport {
  double V = 0.0;   // bits^2
  double A3 = 0.0;  // E|j - Ej|^3, bits^3
  double mean = 0.0;
  double lambda_star = 0.0;
  bool decomposed = false;

  double V_in = 0.0;
  double V_bet = 0.0;
  // Per-world inner terms (bits^2, dist^2, bits*dist); zero for worlds of probability zero.
  std::vector<double> v_in_iota_S, v_in_iota_A, v_in_d_S, v_in_d_A, v_in_cov;
  double v_bet_iota = 0.0, v_bet_d = 0.0, v_bet_cov = 0.0;
  // Weights applied when reassembling: 1 for iota terms, lambda^2 for d terms, 2 lambda for covariances.
  double weight_iota = 1.0, weight_d = 0.0, weight_cov = 0.0;

  /// E_W of the weighted inner sum, recomputed from the sub-terms.
  double reconstructed_in(const std::vector<double>& pw) const;
  double reconstructed_bet() const;
};

DispersionReport rate_dispersion(const TiltedTable& t);

/// Full report with all sub-terms, using the factorized optimum of `sol`.
DispersionReport decompose_dispersion(const LearningProblem& problem, const Algorithm& algorithm,
                                      const RDSolution& sol, const TiltedTable& t);

/// 6 A3 / V^1.5; domain error when V is zero.
double berry_esseen_B(const DispersionReport& r);

/// max over i, t in T_n, w of |E_{H|t} d(w,H) - E_{H|t without i} d(w,H)|.
double uniform_stability_beta(const LearningProblem& problem, const Algorithm& algorithm, std::size_t n,
                              std::size_t cap = kDefaultEnumerationCap);

struct StabilityReport {
  std::size_t n = 0;
  double beta = 0.0;
  double rhs = 0.0;                      // 2 n beta^2
  std::vector<double> lhs;               // per w: Var over T ~ iid(w)^n of E_{H|T} d(w,H)
  std::vector<double> expected_inner_variance;  // per w: E_T Var_{H|T} d(w,H)
  bool holds = true;
  std::optional<double> rho;             // only for seeded deterministic algorithms
  std::optional<double> rho_rhs_n;       // (n/2) rho^2
  std::optional<double> rho_rhs_seed;    // (seed_len/2) rho^2
};

StabilityReport stability_diagnostics(const LearningProblem& problem, const Algorithm& algorithm, std::size_t n,
                                      std::size_t cap = kDefaultEnumerationCap);

struct MiChainReport {
  bool feasible = false;
  std::size_t n = 0;
  double d = 0.0;
  double rate_bits = 0.0;       // R(d, A) at this n
  double i_w_h = 0.0;           // I(W; H_iid)
  double i_t_h = 0.0;           // I(T; H_iid)
  double iid_distortion = 0.0;  // E[d] under i.i.d. sampling
  bool holds = true;            // both inequalities within 1e-9
};

/// Searches n upward from `n_start` (over sizes the algorithm defines, up to
/// `n_cap`) for one where i.i.d. sampling meets E[d] <= d.
MiChainReport mi_chain_diagnostics(const LearningProblem& problem, const Algorithm& algorithm, double d,
                                   std::size_t n_start, std::size_t n_cap, const SolverOptions& opts = {});

}  // namespace lossylearn
