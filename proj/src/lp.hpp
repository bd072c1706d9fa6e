#pragma once

#include <vector>

namespace lossylearn::detail {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  double objective = 0.0;
  std::vector<double> x;
};

/// min c.x  s.t.  A x = b, x >= 0. Dense two-phase simplex with Bland's rule;
/// `a` is row-major with c.size() columns. Redundant equality rows are allowed.
LpResult solve_standard_lp(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& c,
                           double tol = 1e-11);

}  // namespace lossylearn::detail
