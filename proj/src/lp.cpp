#include "lp.hpp"

#include <cmath>
#include <cstddef>

namespace lossylearn::detail {

namespace {

struct Tableau {
  std::size_t rows, cols;  // constraint rows; columns include the rhs as the last one
  std::vector<double> t;   // (rows + 1) x cols, last row is the objective
  std::vector<std::size_t> basis;

  double& at(std::size_t i, std::size_t j) { return t[i * cols + j]; }
  double rhs(std::size_t i) const { return t[i * cols + cols - 1]; }

  void pivot(std::size_t r, std::size_t c) {
    const double p = at(r, c);
    for (std::size_t j = 0; j < cols; ++j) at(r, j) /= p;
    for (std::size_t i = 0; i <= rows; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols; ++j) at(i, j) -= f * at(r, j);
      at(i, c) = 0.0;
    }
    basis[r] = c;
  }

  void drop_row(std::size_t r) {
    t.erase(t.begin() + static_cast<std::ptrdiff_t>(r * cols), t.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols));
    basis.erase(basis.begin() + static_cast<std::ptrdiff_t>(r));
    --rows;
  }

  // Runs Bland's-rule simplex over columns [0, allowed). Returns false if unbounded.
  bool run(std::size_t allowed, double tol) {
    for (std::size_t iter = 0; iter < 100000; ++iter) {
      std::size_t enter = allowed;
      for (std::size_t j = 0; j < allowed; ++j)
        if (at(rows, j) < -tol) {
          enter = j;
          break;
        }
      if (enter == allowed) return true;
      std::size_t leave = rows;
      double best = 0.0;
      for (std::size_t i = 0; i < rows; ++i) {
        const double a = at(i, enter);
        if (a <= tol) continue;
        const double ratio = rhs(i) / a;
        if (leave == rows || ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == rows) return false;
      pivot(leave, enter);
    }
    return true;
  }
};

}  // namespace

LpResult solve_standard_lp(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& c,
                           double tol) {
  const std::size_t m = b.size(), n = c.size();
  Tableau tab{m, n + m + 1, std::vector<double>((m + 1) * (n + m + 1), 0.0), std::vector<std::size_t>(m)};
  for (std::size_t i = 0; i < m; ++i) {
    const double sign = b[i] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) tab.at(i, j) = sign * a[i * n + j];
    tab.at(i, n + i) = 1.0;
    tab.at(i, n + m) = sign * b[i];
    tab.basis[i] = n + i;
  }
  // Phase one: minimize the sum of artificials.
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j <= n + m; ++j)
      if (j < n || j == n + m) tab.at(m, j) -= tab.at(i, j);
  tab.run(n + m, tol);
  LpResult out;
  if (-tab.at(tab.rows, n + m) > 1e-9) return out;

  for (std::size_t i = 0; i < tab.rows;) {
    if (tab.basis[i] < n) {
      ++i;
      continue;
    }
    std::size_t col = n;
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(tab.at(i, j)) > tol) {
        col = j;
        break;
      }
    if (col == n) {
      tab.drop_row(i);
    } else {
      tab.pivot(i, col);
      ++i;
    }
  }

  // Phase two objective.
  for (std::size_t j = 0; j < tab.cols; ++j) tab.at(tab.rows, j) = j < n ? c[j] : 0.0;
  for (std::size_t i = 0; i < tab.rows; ++i) {
    const double f = tab.at(tab.rows, tab.basis[i]);
    if (f == 0.0) continue;
    for (std::size_t j = 0; j < tab.cols; ++j) tab.at(tab.rows, j) -= f * tab.at(i, j);
  }
  if (!tab.run(n, tol)) {
    out.status = LpStatus::unbounded;
    return out;
  }
  out.status = LpStatus::optimal;
  out.x.assign(n, 0.0);
  for (std::size_t i = 0; i < tab.rows; ++i)
    if (tab.basis[i] < n) out.x[tab.basis[i]] = std::max(0.0, tab.rhs(i));
  out.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) out.objective += c[j] * out.x[j];
  return out;
}

}  // namespace lossylearn::detail
