#pragma once

#include <cstddef>
#include <vector>

namespace terracelab {

/// Tridiagonal system solver, Thomas algorithm. Diagonals sized n, sub[0] and
/// sup[n-1] unused. Safe without pivoting for the SPD / M-matrix systems built here.
class TridiagonalSolver {
  public:
    void resize(std::size_t n);

    /// Solve (sub, diag, sup) x = rhs in place; rhs becomes x.
    void solve(const std::vector<double>& sub, const std::vector<double>& diag,
               const std::vector<double>& sup, std::vector<double>& rhs);

    /// Same system with periodic corner entries: A[0][n-1] = corner_lo,
    /// A[n-1][0] = corner_hi (Sherman-Morrison).
    void solve_cyclic(const std::vector<double>& sub, const std::vector<double>& diag,
                      const std::vector<double>& sup, double corner_lo, double corner_hi,
                      std::vector<double>& rhs);

  private:
    std::vector<double> scratch_;
    std::vector<double> u_;
    std::vector<double> z_;
};

/// Ordinary least squares of y against t. Returns slope, intercept, the slope's
/// standard error, and R^2.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double r2 = 0.0;
    std::size_t n = 0;
};

LineFit fit_line(const std::vector<double>& t, const std::vector<double>& y);

}  // namespace terracelab
