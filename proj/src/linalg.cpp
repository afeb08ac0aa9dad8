#include "terracelab/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace terracelab {

void TridiagonalSolver::resize(std::size_t n) {
    scratch_.resize(n);
    u_.resize(n);
    z_.resize(n);
}

void TridiagonalSolver::solve(const std::vector<double>& sub, const std::vector<double>& diag,
                              const std::vector<double>& sup, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    if (n == 0) return;
    if (scratch_.size() < n) resize(n);
    double piv = diag[0];
    if (piv == 0.0) throw std::runtime_error("tridiagonal solve: zero pivot");
    scratch_[0] = sup[0] / piv;
    rhs[0] /= piv;
    for (std::size_t i = 1; i < n; ++i) {
        piv = diag[i] - sub[i] * scratch_[i - 1];
        if (piv == 0.0) throw std::runtime_error("tridiagonal solve: zero pivot");
        scratch_[i] = sup[i] / piv;
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / piv;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch_[i] * rhs[i + 1];
}

void TridiagonalSolver::solve_cyclic(const std::vector<double>& sub,
                                     const std::vector<double>& diag,
                                     const std::vector<double>& sup, double corner_lo,
                                     double corner_hi, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    if (n == 1) {
        rhs[0] /= (diag[0] + corner_lo + corner_hi);
        return;
    }
    if (n == 2) {
        // Corners merge with the regular off-diagonals.
        double a = diag[0], b = sup[0] + corner_lo, c = sub[1] + corner_hi, d = diag[1];
        double det = a * d - b * c;
        double r0 = rhs[0], r1 = rhs[1];
        rhs[0] = (d * r0 - b * r1) / det;
        rhs[1] = (a * r1 - c * r0) / det;
        return;
    }
    if (scratch_.size() < n) resize(n);
    // Sherman-Morrison: A_cyc = A + u v^T with u = (gamma, 0, ..., c_hi*? ) standard form.
    const double gamma = -diag[0];
    std::vector<double> d2(diag);
    d2[0] -= gamma;
    d2[n - 1] -= corner_lo * corner_hi / gamma;
    for (std::size_t i = 0; i < n; ++i) {
        u_[i] = 0.0;
        z_[i] = rhs[i];
    }
    u_[0] = gamma;
    u_[n - 1] = corner_hi;
    solve(sub, d2, sup, z_);
    solve(sub, d2, sup, u_);
    // v = (1, 0, ..., corner_lo/gamma)
    double vz = z_[0] + corner_lo / gamma * z_[n - 1];
    double vu = u_[0] + corner_lo / gamma * u_[n - 1];
    double factor = vz / (1.0 + vu);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = z_[i] - factor * u_[i];
}

LineFit fit_line(const std::vector<double>& t, const std::vector<double>& y) {
    LineFit fit;
    fit.n = t.size();
    if (fit.n < 2) return fit;
    const double n = static_cast<double>(fit.n);
    double mt = 0.0, my = 0.0;
    for (std::size_t i = 0; i < fit.n; ++i) {
        mt += t[i];
        my += y[i];
    }
    mt /= n;
    my /= n;
    double stt = 0.0, sty = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < fit.n; ++i) {
        double dt = t[i] - mt, dy = y[i] - my;
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if (stt == 0.0) return fit;
    fit.slope = sty / stt;
    fit.intercept = my - fit.slope * mt;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < fit.n; ++i) {
        double r = y[i] - (fit.intercept + fit.slope * t[i]);
        ss_res += r * r;
    }
    if (fit.n > 2) {
        double sigma2 = ss_res / (n - 2.0);
        fit.slope_se = std::sqrt(sigma2 / stt);
    }
    fit.r2 = (syy > 0.0) ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

}  // namespace terracelab
