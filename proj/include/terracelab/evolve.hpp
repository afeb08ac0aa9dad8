#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "terracelab/field.hpp"
#include "terracelab/linalg.hpp"
#include "terracelab/problem.hpp"

namespace terracelab {

enum class Boundary { Periodic, Clamped };

/// 1D propagation domain. Node i sits at x0 + i*dx; x0 is an integer so nodes
/// align with the periodic cell lattice.
struct Domain1D {
    double x0 = 0.0;
    int n = 0;
    double dx = 0.0;
    Boundary bc = Boundary::Periodic;

    double x(int i) const { return x0 + i * dx; }
    double length() const { return n * dx; }
};

struct Domain2D {
    double x0 = 0.0, y0 = 0.0;
    int nx = 0, ny = 0;
    double dx = 0.0;
    Boundary bc_x = Boundary::Periodic;
    Boundary bc_y = Boundary::Periodic;

    double x(int i) const { return x0 + i * dx; }
    double y(int j) const { return y0 + j * dx; }
    std::size_t size() const { return std::size_t(nx) * ny; }
    std::size_t idx(int i, int j) const { return std::size_t(j) * nx + i; }
};

/// Solution snapshot on a domain grid.
struct Field {
    std::vector<double> values;
    double time = 0.0;
};

/// Precomputed modulation factors so the reaction evaluates with one Horner pass
/// per polynomial and no trig per step.
class ReactionSampler {
  public:
    ReactionSampler() = default;
    ReactionSampler(const ReactionSpec& spec, const std::vector<Point>& nodes);

    double value(std::size_t node, double u) const;
    double deriv(std::size_t node, double u) const;

  private:
    const ReactionSpec* spec_ = nullptr;
    std::vector<double> cos_factors_;  // node-major, modes inner
    std::size_t modes_ = 0;
};

/// One IMEX step: explicit reaction, implicit (backward Euler) diffusion.
/// 1D solves a (cyclic) tridiagonal system.
class Stepper1D {
  public:
    Stepper1D(const PeriodicProblem& prob, const Domain1D& dom, double dt);

    /// Ghost node values for clamped boundaries.
    void set_clamp(double left_ghost, double right_ghost);

    void step(Field& f);
    double dt() const { return dt_; }
    const Domain1D& domain() const { return dom_; }

  private:
    const PeriodicProblem& prob_;
    Domain1D dom_;
    double dt_;
    std::vector<double> sub_, diag_, sup_;
    double corner_lo_ = 0.0, corner_hi_ = 0.0;
    double flux_left_ = 0.0, flux_right_ = 0.0;  // dt*a_ghost/dx^2 coefficients
    double clamp_left_ = 0.0, clamp_right_ = 0.0;
    ReactionSampler reaction_;
    std::vector<double> work_;
    TridiagonalSolver solver_;
};

/// 2D IMEX with dimensional (ADI-style) splitting of the implicit diffusion:
/// (I - dt Lx) and (I - dt Ly) factor solves along grid lines.
class Stepper2D {
  public:
    Stepper2D(const PeriodicProblem& prob, const Domain2D& dom, double dt);

    /// Clamp states evaluated at ghost coordinates; any side whose boundary is
    /// periodic ignores its array.
    void set_clamp(std::vector<double> left, std::vector<double> right,
                   std::vector<double> bottom, std::vector<double> top);

    void step(Field& f);
    double dt() const { return dt_; }
    const Domain2D& domain() const { return dom_; }

  private:
    const PeriodicProblem& prob_;
    Domain2D dom_;
    double dt_;
    // Per-row x-direction coefficients and per-column y-direction coefficients.
    std::vector<double> xsub_, xdiag_, xsup_, xcorn_lo_, xcorn_hi_, xflux_l_, xflux_r_;
    std::vector<double> ysub_, ydiag_, ysup_, ycorn_lo_, ycorn_hi_, yflux_b_, yflux_t_;
    std::vector<double> clamp_l_, clamp_r_, clamp_b_, clamp_t_;
    ReactionSampler reaction_;
    std::vector<double> work_, line_;
    TridiagonalSolver solver_;
};

struct Observer {
    int cadence = 1;  // steps between calls
    std::function<void(int step, double t, const std::vector<double>&)> fn;
};

struct EvolveOptions {
    double horizon = 0.0;
    // Invariant region [lo - eps, hi + eps]; empty = no check.
    std::vector<double> lower_bound;
    std::vector<double> upper_bound;
    double eps_overshoot = 1e-8;
    int check_cadence = 16;
};

struct EvolveReport {
    Field final;
    int steps = 0;
    double max_overshoot = 0.0;
    bool aborted_nonfinite = false;
};

/// Fixed-dt march with observers. Throws NumericalDiagnostic on NaN or on
/// leaving the invariant region beyond eps_overshoot.
template <typename Stepper>
EvolveReport evolve(Stepper& stepper, Field u0, const EvolveOptions& opt,
                    const std::vector<Observer>& observers = {});

/// Evolves ordered data u0 <= v0 with the same stepper settings and reports the
/// worst violation of u <= v over the run (monotone scheme regression).
struct ComparisonReport {
    double max_violation = 0.0;
    bool passed = false;
};

ComparisonReport comparison_check(const PeriodicProblem& prob, const Domain1D& dom,
                                  const std::vector<double>& u0, const std::vector<double>& v0,
                                  double dt, double horizon, double tol);

}  // namespace terracelab
