#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace terracelab {

/// Configuration or schema violation; maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A numerical certificate or sign/bracket check failed; exit code 3.
struct NumericalDiagnostic : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Run invalidated by resources: boundary contamination, non-convergence; exit code 4.
struct ResourceFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Point in the spatial domain; y is ignored in dimension 1.
struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Dense polynomial in u, coefficients in ascending order.
class Polynomial {
  public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

    static Polynomial zero() { return Polynomial{}; }
    static Polynomial constant(double c) { return Polynomial{{c}}; }
    /// (u - r0)(u - r1)... scaled by `scale`.
    static Polynomial from_roots(const std::vector<double>& roots, double scale = 1.0);

    double eval(double u) const;
    double deriv_eval(double u) const;
    Polynomial derivative() const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-() const;
    Polynomial scaled(double s) const;
    /// p(a + b*u) as a polynomial in u.
    Polynomial compose_affine(double a, double b) const;

    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    const std::vector<double>& coefficients() const { return coeffs_; }

  private:
    void trim();
    std::vector<double> coeffs_;
};

/// One Fourier mode of the reaction modulation: amp * cos(2*pi*(m.x) + phase) * g(u).
struct ModulationTerm {
    double amplitude = 0.0;
    std::array<int, 2> wavevector{0, 0};
    double phase = 0.0;
    Polynomial g;
};

/// f(x,u) = base(u) + sum of modulation terms. Derivatives in u are exact.
struct ReactionSpec {
    Polynomial base;
    std::vector<ModulationTerm> modulation;
    std::string description;

    static ReactionSpec cubic(double a);
    static ReactionSpec quintic(double a1, double a2, double a3);
    /// Multistable polynomial with roots {0, interior..., 1}; sign fixed so 0 is stable.
    static ReactionSpec from_interior_roots(const std::vector<double>& interior, double gain);

    double eval(const Point& p, double u) const;
    double deriv_u(const Point& p, double u) const;
    /// Upper bound of |df/du| for x anywhere, u in [lo, hi]; used for dt limits.
    double lipschitz_bound(double lo, double hi) const;
};

/// One diagonal diffusion entry as a trigonometric series:
/// a(x) = base + sum amp_j cos(2*pi*(m_j.x) + phase_j).
struct TrigSeries {
    double base = 1.0;
    struct Mode {
        double amplitude = 0.0;
        std::array<int, 2> wavevector{0, 0};
        double phase = 0.0;
    };
    std::vector<Mode> modes;

    double eval(const Point& p) const;
    double min_bound() const;  // base - sum |amp|
    double max_bound() const;  // base + sum |amp|
};

/// Cell-periodic equation data: diagonal A(x) and reaction f(x,u), period 1 per axis.
class PeriodicProblem {
  public:
    PeriodicProblem(int dimension, TrigSeries axx, TrigSeries ayy, ReactionSpec reaction);

    int dimension() const { return dim_; }
    double diffusion_xx(const Point& p) const { return axx_.eval(p); }
    double diffusion_yy(const Point& p) const { return ayy_.eval(p); }
    const ReactionSpec& reaction() const { return reaction_; }

    double reaction_value(const Point& p, double u) const { return reaction_.eval(p, u); }
    double reaction_deriv(const Point& p, double u) const { return reaction_.deriv_u(p, u); }

    /// Ellipticity constants measured on a probe grid (and series bounds).
    double c1() const { return c1_; }
    double c2() const { return c2_; }

    bool homogeneous() const;

    /// u -> pbar - u conjugate problem; valid when the extremal state is the constant
    /// `pbar_const`. Front speeds map to their negatives.
    PeriodicProblem reflected(double pbar_const) const;

    std::string summary() const;

  private:
    void certify_ellipticity();

    int dim_;
    TrigSeries axx_;
    TrigSeries ayy_;
    ReactionSpec reaction_;
    double c1_ = 0.0;
    double c2_ = 0.0;
};

/// Grid and run parameters; spacing always divides the unit period exactly.
struct GridSpec {
    int points_per_period = 50;
    int extent_periods = 60;     // propagation axis (or x)
    int extent_periods_y = 1;    // 2D only; transverse stripe width
    double interface_fraction = 0.25;

    double dx() const { return 1.0 / points_per_period; }
};

struct RunSpec {
    double horizon = 150.0;
    double dt = 0.0;  // 0 = derive from policy below
    double cfl_safety = 10.0;
    double reaction_limit = 0.5;
    double relax_dt_cap = 0.25;
    double steady_tol = 1e-10;
    double tol_marginal = 1e-4;
    double dedup_tol = 1e-5;
    double zero_speed_tol = 5e-3;
    double boundary_margin = 5.0;
    double eps_overshoot = 1e-8;
    double comparison_tol = 1e-10;
    double speed_se_max = 2e-3;
    double monotone_tol = 5e-3;
    double prof_tol = 2e-2;
    // slow fronts get their run extended until the tracked level has moved this
    // many periods (capped at extension_cap * horizon)
    double min_travel_periods = 3.0;
    double extension_cap = 8.0;
    std::uint64_t seed = 1;

    /// Time step for speed-measurement runs (accuracy-limited).
    double measurement_dt(const PeriodicProblem& prob, double dx,
                          double ulo, double uhi) const;
    /// Time step for relaxation runs (reaction-limited only).
    double relaxation_dt(const PeriodicProblem& prob, double ulo, double uhi) const;
};

/// Everything a pipeline needs, parsed from one config file.
struct LabConfig {
    PeriodicProblem problem;
    GridSpec grid;
    RunSpec run;
    std::string source_text;
};

/// Parse the [problem]/[grid]/[run] key-value format. Unknown keys are rejected.
LabConfig load_config_text(const std::string& text);
LabConfig load_config_file(const std::string& path);

}  // namespace terracelab
