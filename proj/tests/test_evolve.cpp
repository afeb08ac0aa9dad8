#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "terracelab/evolve.hpp"
#include "terracelab/problem.hpp"
#include "terracelab/spectral.hpp"

using namespace terracelab;

namespace {

LabConfig cubic_config() {
    return load_config_text(R"(
[problem]
dimension = 1
reaction = cubic 0.3
[grid]
points_per_period = 50
extent_periods = 4
)");
}

LabConfig zero_reaction_config() {
    return load_config_text(R"(
[problem]
dimension = 1
reaction = poly 0
)");
}

std::vector<double> smooth_random_field(int n, std::uint64_t seed, double lo, double hi) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    std::vector<double> u(n, 0.0);
    for (int mode = 0; mode <= 6; ++mode) {
        double a = amp(rng), b = amp(rng);
        for (int i = 0; i < n; ++i) {
            double x = double(i) / n;
            u[i] += a * std::cos(2 * std::numbers::pi * mode * x) / (1.0 + mode * mode) +
                    b * std::sin(2 * std::numbers::pi * mode * x) / (1.0 + mode * mode);
        }
    }
    double umin = *std::min_element(u.begin(), u.end());
    double umax = *std::max_element(u.begin(), u.end());
    for (auto& v : u) v = lo + (hi - lo) * (v - umin) / (umax - umin);
    return u;
}

}  // namespace

TEST_CASE("implicit heat step damps the first Fourier mode exactly") {
    LabConfig cfg = zero_reaction_config();
    const int n = 64;
    const double dx = 1.0 / n;
    Domain1D dom{0.0, n, dx, Boundary::Periodic};
    const double dt = 0.01;
    Stepper1D stepper(cfg.problem, dom, dt);

    Field f;
    f.values.resize(n);
    for (int i = 0; i < n; ++i) f.values[i] = std::cos(2 * std::numbers::pi * dom.x(i));
    Field f0 = f;
    stepper.step(f);

    // discrete symbol of the centered flux Laplacian at mode 1
    double lam = -(2.0 - 2.0 * std::cos(2 * std::numbers::pi * dx)) / (dx * dx);
    double factor = 1.0 / (1.0 - dt * lam);
    for (int i = 0; i < n; ++i)
        CHECK(f.values[i] == doctest::Approx(factor * f0.values[i]).epsilon(1e-12));

    // continuum factor, approached at second order in dx
    double continuum = 1.0 / (1.0 + 4.0 * std::numbers::pi * std::numbers::pi * dt);
    CHECK(factor == doctest::Approx(continuum).epsilon(0.01));
}

TEST_CASE("constant steady states are exact fixed points") {
    LabConfig cfg = cubic_config();
    const int n = 50;
    Domain1D dom{0.0, n, 1.0 / n, Boundary::Periodic};
    Stepper1D stepper(cfg.problem, dom, 0.1);
    for (double level : {0.0, 1.0}) {
        Field f;
        f.values.assign(n, level);
        for (int s = 0; s < 20; ++s) stepper.step(f);
        for (double v : f.values) CHECK(std::abs(v - level) <= 1e-14);
    }
}

TEST_CASE("steady-state residual does not grow along the march") {
    LabConfig cfg = load_config_text(R"(
[problem]
dimension = 1
reaction = cubic 0.3
modulation = 0.05 cos 1 | 0 0 1
[grid]
points_per_period = 64
)");
    CellOperator op(cfg.problem, 64);
    NewtonOptions nopt;
    CellField guess = CellField::constant(1, 64, 1.0);
    SteadyState pbar = find_steady_state(op, guess, nopt, cfg.run.tol_marginal);
    REQUIRE(pbar.residual <= 1e-10);
    CHECK(pbar.values.max() - pbar.values.min() > 1e-4);  // genuinely nonconstant

    Domain1D dom{0.0, 64, 1.0 / 64, Boundary::Periodic};
    Stepper1D stepper(cfg.problem, dom, 0.25);
    Field f{pbar.values.values, 0.0};
    auto residual_of = [&](const std::vector<double>& u) {
        CellField c;
        c.dim = 1;
        c.n = 64;
        c.values = u;
        auto r = op.steady_residual(c);
        double m = 0.0;
        for (double v : r) m = std::max(m, std::abs(v));
        return m;
    };
    double r0 = residual_of(f.values);
    for (int s = 1; s <= 10; ++s) {
        stepper.step(f);
        CHECK(residual_of(f.values) <= r0 + s * 1e-12);
    }
    double drift = 0.0;
    for (int i = 0; i < 64; ++i)
        drift = std::max(drift, std::abs(f.values[i] - pbar.values.values[i]));
    CHECK(drift <= 1e-9);
}

TEST_CASE("comparison principle: identical and ordered data") {
    LabConfig cfg = cubic_config();
    const int n = 200;
    Domain1D dom{0.0, n, 0.02, Boundary::Periodic};
    const double dt = cfg.run.measurement_dt(cfg.problem, 0.02, -0.1, 1.1);

    std::vector<double> u0(n), v0(n);
    for (int i = 0; i < n; ++i) {
        double x = dom.x(i);
        double bump = std::exp(-8.0 * std::pow(std::sin(std::numbers::pi * x / 4.0), 2));
        u0[i] = 0.3 * bump;
        v0[i] = 0.6 * bump;
    }
    auto same = comparison_check(cfg.problem, dom, u0, u0, dt, 2.0, cfg.run.comparison_tol);
    CHECK(same.max_violation == 0.0);
    auto rep = comparison_check(cfg.problem, dom, u0, v0, dt, 4.0, cfg.run.comparison_tol);
    CHECK(rep.passed);
    CHECK(rep.max_violation <= 1e-10);
}

TEST_CASE("comparison principle over randomized ordered pairs") {
    LabConfig cfg = load_config_text(R"(
[problem]
dimension = 1
reaction = quintic 0.2 0.5 0.8
modulation = 0.03 cos 1 | 0 1 -1
)");
    const int n = 150;
    Domain1D dom{0.0, n, 0.02, Boundary::Periodic};
    const double dt = cfg.run.measurement_dt(cfg.problem, 0.02, -0.1, 1.1);
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto a = smooth_random_field(n, 1000 + seed, 0.0, 0.9);
        auto b = smooth_random_field(n, 2000 + seed, 0.0, 0.9);
        std::vector<double> lo(n), hi(n);
        for (int i = 0; i < n; ++i) {
            lo[i] = std::min(a[i], b[i]);
            hi[i] = std::max(a[i], b[i]);
        }
        auto rep = comparison_check(cfg.problem, dom, lo, hi, dt, 1.5, 1e-10);
        worst = std::max(worst, rep.max_violation);
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("periodic-shift equivariance to machine precision") {
    LabConfig cfg = load_config_text(R"(
[problem]
dimension = 1
reaction = cubic 0.3
modulation = 0.05 cos 1 | 0 1 -1
[grid]
points_per_period = 32
)");
    const int ppp = 32, periods = 4, n = ppp * periods;
    Domain1D dom{0.0, n, 1.0 / ppp, Boundary::Periodic};
    const double dt = cfg.run.measurement_dt(cfg.problem, 1.0 / ppp, -0.1, 1.1);
    auto u0 = smooth_random_field(n, 42, 0.05, 0.95);
    std::vector<double> shifted(n);
    for (int i = 0; i < n; ++i) shifted[i] = u0[(i + ppp) % n];

    Stepper1D s1(cfg.problem, dom, dt), s2(cfg.problem, dom, dt);
    Field f1{u0, 0.0}, f2{shifted, 0.0};
    for (int s = 0; s < 400; ++s) {
        s1.step(f1);
        s2.step(f2);
    }
    double gap = 0.0;
    for (int i = 0; i < n; ++i)
        gap = std::max(gap, std::abs(f2.values[i] - f1.values[(i + ppp) % n]));
    CHECK(gap <= 1e-11);
}

TEST_CASE("invariant region is enforced") {
    LabConfig cfg = cubic_config();
    const int n = 100;
    Domain1D dom{0.0, n, 0.02, Boundary::Periodic};
    Stepper1D stepper(cfg.problem, dom, 0.05);
    EvolveOptions opt;
    opt.horizon = 1.0;
    opt.lower_bound.assign(n, 0.0);
    opt.upper_bound.assign(n, 1.0);
    opt.check_cadence = 1;

    Field ok;
    ok.values = smooth_random_field(n, 5, 0.05, 0.95);
    auto rep = evolve(stepper, ok, opt);
    CHECK(rep.max_overshoot <= cfg.run.eps_overshoot);

    Field bad;
    bad.values.assign(n, 1.5);
    Stepper1D stepper2(cfg.problem, dom, 0.05);
    CHECK_THROWS_AS(evolve(stepper2, bad, opt), NumericalDiagnostic);
}

TEST_CASE("planar datum becomes monotone in time after the transient") {
    LabConfig cfg = cubic_config();
    const int ppp = 50, periods = 30, n = ppp * periods;
    Domain1D dom{-10.0, n, 1.0 / ppp, Boundary::Clamped};
    const double dt = cfg.run.measurement_dt(cfg.problem, 1.0 / ppp, -0.1, 1.1);
    Stepper1D stepper(cfg.problem, dom, dt);
    stepper.set_clamp(1.0, 0.0);
    Field f;
    f.values.resize(n);
    for (int i = 0; i < n; ++i) f.values[i] = dom.x(i) <= 0.0 ? 1.0 : 0.0;

    const double burn = 10.0;
    int burn_steps = static_cast<int>(burn / dt);
    for (int s = 0; s < burn_steps; ++s) stepper.step(f);
    std::vector<double> prev = f.values;
    double worst_drop = 0.0;
    for (int s = 0; s < 2000; ++s) {
        stepper.step(f);
        if (s % 50 == 0) {
            for (int i = 0; i < n; ++i)
                worst_drop = std::max(worst_drop, prev[i] - f.values[i]);
            prev = f.values;
        }
    }
    CHECK(worst_drop <= 1e-9);
}

TEST_CASE("2D: constant states are fixed points and x-shift equivariance holds") {
    LabConfig cfg = load_config_text(R"(
[problem]
dimension = 2
diffusion_xx = 1.0 + 0.25 cos 1 0
diffusion_yy = 1.0
reaction = cubic 0.3
modulation = 0.05 cos 1 1 | 0 1 -1
[grid]
points_per_period = 16
)");
    const int ppp = 16;
    Domain2D dom{0.0, 0.0, 3 * ppp, 2 * ppp, 1.0 / ppp, Boundary::Periodic,
                 Boundary::Periodic};
    const double dt = cfg.run.measurement_dt(cfg.problem, 1.0 / ppp, -0.1, 1.1);

    Stepper2D s0(cfg.problem, dom, dt);
    Field c;
    c.values.assign(dom.size(), 1.0);
    for (int s = 0; s < 10; ++s) s0.step(c);
    for (double v : c.values) CHECK(std::abs(v - 1.0) <= 1e-13);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unif(0.1, 0.9);
    Field a;
    a.values.resize(dom.size());
    for (int j = 0; j < dom.ny; ++j)
        for (int i = 0; i < dom.nx; ++i)
            a.values[dom.idx(i, j)] =
                0.5 + 0.3 * std::sin(2 * std::numbers::pi * (dom.x(i) / 3.0)) *
                          std::cos(2 * std::numbers::pi * (dom.y(j) / 2.0));
    Field b;
    b.values.resize(dom.size());
    for (int j = 0; j < dom.ny; ++j)
        for (int i = 0; i < dom.nx; ++i)
            b.values[dom.idx(i, j)] = a.values[dom.idx((i + ppp) % dom.nx, j)];

    Stepper2D sa(cfg.problem, dom, dt), sb(cfg.problem, dom, dt);
    for (int s = 0; s < 100; ++s) {
        sa.step(a);
        sb.step(b);
    }
    double gap = 0.0;
    for (int j = 0; j < dom.ny; ++j)
        for (int i = 0; i < dom.nx; ++i)
            gap = std::max(gap, std::abs(b.values[dom.idx(i, j)] -
                                         a.values[dom.idx((i + ppp) % dom.nx, j)]));
    CHECK(gap <= 1e-11);
}
