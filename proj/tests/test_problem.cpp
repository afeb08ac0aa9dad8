#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "terracelab/problem.hpp"

using namespace terracelab;

namespace {

const char* kCubicConfig = R"(
[problem]
dimension = 1
diffusion_xx = 1.0
reaction = cubic 0.3
[grid]
points_per_period = 64
extent_periods = 4
)";

}  // namespace

TEST_CASE("identity diffusion gives unit ellipticity bounds") {
    LabConfig cfg = load_config_text(kCubicConfig);
    CHECK(cfg.problem.c1() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(cfg.problem.c2() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(cfg.problem.dimension() == 1);
    CHECK(cfg.problem.homogeneous());
}

TEST_CASE("cosine diffusion bounds sampled on the grid") {
    LabConfig cfg = load_config_text(R"(
[problem]
dimension = 1
diffusion_xx = 1.0 + 0.5 cos 1
reaction = cubic 0.3
)");
    CHECK(cfg.problem.c1() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(cfg.problem.c2() == doctest::Approx(1.5).epsilon(1e-12));
    CHECK_FALSE(cfg.problem.homogeneous());
}

TEST_CASE("non-elliptic diffusion is rejected") {
    CHECK_THROWS_AS(load_config_text(R"(
[problem]
dimension = 1
diffusion_xx = 0.0 + 1.0 cos 1
reaction = cubic 0.3
)"),
                    ConfigError);
}

TEST_CASE("bad configs are rejected with schema errors") {
    CHECK_THROWS_AS(load_config_text("[problem]\ndimension = 3\nreaction = cubic 0.3\n"),
                    ConfigError);
    CHECK_THROWS_AS(load_config_text("[problem]\ndimension = 1\nreaction = cubic 0.3\n"
                                     "mystery_key = 1\n"),
                    ConfigError);
    CHECK_THROWS_AS(load_config_text("[problem]\ndimension = 1\n"), ConfigError);
    CHECK_THROWS_AS(load_config_text("[nonsense]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(load_config_text("[problem]\ndimension = 1\nreaction = cubic 0.3\n"
                                     "[grid]\npoints_per_period = 1\n"),
                    ConfigError);
}

TEST_CASE("cubic reaction values and exact derivative") {
    LabConfig cfg = load_config_text(kCubicConfig);
    const Point x0{0.0, 0.0};
    // f(u) = u(1-u)(u-a)
    CHECK(cfg.problem.reaction_value(x0, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(cfg.problem.reaction_deriv(x0, 0.0) == doctest::Approx(-0.3).epsilon(1e-14));
    CHECK(cfg.problem.reaction_value(x0, 1.0) == doctest::Approx(0.0).epsilon(1e-15));

    LabConfig sym = load_config_text(R"(
[problem]
dimension = 1
reaction = cubic 0.5
)");
    CHECK(sym.problem.reaction_value(x0, 0.5) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("quintic derivative signs at the roots") {
    ReactionSpec q = ReactionSpec::quintic(0.2, 0.5, 0.8);
    const Point x0{0.0, 0.0};
    CHECK(q.deriv_u(x0, 0.0) == doctest::Approx(-0.08).epsilon(1e-12));
    CHECK(q.deriv_u(x0, 0.2) == doctest::Approx(0.0288).epsilon(1e-12));
    CHECK(q.deriv_u(x0, 0.5) == doctest::Approx(-0.0225).epsilon(1e-12));
    CHECK(q.deriv_u(x0, 0.8) == doctest::Approx(0.0288).epsilon(1e-12));
    CHECK(q.deriv_u(x0, 1.0) == doctest::Approx(-0.08).epsilon(1e-12));
}

TEST_CASE("periodicity of coefficients under integer shifts") {
    LabConfig cfg = load_config_text(R"(
[problem]
dimension = 2
diffusion_xx = 1.0 + 0.25 cos 1 0
diffusion_yy = 1.0 + 0.25 cos 0 1 phase 0.7
reaction = cubic 0.3
modulation = 0.05 cos 1 1 | 0 1 -1
)");
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 64; ++trial) {
        Point p{unif(rng), unif(rng)};
        Point shifted{p.x + 3.0, p.y - 2.0};
        double u = unif(rng);
        CHECK(cfg.problem.reaction_value(p, u) ==
              doctest::Approx(cfg.problem.reaction_value(shifted, u)).epsilon(1e-12));
        CHECK(cfg.problem.diffusion_xx(p) ==
              doctest::Approx(cfg.problem.diffusion_xx(shifted)).epsilon(1e-12));
        CHECK(cfg.problem.diffusion_yy(p) ==
              doctest::Approx(cfg.problem.diffusion_yy(shifted)).epsilon(1e-12));
    }
}

TEST_CASE("analytic u-derivative matches central differences") {
    LabConfig cfg = load_config_text(R"(
[problem]
dimension = 1
reaction = quintic 0.2 0.5 0.8
modulation = 0.05 cos 1 | 0 0 1 -1
)");
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(0.0, 1.0);
    std::uniform_real_distribution<double> uu(-0.2, 1.2);
    const double h = 1e-5;
    for (int trial = 0; trial < 200; ++trial) {
        Point p{ux(rng), 0.0};
        double u = uu(rng);
        double fd = (cfg.problem.reaction_value(p, u + h) -
                     cfg.problem.reaction_value(p, u - h)) /
                    (2.0 * h);
        double an = cfg.problem.reaction_deriv(p, u);
        CHECK(std::abs(an - fd) <= 1e-6 * std::max(1.0, std::abs(an)));
    }
}

TEST_CASE("counter-example reaction family is expressible") {
    // balanced cubic plus a nonnegative periodic bump: the Remark 5.2 form
    LabConfig cfg = load_config_text(R"(
[problem]
dimension = 2
reaction = cubic 0.5
modulation = 0.02 cos 1 0 | 0 0 1 -2 1
)");
    const Point p{0.25, 0.5};
    double base = 0.3 * (1 - 0.3) * (0.3 - 0.5);
    double chi = 0.02 * std::cos(2 * M_PI * 0.25) * (0.09 * 0.49);
    CHECK(cfg.problem.reaction_value(p, 0.3) == doctest::Approx(base + chi).epsilon(1e-12));
}

TEST_CASE("state reflection conjugates the reaction exactly") {
    LabConfig cfg = load_config_text(R"(
[problem]
dimension = 1
reaction = cubic 0.3
modulation = 0.05 cos 1 | 0 1 -1
)");
    PeriodicProblem refl = cfg.problem.reflected(1.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        Point p{unif(rng), 0.0};
        double v = unif(rng);
        CHECK(refl.reaction_value(p, v) ==
              doctest::Approx(-cfg.problem.reaction_value(p, 1.0 - v)).epsilon(1e-12));
    }
}

TEST_CASE("polynomial utilities") {
    Polynomial p = Polynomial::from_roots({0.0, 1.0, 0.3}, -1.0);  // u(1-u)(u-0.3)
    CHECK(p.eval(0.7) == doctest::Approx(0.7 * 0.3 * 0.4).epsilon(1e-14));
    Polynomial q = p.compose_affine(1.0, -1.0);  // p(1-u)
    CHECK(q.eval(0.25) == doctest::Approx(p.eval(0.75)).epsilon(1e-14));
    CHECK(oracle::poly_integral(Polynomial{{0.0, 2.0}}, 0.0, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("measurement dt policy respects both limits") {
    LabConfig cfg = load_config_text(kCubicConfig);
    double dt = cfg.run.measurement_dt(cfg.problem, 0.02, -0.1, 1.1);
    CHECK(dt <= 10.0 * 0.02 * 0.02 / cfg.problem.c2() + 1e-15);
    double lip = cfg.problem.reaction().lipschitz_bound(-0.1, 1.1);
    CHECK(dt <= 0.5 / lip + 1e-15);
    double dtr = cfg.run.relaxation_dt(cfg.problem, -0.1, 1.1);
    CHECK(dtr <= 0.25 + 1e-15);
}
