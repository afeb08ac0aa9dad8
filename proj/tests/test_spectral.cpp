#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "terracelab/evolve.hpp"
#include "terracelab/problem.hpp"
#include "terracelab/spectral.hpp"

using namespace terracelab;

namespace {

LabConfig homogeneous_cubic() {
    return load_config_text(R"(
[problem]
dimension = 1
reaction = cubic 0.3
)");
}

LabConfig quintic_sym() {
    return load_config_text(R"(
[problem]
dimension = 1
reaction = quintic 0.2 0.5 0.8
)");
}

double eigen_residual(const CellOperator& op, const std::vector<double>& q,
                      const EigenPair& pair) {
    std::vector<double> lp;
    op.apply_diffusion(pair.eigenfunction.values, lp);
    double worst = 0.0;
    for (std::size_t k = 0; k < lp.size(); ++k) {
        double v = lp[k] + q[k] * pair.eigenfunction.values[k] -
                   pair.lambda * pair.eigenfunction.values[k];
        worst = std::max(worst, std::abs(v));
    }
    return worst;
}

}  // namespace

TEST_CASE("constant-coefficient eigenvalue is the derivative at the state") {
    LabConfig cfg = homogeneous_cubic();
    CellOperator op(cfg.problem, 64);
    CellField zero = CellField::constant(1, 64, 0.0);
    EigenPair pair = principal_eigenpair(op, zero);
    CHECK(std::abs(pair.lambda - (-0.3)) <= 1e-10);
    for (double v : pair.eigenfunction.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(pair.residual <= 1e-8);
}

TEST_CASE("potential shift moves the eigenvalue exactly and keeps the eigenfunction") {
    LabConfig cfg = load_config_text(R"(
[problem]
dimension = 1
diffusion_xx = 1.0 + 0.3 cos 1
reaction = cubic 0.3
)");
    CellOperator op(cfg.problem, 96);
    std::vector<double> q(96);
    for (int i = 0; i < 96; ++i) q[i] = -1.0 + 0.5 * std::cos(2 * std::numbers::pi * i / 96.0);
    EigenPair base = principal_eigenpair(op, q);
    std::vector<double> q_shift = q;
    const double s = 0.37;
    for (auto& v : q_shift) v += s;
    EigenPair shifted = principal_eigenpair(op, q_shift);
    CHECK(shifted.lambda - base.lambda == doctest::Approx(s).epsilon(1e-10));
    for (int i = 0; i < 96; ++i)
        CHECK(std::abs(shifted.eigenfunction.values[i] - base.eigenfunction.values[i]) <=
              1e-9);
}

TEST_CASE("heterogeneous eigenpair matches the dense eigensolve oracle") {
    LabConfig cfg = load_config_text(R"(
[problem]
dimension = 1
reaction = cubic 0.3
)");
    CellOperator op(cfg.problem, 128);
    std::vector<double> q(128);
    for (int i = 0; i < 128; ++i)
        q[i] = -1.0 + 0.5 * std::cos(2 * std::numbers::pi * i / 128.0);
    EigenPair mine = principal_eigenpair(op, q);
    auto [lam_oracle, phi_oracle] = oracle::dense_principal_eigenpair(op, q);
    CHECK(std::abs(mine.lambda - lam_oracle) <= 1e-8);
    for (int i = 0; i < 128; ++i)
        CHECK(std::abs(mine.eigenfunction.values[i] - phi_oracle[i]) <= 1e-6);
    CHECK(eigen_residual(op, q, mine) <= 1e-8);
}

TEST_CASE("2D eigenpair matches the dense oracle") {
    LabConfig cfg = load_config_text(R"(
[problem]
dimension = 2
diffusion_xx = 1.0 + 0.2 cos 1 0
diffusion_yy = 1.0 + 0.2 cos 0 1
reaction = cubic 0.3
)");
    CellOperator op(cfg.problem, 20);
    std::vector<double> q(op.size());
    for (std::size_t k = 0; k < q.size(); ++k) {
        Point p = op.node(k);
        q[k] = -0.5 + 0.3 * std::cos(2 * std::numbers::pi * (p.x + p.y));
    }
    EigenPair mine = principal_eigenpair(op, q);
    auto [lam_oracle, phi_oracle] = oracle::dense_principal_eigenpair(op, q);
    CHECK(std::abs(mine.lambda - lam_oracle) <= 1e-8);
    for (std::size_t k = 0; k < q.size(); ++k)
        CHECK(std::abs(mine.eigenfunction.values[k] - phi_oracle[k]) <= 1e-6);
}

TEST_CASE("eigenvalue converges at second order under grid refinement") {
    LabConfig cfg = load_config_text(R"(
[problem]
dimension = 1
diffusion_xx = 1.0 + 0.4 cos 1
reaction = cubic 0.3
)");
    auto lambda_at = [&](int n) {
        CellOperator op(cfg.problem, n);
        std::vector<double> q(n);
        for (int i = 0; i < n; ++i)
            q[i] = -1.0 + 0.5 * std::cos(2 * std::numbers::pi * i / double(n));
        return principal_eigenpair(op, q).lambda;
    };
    double l1 = lambda_at(32), l2 = lambda_at(64), l3 = lambda_at(128);
    double ratio = std::abs(l1 - l2) / std::abs(l2 - l3);
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);
}

TEST_CASE("stability classification with dead band") {
    CHECK(classify_stability(-0.3, 1e-4) == Stability::Stable);
    CHECK(classify_stability(0.0, 1e-4) == Stability::Marginal);
    CHECK(classify_stability(0.0288, 1e-4) == Stability::Unstable);
    CHECK(classify_stability(5e-5, 1e-4) == Stability::Marginal);
}

TEST_CASE("Newton finds constant roots from nearby guesses") {
    LabConfig cfg = homogeneous_cubic();
    CellOperator op(cfg.problem, 64);
    NewtonOptions nopt;

    SteadyState one = find_steady_state(op, CellField::constant(1, 64, 0.9), nopt, 1e-4);
    CHECK(one.values.max() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(one.residual <= 1e-10);
    CHECK(one.stability == Stability::Stable);

    LabConfig q5 = quintic_sym();
    CellOperator op5(q5.problem, 64);
    SteadyState half = find_steady_state(op5, CellField::constant(1, 64, 0.45), nopt, 1e-4);
    CHECK(half.values.mean() == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(half.stability == Stability::Stable);
}

TEST_CASE("Newton flags convergence far from the guess") {
    LabConfig cfg = homogeneous_cubic();
    CellOperator op(cfg.problem, 64);
    NewtonOptions nopt;
    SteadyState st = find_steady_state(op, CellField::constant(1, 64, 0.6), nopt, 1e-4);
    // 0.6 is in the basin of the unstable root 0.3 for Newton: outside 0.6 +- 0.1
    CHECK(st.outside_guess_range);
}

TEST_CASE("modulated problem has a nonconstant upper state near 1") {
    LabConfig cfg = load_config_text(R"(
[problem]
dimension = 1
reaction = cubic 0.3
modulation = 0.05 cos 1 | 0 0 1
)");
    CellOperator op(cfg.problem, 96);
    NewtonOptions nopt;
    SteadyState pbar = find_steady_state(op, CellField::constant(1, 96, 1.0), nopt, 1e-4);
    CHECK(pbar.residual <= 1e-8);
    CHECK(pbar.values.max() - pbar.values.min() > 1e-3);
    CHECK(pbar.values.mean() == doctest::Approx(1.0).epsilon(0.05));
    CHECK(pbar.stability == Stability::Stable);
}

TEST_CASE("enumeration: homogeneous cubic has stable states 0 and 1") {
    LabConfig cfg = homogeneous_cubic();
    CellOperator op(cfg.problem, 50);
    StateLattice lat = enumerate_stable_states(op, cfg.run);
    REQUIRE(lat.stable_ids.size() == 2);
    CHECK(lat.zero().values.mean() == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(lat.pbar().values.mean() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(lat.totally_ordered);
}

TEST_CASE("enumeration: symmetric quintic finds the full ladder") {
    LabConfig cfg = quintic_sym();
    CellOperator op(cfg.problem, 50);
    StateLattice lat = enumerate_stable_states(op, cfg.run);
    REQUIRE(lat.stable_ids.size() == 3);
    std::vector<double> stable_means;
    for (int id : lat.stable_ids) stable_means.push_back(lat.state(id).values.mean());
    CHECK(stable_means[0] == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(stable_means[1] == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(stable_means[2] == doctest::Approx(1.0).epsilon(1e-8));

    std::vector<double> unstable_means;
    for (const auto& st : lat.states)
        if (st.stability == Stability::Unstable) unstable_means.push_back(st.values.mean());
    REQUIRE(unstable_means.size() == 2);
    CHECK(unstable_means[0] == doctest::Approx(0.2).epsilon(1e-6));
    CHECK(unstable_means[1] == doctest::Approx(0.8).epsilon(1e-6));

    auto desc = lat.stable_descending();
    CHECK(desc.front() == lat.pbar_id);
    CHECK(desc.back() == lat.zero_id);
}

TEST_CASE("restrict_lattice keeps the sub-ladder") {
    LabConfig cfg = quintic_sym();
    CellOperator op(cfg.problem, 50);
    StateLattice lat = enumerate_stable_states(op, cfg.run);
    int middle = lat.stable_ids[1];
    auto [sub, orig] = restrict_lattice(lat, middle, cfg.run.dedup_tol);
    CHECK(sub.stable_ids.size() == 2);
    CHECK(sub.pbar().values.mean() == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(orig[sub.pbar_id] == middle);
}

TEST_CASE("small perturbations along the eigenfunction relax back to the state") {
    LabConfig cfg = quintic_sym();
    const int n = 50;
    CellOperator op(cfg.problem, n);
    NewtonOptions nopt;
    SteadyState p = find_steady_state(op, CellField::constant(1, n, 0.5), nopt, 1e-4);
    REQUIRE(p.stability == Stability::Stable);

    Domain1D dom{0.0, n, 1.0 / n, Boundary::Periodic};
    double dt = cfg.run.relaxation_dt(cfg.problem, -0.1, 1.1);
    for (double sign : {1.0, -1.0}) {
        Stepper1D stepper(cfg.problem, dom, dt);
        Field f;
        f.values.resize(n);
        for (int i = 0; i < n; ++i)
            f.values[i] = p.values.values[i] + sign * 0.01 * p.eigenfunction.values[i];
        for (int s = 0; s < static_cast<int>(1200.0 / dt); ++s) stepper.step(f);
        double dist = 0.0;
        for (int i = 0; i < n; ++i)
            dist = std::max(dist, std::abs(f.values[i] - p.values.values[i]));
        CHECK(dist <= 1e-4);
    }
}
