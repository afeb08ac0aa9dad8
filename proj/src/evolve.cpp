#include "terracelab/evolve.hpp"

#include <cmath>
#include <numbers>

namespace terracelab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

// ---------------------------------------------------------------------------
// ReactionSampler

ReactionSampler::ReactionSampler(const ReactionSpec& spec, const std::vector<Point>& nodes)
    : spec_(&spec), modes_(spec.modulation.size()) {
    cos_factors_.resize(nodes.size() * modes_);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t m = 0; m < modes_; ++m) {
            const auto& mod = spec.modulation[m];
            cos_factors_[i * modes_ + m] =
                mod.amplitude * std::cos(kTwoPi * (mod.wavevector[0] * nodes[i].x +
                                                   mod.wavevector[1] * nodes[i].y) +
                                         mod.phase);
        }
    }
}

double ReactionSampler::value(std::size_t node, double u) const {
    double v = spec_->base.eval(u);
    for (std::size_t m = 0; m < modes_; ++m)
        v += cos_factors_[node * modes_ + m] * spec_->modulation[m].g.eval(u);
    return v;
}

double ReactionSampler::deriv(std::size_t node, double u) const {
    double v = spec_->base.deriv_eval(u);
    for (std::size_t m = 0; m < modes_; ++m)
        v += cos_factors_[node * modes_ + m] * spec_->modulation[m].g.deriv_eval(u);
    return v;
}

// ---------------------------------------------------------------------------
// Stepper1D

Stepper1D::Stepper1D(const PeriodicProblem& prob, const Domain1D& dom, double dt)
    : prob_(prob), dom_(dom), dt_(dt) {
    const int n = dom.n;
    sub_.assign(n, 0.0);
    diag_.assign(n, 0.0);
    sup_.assign(n, 0.0);
    work_.resize(n);
    const double r = dt / (dom.dx * dom.dx);
    auto a_mid = [&](int i) {  // diffusion at x_{i+1/2}
        return prob.diffusion_xx({dom.x(i) + 0.5 * dom.dx, 0.0});
    };
    for (int i = 0; i < n; ++i) {
        double am = a_mid(i - 1), ap = a_mid(i);
        diag_[i] = 1.0 + r * (am + ap);
        sub_[i] = -r * am;
        sup_[i] = -r * ap;
    }
    if (dom.bc == Boundary::Periodic) {
        corner_lo_ = sub_[0];
        corner_hi_ = sup_[n - 1];
        sub_[0] = 0.0;
        sup_[n - 1] = 0.0;
    } else {
        flux_left_ = r * a_mid(-1);
        flux_right_ = r * a_mid(n - 1);
        sub_[0] = 0.0;
        sup_[n - 1] = 0.0;
    }
    std::vector<Point> nodes(n);
    for (int i = 0; i < n; ++i) nodes[i] = {dom.x(i), 0.0};
    reaction_ = ReactionSampler(prob.reaction(), nodes);
    solver_.resize(n);
}

void Stepper1D::set_clamp(double left_ghost, double right_ghost) {
    clamp_left_ = left_ghost;
    clamp_right_ = right_ghost;
}

void Stepper1D::step(Field& f) {
    const int n = dom_.n;
    auto& u = f.values;
    for (int i = 0; i < n; ++i) work_[i] = u[i] + dt_ * reaction_.value(i, u[i]);
    if (dom_.bc == Boundary::Clamped) {
        work_[0] += flux_left_ * clamp_left_;
        work_[n - 1] += flux_right_ * clamp_right_;
        solver_.solve(sub_, diag_, sup_, work_);
    } else {
        solver_.solve_cyclic(sub_, diag_, sup_, corner_lo_, corner_hi_, work_);
    }
    u.swap(work_);
    f.time += dt_;
}

// ---------------------------------------------------------------------------
// Stepper2D

Stepper2D::Stepper2D(const PeriodicProblem& prob, const Domain2D& dom, double dt)
    : prob_(prob), dom_(dom), dt_(dt) {
    const int nx = dom.nx, ny = dom.ny;
    const double r = dt / (dom.dx * dom.dx);

    xsub_.assign(dom.size(), 0.0);
    xdiag_.assign(dom.size(), 0.0);
    xsup_.assign(dom.size(), 0.0);
    xcorn_lo_.assign(ny, 0.0);
    xcorn_hi_.assign(ny, 0.0);
    xflux_l_.assign(ny, 0.0);
    xflux_r_.assign(ny, 0.0);
    for (int j = 0; j < ny; ++j) {
        auto a_mid = [&](int i) {
            return prob.diffusion_xx({dom.x(i) + 0.5 * dom.dx, dom.y(j)});
        };
        for (int i = 0; i < nx; ++i) {
            double am = a_mid(i - 1), ap = a_mid(i);
            std::size_t k = dom.idx(i, j);
            xdiag_[k] = 1.0 + r * (am + ap);
            xsub_[k] = -r * am;
            xsup_[k] = -r * ap;
        }
        if (dom.bc_x == Boundary::Periodic) {
            xcorn_lo_[j] = xsub_[dom.idx(0, j)];
            xcorn_hi_[j] = xsup_[dom.idx(nx - 1, j)];
        } else {
            xflux_l_[j] = r * a_mid(-1);
            xflux_r_[j] = r * a_mid(nx - 1);
        }
        xsub_[dom.idx(0, j)] = 0.0;
        xsup_[dom.idx(nx - 1, j)] = 0.0;
    }

    ysub_.assign(dom.size(), 0.0);
    ydiag_.assign(dom.size(), 0.0);
    ysup_.assign(dom.size(), 0.0);
    ycorn_lo_.assign(nx, 0.0);
    ycorn_hi_.assign(nx, 0.0);
    yflux_b_.assign(nx, 0.0);
    yflux_t_.assign(nx, 0.0);
    for (int i = 0; i < nx; ++i) {
        auto a_mid = [&](int j) {
            return prob.diffusion_yy({dom.x(i), dom.y(j) + 0.5 * dom.dx});
        };
        for (int j = 0; j < ny; ++j) {
            double am = a_mid(j - 1), ap = a_mid(j);
            // column-major storage for the y sweeps
            std::size_t k = std::size_t(i) * ny + j;
            ydiag_[k] = 1.0 + r * (am + ap);
            ysub_[k] = -r * am;
            ysup_[k] = -r * ap;
        }
        std::size_t k0 = std::size_t(i) * ny;
        if (dom.bc_y == Boundary::Periodic) {
            ycorn_lo_[i] = ysub_[k0];
            ycorn_hi_[i] = ysup_[k0 + ny - 1];
        } else {
            yflux_b_[i] = r * a_mid(-1);
            yflux_t_[i] = r * a_mid(ny - 1);
        }
        ysub_[k0] = 0.0;
        ysup_[k0 + ny - 1] = 0.0;
    }

    std::vector<Point> nodes(dom.size());
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) nodes[dom.idx(i, j)] = {dom.x(i), dom.y(j)};
    reaction_ = ReactionSampler(prob.reaction(), nodes);
    work_.resize(dom.size());
    line_.resize(std::max(nx, ny));
    solver_.resize(std::max(nx, ny));
}

void Stepper2D::set_clamp(std::vector<double> left, std::vector<double> right,
                          std::vector<double> bottom, std::vector<double> top) {
    clamp_l_ = std::move(left);
    clamp_r_ = std::move(right);
    clamp_b_ = std::move(bottom);
    clamp_t_ = std::move(top);
}

void Stepper2D::step(Field& f) {
    const int nx = dom_.nx, ny = dom_.ny;
    auto& u = f.values;

    for (std::size_t k = 0; k < u.size(); ++k) work_[k] = u[k] + dt_ * reaction_.value(k, u[k]);

    // x sweeps
    std::vector<double> sub(nx), diag(nx), sup(nx), rhs(nx);
    for (int j = 0; j < ny; ++j) {
        std::size_t row = dom_.idx(0, j);
        for (int i = 0; i < nx; ++i) {
            sub[i] = xsub_[row + i];
            diag[i] = xdiag_[row + i];
            sup[i] = xsup_[row + i];
            rhs[i] = work_[row + i];
        }
        if (dom_.bc_x == Boundary::Clamped) {
            rhs[0] += xflux_l_[j] * clamp_l_[j];
            rhs[nx - 1] += xflux_r_[j] * clamp_r_[j];
            solver_.solve(sub, diag, sup, rhs);
        } else {
            solver_.solve_cyclic(sub, diag, sup, xcorn_lo_[j], xcorn_hi_[j], rhs);
        }
        for (int i = 0; i < nx; ++i) work_[row + i] = rhs[i];
    }

    // y sweeps
    sub.resize(ny);
    diag.resize(ny);
    sup.resize(ny);
    rhs.resize(ny);
    for (int i = 0; i < nx; ++i) {
        std::size_t col = std::size_t(i) * ny;
        for (int j = 0; j < ny; ++j) {
            sub[j] = ysub_[col + j];
            diag[j] = ydiag_[col + j];
            sup[j] = ysup_[col + j];
            rhs[j] = work_[dom_.idx(i, j)];
        }
        if (dom_.bc_y == Boundary::Clamped) {
            rhs[0] += yflux_b_[i] * clamp_b_[i];
            rhs[ny - 1] += yflux_t_[i] * clamp_t_[i];
            solver_.solve(sub, diag, sup, rhs);
        } else {
            solver_.solve_cyclic(sub, diag, sup, ycorn_lo_[i], ycorn_hi_[i], rhs);
        }
        for (int j = 0; j < ny; ++j) u[dom_.idx(i, j)] = rhs[j];
    }
    f.time += dt_;
}

// ---------------------------------------------------------------------------
// evolve

template <typename Stepper>
EvolveReport evolve(Stepper& stepper, Field u0, const EvolveOptions& opt,
                    const std::vector<Observer>& observers) {
    EvolveReport rep;
    Field f = std::move(u0);
    const double dt = stepper.dt();
    const int steps = static_cast<int>(std::ceil(opt.horizon / dt - 1e-12));
    const bool bounded = !opt.lower_bound.empty();

    for (const auto& obs : observers) obs.fn(0, f.time, f.values);

    for (int s = 1; s <= steps; ++s) {
        stepper.step(f);
        if (s % opt.check_cadence == 0 || s == steps) {
            double overshoot = 0.0;
            bool finite = true;
            for (std::size_t k = 0; k < f.values.size(); ++k) {
                double v = f.values[k];
                if (!std::isfinite(v)) {
                    finite = false;
                    break;
                }
                if (bounded) {
                    overshoot = std::max(overshoot, opt.lower_bound[k] - v);
                    overshoot = std::max(overshoot, v - opt.upper_bound[k]);
                }
            }
            if (!finite) {
                rep.aborted_nonfinite = true;
                throw NumericalDiagnostic("evolve: non-finite value at t=" +
                                          std::to_string(f.time));
            }
            rep.max_overshoot = std::max(rep.max_overshoot, overshoot);
            if (bounded && overshoot > opt.eps_overshoot)
                throw NumericalDiagnostic("evolve: left invariant region by " +
                                          std::to_string(overshoot));
        }
        for (const auto& obs : observers)
            if (s % obs.cadence == 0 || s == steps) obs.fn(s, f.time, f.values);
    }
    rep.steps = steps;
    rep.final = std::move(f);
    return rep;
}

template EvolveReport evolve<Stepper1D>(Stepper1D&, Field, const EvolveOptions&,
                                        const std::vector<Observer>&);
template EvolveReport evolve<Stepper2D>(Stepper2D&, Field, const EvolveOptions&,
                                        const std::vector<Observer>&);

ComparisonReport comparison_check(const PeriodicProblem& prob, const Domain1D& dom,
                                  const std::vector<double>& u0, const std::vector<double>& v0,
                                  double dt, double horizon, double tol) {
    Stepper1D su(prob, dom, dt), sv(prob, dom, dt);
    Field fu{u0, 0.0}, fv{v0, 0.0};
    ComparisonReport rep;
    const int steps = static_cast<int>(std::ceil(horizon / dt - 1e-12));
    for (int s = 0; s < steps; ++s) {
        su.step(fu);
        sv.step(fv);
        for (std::size_t i = 0; i < fu.values.size(); ++i)
            rep.max_violation = std::max(rep.max_violation, fu.values[i] - fv.values[i]);
    }
    rep.passed = rep.max_violation <= tol;
    return rep;
}

// ---------------------------------------------------------------------------
// field helpers

double max_norm_distance(const CellField& a, const CellField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

bool strictly_below(const CellField& a, const CellField& b) {
    for (std::size_t i = 0; i < a.values.size(); ++i)
        if (a.values[i] >= b.values[i]) return false;
    return true;
}

Ordering compare_fields(const CellField& a, const CellField& b, double tol) {
    bool below = true, above = true;
    double gap = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        double d = a.values[i] - b.values[i];
        gap = std::max(gap, std::abs(d));
        if (d > tol) below = false;
        if (d < -tol) above = false;
    }
    if (gap <= tol) return Ordering::Equal;
    if (below) return Ordering::Below;
    if (above) return Ordering::Above;
    return Ordering::Intersecting;
}

}  // namespace terracelab
