#include "terracelab/spectral.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "terracelab/evolve.hpp"

namespace terracelab {

std::string to_string(Stability s) {
    switch (s) {
        case Stability::Stable: return "stable";
        case Stability::Unstable: return "unstable";
        default: return "marginal";
    }
}

Stability classify_stability(double lambda, double tol_marginal) {
    if (lambda < -tol_marginal) return Stability::Stable;
    if (lambda > tol_marginal) return Stability::Unstable;
    return Stability::Marginal;
}

// ---------------------------------------------------------------------------
// CellOperator

CellOperator::CellOperator(const PeriodicProblem& prob, int points_per_period)
    : prob_(prob), n_(points_per_period) {
    const double dx = this->dx();
    const double inv2 = 1.0 / (dx * dx);
    if (dim() == 1) {
        ax_.resize(n_);
        for (int i = 0; i < n_; ++i)
            ax_[i] = prob.diffusion_xx({(i + 0.5) * dx, 0.0}) * inv2;
    } else {
        ax_.resize(size());
        ay_.resize(size());
        for (int j = 0; j < n_; ++j) {
            for (int i = 0; i < n_; ++i) {
                std::size_t k = std::size_t(j) * n_ + i;
                ax_[k] = prob.diffusion_xx({(i + 0.5) * dx, j * dx}) * inv2;
                ay_[k] = prob.diffusion_yy({i * dx, (j + 0.5) * dx}) * inv2;
            }
        }
    }
}

Point CellOperator::node(std::size_t k) const {
    const double dx = this->dx();
    if (dim() == 1) return {static_cast<double>(k) * dx, 0.0};
    return {static_cast<double>(k % n_) * dx, static_cast<double>(k / n_) * dx};
}

void CellOperator::apply_diffusion(const std::vector<double>& u,
                                   std::vector<double>& out) const {
    out.resize(u.size());
    if (dim() == 1) {
        for (int i = 0; i < n_; ++i) {
            int im = (i + n_ - 1) % n_, ip = (i + 1) % n_;
            out[i] = ax_[i] * (u[ip] - u[i]) - ax_[im] * (u[i] - u[im]);
        }
    } else {
        for (int j = 0; j < n_; ++j) {
            int jm = (j + n_ - 1) % n_, jp = (j + 1) % n_;
            for (int i = 0; i < n_; ++i) {
                int im = (i + n_ - 1) % n_, ip = (i + 1) % n_;
                std::size_t k = std::size_t(j) * n_ + i;
                std::size_t kim = std::size_t(j) * n_ + im;
                std::size_t kip = std::size_t(j) * n_ + ip;
                std::size_t kjm = std::size_t(jm) * n_ + i;
                std::size_t kjp = std::size_t(jp) * n_ + i;
                out[k] = ax_[k] * (u[kip] - u[k]) - ax_[kim] * (u[k] - u[kim]) +
                         ay_[k] * (u[kjp] - u[k]) - ay_[kjm] * (u[k] - u[kjm]);
            }
        }
    }
}

std::vector<double> CellOperator::steady_residual(const CellField& p) const {
    std::vector<double> r;
    apply_diffusion(p.values, r);
    for (std::size_t k = 0; k < r.size(); ++k)
        r[k] += prob_.reaction_value(node(k), p.values[k]);
    return r;
}

Eigen::SparseMatrix<double> CellOperator::assemble(const std::vector<double>& potential) const {
    const std::size_t sz = size();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(sz * (dim() == 1 ? 3 : 5));
    if (dim() == 1) {
        for (int i = 0; i < n_; ++i) {
            int im = (i + n_ - 1) % n_, ip = (i + 1) % n_;
            trips.emplace_back(i, i, -(ax_[i] + ax_[im]) + potential[i]);
            trips.emplace_back(i, ip, ax_[i]);
            trips.emplace_back(i, im, ax_[im]);
        }
    } else {
        for (int j = 0; j < n_; ++j) {
            int jm = (j + n_ - 1) % n_, jp = (j + 1) % n_;
            for (int i = 0; i < n_; ++i) {
                int im = (i + n_ - 1) % n_, ip = (i + 1) % n_;
                int k = j * n_ + i;
                double aim = ax_[std::size_t(j) * n_ + im];
                double ajm = ay_[std::size_t(jm) * n_ + i];
                trips.emplace_back(k, k, -(ax_[k] + aim + ay_[k] + ajm) + potential[k]);
                trips.emplace_back(k, j * n_ + ip, ax_[k]);
                trips.emplace_back(k, j * n_ + im, aim);
                trips.emplace_back(k, jp * n_ + i, ay_[k]);
                trips.emplace_back(k, jm * n_ + i, ajm);
            }
        }
    }
    Eigen::SparseMatrix<double> m(static_cast<int>(sz), static_cast<int>(sz));
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

std::vector<double> CellOperator::linearization_potential(const CellField& p) const {
    std::vector<double> q(size());
    for (std::size_t k = 0; k < q.size(); ++k)
        q[k] = prob_.reaction_deriv(node(k), p.values[k]);
    return q;
}

// ---------------------------------------------------------------------------
// principal eigenpair

EigenPair principal_eigenpair(const CellOperator& op, const std::vector<double>& potential,
                              double tol, int max_iters) {
    const std::size_t sz = op.size();
    double qmax = *std::max_element(potential.begin(), potential.end());
    const double shift = qmax + 1.0;  // above the principal eigenvalue

    Eigen::SparseMatrix<double> L = op.assemble(potential);
    Eigen::SparseMatrix<double> M(static_cast<int>(sz), static_cast<int>(sz));
    M.setIdentity();
    M = (M * shift - L).eval();

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(M);
    if (lu.info() != Eigen::Success)
        throw NumericalDiagnostic("principal_eigenpair: factorization failed");

    Eigen::VectorXd v = Eigen::VectorXd::Constant(static_cast<int>(sz), 1.0);
    EigenPair pair;
    double lambda = 0.0;
    for (int it = 1; it <= max_iters; ++it) {
        Eigen::VectorXd w = lu.solve(v);
        w /= w.norm();
        Eigen::VectorXd Lw = L * w;
        lambda = w.dot(Lw);
        double res = (Lw - lambda * w).lpNorm<Eigen::Infinity>() / w.lpNorm<Eigen::Infinity>();
        pair.iterations = it;
        v = w;
        if (res <= tol) break;
    }

    // orient and normalize to max = 1
    double vmax = v.maxCoeff(), vmin = v.minCoeff();
    if (std::abs(vmin) > std::abs(vmax)) v = -v;
    v /= v.maxCoeff();
    if (v.minCoeff() <= 0.0)
        throw NumericalDiagnostic("principal_eigenpair: eigenfunction changes sign");

    Eigen::VectorXd Lv = L * v;
    pair.lambda = v.dot(Lv) / v.dot(v);
    pair.residual = (Lv - pair.lambda * v).lpNorm<Eigen::Infinity>();

    pair.eigenfunction.dim = op.dim();
    pair.eigenfunction.n = op.n();
    pair.eigenfunction.values.assign(v.data(), v.data() + v.size());
    return pair;
}

EigenPair principal_eigenpair(const CellOperator& op, const CellField& p) {
    return principal_eigenpair(op, op.linearization_potential(p));
}

// ---------------------------------------------------------------------------
// Newton

namespace {

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

SteadyState find_steady_state(const CellOperator& op, const CellField& guess,
                              const NewtonOptions& opt, double tol_marginal) {
    CellField p = guess;
    std::vector<double> r = op.steady_residual(p);
    double rn = max_abs(r);
    const double guess_lo = guess.min() - opt.guess_margin;
    const double guess_hi = guess.max() + opt.guess_margin;

    int it = 0;
    while (rn > opt.steady_tol && it < opt.max_iters) {
        ++it;
        auto q = op.linearization_potential(p);
        Eigen::SparseMatrix<double> J = op.assemble(q);
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(J);
        if (lu.info() != Eigen::Success)
            throw ResourceFailure("find_steady_state: singular Jacobian");
        Eigen::Map<const Eigen::VectorXd> rv(r.data(), static_cast<int>(r.size()));
        Eigen::VectorXd delta = lu.solve(-rv);

        double alpha = 1.0;
        CellField trial = p;
        double trial_rn = rn;
        while (alpha >= 1.0 / 1024.0) {
            for (std::size_t k = 0; k < p.values.size(); ++k)
                trial.values[k] = p.values[k] + alpha * delta[static_cast<int>(k)];
            auto tr = op.steady_residual(trial);
            trial_rn = max_abs(tr);
            if (trial_rn < rn * (1.0 - 0.25 * alpha) || trial_rn < opt.steady_tol) {
                p = trial;
                r = std::move(tr);
                rn = trial_rn;
                break;
            }
            alpha *= 0.5;
        }
        if (alpha < 1.0 / 1024.0)
            throw ResourceFailure("find_steady_state: Newton stalled, residual " +
                                  std::to_string(rn));
    }
    if (rn > opt.steady_tol)
        throw ResourceFailure("find_steady_state: no convergence after " +
                              std::to_string(opt.max_iters) + " iterations");

    SteadyState st;
    st.values = std::move(p);
    st.residual = rn;
    st.outside_guess_range = st.values.min() < guess_lo || st.values.max() > guess_hi;
    EigenPair pair = principal_eigenpair(op, st.values);
    st.lambda = pair.lambda;
    st.eigenfunction = std::move(pair.eigenfunction);
    st.stability = classify_stability(st.lambda, tol_marginal);
    return st;
}

// ---------------------------------------------------------------------------
// enumeration

std::vector<int> StateLattice::stable_descending() const {
    std::vector<int> out(stable_ids.rbegin(), stable_ids.rend());
    return out;
}

namespace {

/// Relax a constant level on the periodic cell until nearly stationary.
CellField relax_probe(const CellOperator& op, const RunSpec& run, double level,
                      const EnumerateOptions& eopt) {
    const PeriodicProblem& prob = op.problem();
    const int n = op.n();
    double dt = run.relaxation_dt(prob, -0.2, 1.4);
    Field f;
    f.values.assign(op.size(), level);

    if (op.dim() == 1) {
        Domain1D dom{0.0, n, op.dx(), Boundary::Periodic};
        Stepper1D stepper(prob, dom, dt);
        int steps = static_cast<int>(std::ceil(eopt.relax_horizon / dt));
        std::vector<double> prev;
        for (int s = 0; s < steps; ++s) {
            prev = f.values;
            stepper.step(f);
            if (s % 32 == 31) {
                double change = 0.0;
                for (std::size_t k = 0; k < prev.size(); ++k)
                    change = std::max(change, std::abs(f.values[k] - prev[k]));
                if (change / dt < eopt.settle_tol) break;
            }
        }
    } else {
        Domain2D dom{0.0, 0.0, n, n, op.dx(), Boundary::Periodic, Boundary::Periodic};
        Stepper2D stepper(prob, dom, dt);
        int steps = static_cast<int>(std::ceil(eopt.relax_horizon / dt));
        std::vector<double> prev;
        for (int s = 0; s < steps; ++s) {
            prev = f.values;
            stepper.step(f);
            if (s % 32 == 31) {
                double change = 0.0;
                for (std::size_t k = 0; k < prev.size(); ++k)
                    change = std::max(change, std::abs(f.values[k] - prev[k]));
                if (change / dt < eopt.settle_tol) break;
            }
        }
    }
    CellField out;
    out.dim = op.dim();
    out.n = n;
    out.values = std::move(f.values);
    return out;
}

}  // namespace

StateLattice enumerate_stable_states(const CellOperator& op, const RunSpec& run,
                                     const EnumerateOptions& eopt) {
    std::vector<double> probes = eopt.probe_levels;
    if (probes.empty())
        for (int i = 0; i <= 20; ++i) probes.push_back(0.05 * i);

    NewtonOptions nopt;
    nopt.steady_tol = run.steady_tol;

    std::vector<SteadyState> found;
    auto try_add = [&](SteadyState&& st) {
        for (const auto& other : found)
            if (max_norm_distance(st.values, other.values) < run.dedup_tol) return;
        found.push_back(std::move(st));
    };

    for (double level : probes) {
        CellField c = CellField::constant(op.dim(), op.n(), level);
        // Newton straight from the constant catches unstable states too.
        try {
            try_add(find_steady_state(op, c, nopt, run.tol_marginal));
        } catch (const ResourceFailure&) {
            // probe did not polish; relaxation below may still land somewhere
        }
        try {
            CellField relaxed = relax_probe(op, run, level, eopt);
            try_add(find_steady_state(op, relaxed, nopt, run.tol_marginal));
        } catch (const ResourceFailure&) {
        }
    }

    if (found.empty()) throw ResourceFailure("enumerate_stable_states: nothing converged");

    std::sort(found.begin(), found.end(),
              [](const SteadyState& a, const SteadyState& b) {
                  return a.values.mean() < b.values.mean();
              });

    StateLattice lat;
    lat.states = std::move(found);
    for (std::size_t i = 0; i < lat.states.size(); ++i) {
        lat.states[i].id = static_cast<int>(i);
        if (lat.states[i].stability == Stability::Stable)
            lat.stable_ids.push_back(static_cast<int>(i));
    }
    if (lat.stable_ids.empty())
        throw NumericalDiagnostic("enumerate_stable_states: no stable states found");

    lat.totally_ordered = true;
    for (std::size_t a = 0; a < lat.stable_ids.size(); ++a) {
        for (std::size_t b = a + 1; b < lat.stable_ids.size(); ++b) {
            auto ord = compare_fields(lat.states[lat.stable_ids[a]].values,
                                      lat.states[lat.stable_ids[b]].values, run.dedup_tol);
            if (ord == Ordering::Intersecting) {
                lat.totally_ordered = false;
                lat.intersecting_pairs.emplace_back(lat.stable_ids[a], lat.stable_ids[b]);
            }
        }
    }
    lat.zero_id = lat.stable_ids.front();
    lat.pbar_id = lat.stable_ids.back();
    return lat;
}

std::pair<StateLattice, std::vector<int>> restrict_lattice(const StateLattice& lattice,
                                                           int top_id, double tol) {
    const CellField& top = lattice.state(top_id).values;
    StateLattice out;
    std::vector<int> orig;
    for (const auto& st : lattice.states) {
        auto ord = compare_fields(st.values, top, tol);
        if (ord != Ordering::Below && ord != Ordering::Equal) continue;
        out.states.push_back(st);
        orig.push_back(st.id);
    }
    for (std::size_t i = 0; i < out.states.size(); ++i) {
        out.states[i].id = static_cast<int>(i);
        if (out.states[i].stability == Stability::Stable)
            out.stable_ids.push_back(static_cast<int>(i));
    }
    if (out.stable_ids.empty())
        throw NumericalDiagnostic("restrict_lattice: no stable states below the top");
    out.totally_ordered = true;
    for (std::size_t a = 0; a < out.stable_ids.size(); ++a)
        for (std::size_t b = a + 1; b < out.stable_ids.size(); ++b)
            if (compare_fields(out.states[out.stable_ids[a]].values,
                               out.states[out.stable_ids[b]].values,
                               tol) == Ordering::Intersecting) {
                out.totally_ordered = false;
                out.intersecting_pairs.emplace_back(out.stable_ids[a], out.stable_ids[b]);
            }
    out.zero_id = out.stable_ids.front();
    out.pbar_id = out.stable_ids.back();
    return {out, orig};
}

}  // namespace terracelab
