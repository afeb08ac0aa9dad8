#include "terracelab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace terracelab {

double chi_cutoff(double z) {
    if (z <= -1.0) return 0.0;
    if (z >= 1.0) return 1.0;
    double s = 0.5 * (z + 1.0);
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

double chi_cutoff_prime(double z) {
    if (z <= -1.0 || z >= 1.0) return 0.0;
    double s = 0.5 * (z + 1.0);
    return 15.0 * s * s * (1.0 - s) * (1.0 - s);
}

// ---------------------------------------------------------------------------
// spreading runs

ShapePolygon MeasuredShape::outline() const {
    ShapePolygon p;
    for (std::size_t i = 0; i < angles.size(); ++i)
        p.vertices.push_back({radii[i] * std::cos(angles[i]), radii[i] * std::sin(angles[i])});
    p.contains_origin = true;
    return p;
}

double MeasuredShape::radius_at(double angle) const {
    const double two_pi = 2.0 * std::numbers::pi;
    double a = std::fmod(angle, two_pi);
    if (a < 0) a += two_pi;
    const std::size_t n = angles.size();
    double bin = a / (two_pi / n) - 0.5;
    double lo = std::floor(bin);
    double w = bin - lo;
    std::size_t i0 = (static_cast<std::size_t>(static_cast<long>(lo) % long(n) + n)) % n;
    std::size_t i1 = (i0 + 1) % n;
    return (1.0 - w) * radii[i0] + w * radii[i1];
}

std::vector<std::array<double, 2>> contour_points(const std::vector<double>& values,
                                                  const Domain2D& dom, double level) {
    std::vector<std::array<double, 2>> pts;
    auto v = [&](int i, int j) { return values[dom.idx(i, j)]; };
    for (int j = 0; j < dom.ny - 1; ++j) {
        for (int i = 0; i < dom.nx - 1; ++i) {
            double a = v(i, j), b = v(i + 1, j), c = v(i, j + 1);
            // horizontal edge
            if ((a - level) * (b - level) < 0.0) {
                double t = (a - level) / (a - b);
                pts.push_back({dom.x(i) + t * dom.dx, dom.y(j)});
            }
            // vertical edge
            if ((a - level) * (c - level) < 0.0) {
                double t = (a - level) / (a - c);
                pts.push_back({dom.x(i), dom.y(j) + t * dom.dx});
            }
        }
    }
    return pts;
}

namespace {

MeasuredShape bin_contour(const std::vector<std::array<double, 2>>& pts, double t,
                          int bins) {
    MeasuredShape shape;
    shape.time = t;
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> sum(bins, 0.0);
    std::vector<int> count(bins, 0);
    for (const auto& p : pts) {
        double ang = std::atan2(p[1], p[0]);
        if (ang < 0) ang += two_pi;
        int b = std::min(bins - 1, static_cast<int>(ang / (two_pi / bins)));
        sum[b] += std::hypot(p[0], p[1]);
        ++count[b];
    }
    shape.angles.resize(bins);
    shape.radii.resize(bins);
    for (int b = 0; b < bins; ++b) shape.angles[b] = (b + 0.5) * two_pi / bins;
    // fill empty bins by circular interpolation
    int last_filled = -1;
    for (int b = 0; b < bins; ++b)
        if (count[b] > 0) last_filled = b;
    if (last_filled < 0) throw ResourceFailure("contour produced no points");
    for (int b = 0; b < bins; ++b)
        shape.radii[b] = count[b] > 0 ? sum[b] / count[b] : -1.0;
    for (int b = 0; b < bins; ++b) {
        if (shape.radii[b] >= 0.0) continue;
        int prev = b, next = b;
        while (shape.radii[prev] < 0.0) prev = (prev + bins - 1) % bins;
        while (shape.radii[next] < 0.0) next = (next + 1) % bins;
        shape.radii[b] = 0.5 * (shape.radii[prev] + shape.radii[next]);
    }
    for (auto& r : shape.radii) r /= t;
    shape.area = shape.outline().area();
    return shape;
}

}  // namespace

SpreadingResult spreading_run(const FrontContext& ctx, const StateLattice& lattice,
                              const SpreadingOptions& opt) {
    const PeriodicProblem& prob = ctx.prob;
    if (prob.dimension() != 2) throw ConfigError("spreading_run needs a 2D problem");
    if (opt.times.empty()) throw ConfigError("spreading_run: no output times");

    const int ppp = ctx.grid.points_per_period;
    const double dx = ctx.grid.dx();
    Domain2D dom;
    dom.dx = dx;
    dom.nx = ctx.grid.extent_periods * ppp;
    dom.ny = ctx.grid.extent_periods * ppp;
    dom.x0 = -std::floor(0.5 * ctx.grid.extent_periods);
    dom.y0 = dom.x0;
    dom.bc_x = Boundary::Clamped;
    dom.bc_y = Boundary::Clamped;

    const CellField& pbar = lattice.pbar().values;
    const CellField& zero = lattice.zero().values;

    Field u0;
    u0.values.resize(dom.size());
    EvolveOptions eopt;
    eopt.lower_bound.resize(dom.size());
    eopt.upper_bound.resize(dom.size());
    for (int j = 0; j < dom.ny; ++j) {
        for (int i = 0; i < dom.nx; ++i) {
            double x = dom.x(i), y = dom.y(j);
            std::size_t k = dom.idx(i, j);
            bool inside = x * x + y * y <= opt.r0 * opt.r0;
            u0.values[k] = inside ? pbar.value_at(x, y) : zero.value_at(x, y);
            eopt.lower_bound[k] = zero.value_at(x, y);
            eopt.upper_bound[k] = pbar.value_at(x, y);
        }
    }

    const double horizon = *std::max_element(opt.times.begin(), opt.times.end());
    eopt.horizon = horizon;
    eopt.eps_overshoot = ctx.run.eps_overshoot;
    const double dt =
        ctx.run.measurement_dt(prob, dx, zero.min() - 0.1, pbar.max() + 0.1);

    Stepper2D stepper(prob, dom, dt);
    {
        std::vector<double> l(dom.ny), r(dom.ny), b(dom.nx), t(dom.nx);
        for (int j = 0; j < dom.ny; ++j) {
            l[j] = zero.value_at(dom.x(-1), dom.y(j));
            r[j] = zero.value_at(dom.x(dom.nx), dom.y(j));
        }
        for (int i = 0; i < dom.nx; ++i) {
            b[i] = zero.value_at(dom.x(i), dom.y(-1));
            t[i] = zero.value_at(dom.x(i), dom.y(dom.ny));
        }
        stepper.set_clamp(std::move(l), std::move(r), std::move(b), std::move(t));
    }

    std::vector<int> chain = lattice.stable_descending();
    SpreadingResult result;
    result.times = opt.times;
    result.shapes.resize(opt.times.size());

    const std::size_t center = dom.idx(dom.nx / 2, dom.ny / 2);
    const double pbar_center = eopt.upper_bound[center];
    double invasion_run_start = -1.0;
    const double margin = ctx.run.boundary_margin;

    std::vector<int> step_of_time;
    for (double t : opt.times)
        step_of_time.push_back(static_cast<int>(std::lround(t / dt)));

    Observer obs{1, [&](int step, double t, const std::vector<double>& u) {
        if (std::abs(u[center] - pbar_center) <= opt.invasion_tol) {
            if (invasion_run_start < 0.0) invasion_run_start = t;
            if (!result.invasion &&
                t - invasion_run_start >= opt.invasion_fraction * horizon) {
                result.invasion = true;
                result.invasion_time = t;
            }
        } else {
            invasion_run_start = -1.0;
        }
        for (std::size_t ti = 0; ti < step_of_time.size(); ++ti) {
            if (step != step_of_time[ti]) continue;
            for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
                double level = 0.5 * (lattice.state(chain[k]).values.mean() +
                                      lattice.state(chain[k + 1]).values.mean());
                auto pts = contour_points(u, dom, level);
                if (pts.empty()) continue;  // front not yet separated from datum
                for (const auto& p : pts) {
                    if (p[0] < dom.x0 + margin || p[0] > dom.x(dom.nx - 1) - margin ||
                        p[1] < dom.y0 + margin || p[1] > dom.y(dom.ny - 1) - margin)
                        throw ResourceFailure(
                            "spreading_run: contour reached the boundary margin");
                }
                MeasuredShape shape = bin_contour(pts, t, opt.angle_bins);
                shape.upper_id = chain[k];
                shape.lower_id = chain[k + 1];
                shape.level = level;
                result.shapes[ti].push_back(std::move(shape));
            }
        }
    }};

    evolve(stepper, std::move(u0), eopt, {obs});

    if (!result.invasion)
        throw ResourceFailure(
            "spreading_run: no invasion detected; the datum is too small (r0 = " +
            std::to_string(opt.r0) + ")");
    return result;
}

ShapeMatchReport shape_match(const MeasuredShape& measured, const ShapePolygon& predicted,
                             double eps) {
    ShapeMatchReport rep;
    rep.eps = eps;

    ShapePolygon grown = scale_polygon(predicted, 1.0 + eps);
    rep.upper_ok = true;
    for (std::size_t i = 0; i < measured.angles.size(); ++i) {
        double x = measured.radii[i] * std::cos(measured.angles[i]);
        double y = measured.radii[i] * std::sin(measured.angles[i]);
        if (!grown.contains(x, y, 1e-9)) rep.upper_ok = false;
    }

    ShapePolygon shrunk = scale_polygon(predicted, 1.0 - eps);
    rep.lower_ok = true;
    for (const auto& v : shrunk.vertices) {
        double ang = std::atan2(v[1], v[0]);
        double r = std::hypot(v[0], v[1]);
        if (r > measured.radius_at(ang)) rep.lower_ok = false;
    }
    // also sample shrunk edges
    const std::size_t n = shrunk.vertices.size();
    for (std::size_t i = 0; i < n && rep.lower_ok; ++i) {
        const auto& a = shrunk.vertices[i];
        const auto& b = shrunk.vertices[(i + 1) % n];
        for (int k = 1; k < 8; ++k) {
            double t = k / 8.0;
            double x = a[0] + t * (b[0] - a[0]), y = a[1] + t * (b[1] - a[1]);
            if (std::hypot(x, y) > measured.radius_at(std::atan2(y, x))) rep.lower_ok = false;
        }
    }

    rep.hausdorff = polygon_hausdorff(measured.outline(), predicted);
    return rep;
}

// ---------------------------------------------------------------------------
// perturbation residual

PerturbationReport perturbation_residual(const CellOperator& op, const SteadyState& p,
                                         const std::vector<double>& t_grid, double disc_err,
                                         double delta_min) {
    if (p.stability != Stability::Stable)
        throw ConfigError("perturbation_residual: state is not stable");
    PerturbationReport rep;
    rep.disc_err = disc_err;

    const auto& phi = p.eigenfunction.values;
    const auto& pv = p.values.values;
    std::vector<double> diff_p, diff_phi;
    op.apply_diffusion(pv, diff_p);
    op.apply_diffusion(phi, diff_phi);

    auto side_margin = [&](double delta, double eta, double sigma, bool super,
                           std::string* where) {
        // u = p +- eta phi e^{-sigma t}
        double worst = std::numeric_limits<double>::infinity();
        for (double t : t_grid) {
            double decay = std::exp(-sigma * t);
            for (std::size_t k = 0; k < pv.size(); ++k) {
                double amp = eta * phi[k] * decay;
                double u = super ? pv[k] + amp : pv[k] - amp;
                double dt_u = super ? -sigma * amp : sigma * amp;
                double lap = diff_p[k] + (super ? 1.0 : -1.0) * eta * decay * diff_phi[k];
                double f = op.problem().reaction_value(op.node(k), u);
                double residual = dt_u - lap - f;
                double required = delta * eta * decay;
                // supersolution wants residual >= required, subsolution <= -required
                double margin = super ? residual - required : -residual - required;
                if (margin < worst) {
                    worst = margin;
                    if (where) {
                        std::ostringstream os;
                        os << (super ? "super" : "sub") << " t=" << t << " node=" << k
                           << " eta=" << eta << " sigma=" << sigma;
                        *where = os.str();
                    }
                }
            }
        }
        return worst;
    };

    for (double delta = 0.1; delta >= delta_min; delta *= 0.5) {
        double worst = std::numeric_limits<double>::infinity();
        std::string where;
        for (double eta : {delta, 0.5 * delta}) {
            for (double sigma : {delta, 0.25 * delta, 0.0}) {
                for (bool super : {true, false}) {
                    std::string w;
                    double m = side_margin(delta, eta, sigma, super, &w);
                    if (m < worst) {
                        worst = m;
                        where = w;
                    }
                }
            }
        }
        if (worst >= -disc_err) {
            rep.passed = true;
            rep.delta = delta;
            rep.margin = worst;
            rep.location = where;
            return rep;
        }
        rep.margin = worst;
        rep.location = where;
    }
    rep.notes.push_back("no admissible delta found down to " + std::to_string(delta_min));
    return rep;
}

// ---------------------------------------------------------------------------
// glued supersolution residual

namespace {

// Linear interpolation in z through a profile table row (slot fixed), state
// values outside the window.
struct ProfilePiece {
    const Profile* prof;
    const CellField* upper;
    const CellField* lower;

    double table_at(int slot, int kb) const {
        return prof->table[std::size_t(slot) * prof->mean.size() + kb];
    }

    double value(double x_lattice, int slot, double z) const {
        const int nz = static_cast<int>(prof->mean.size());
        double pos = (z - prof->z0) / prof->dz;
        int k0 = static_cast<int>(std::floor(pos));
        if (k0 < 0) return upper->value_at(x_lattice);
        if (k0 + 1 >= nz) return lower->value_at(x_lattice);
        double w = pos - k0;
        double v0 = table_at(slot, k0), v1 = table_at(slot, k0 + 1);
        if (std::isnan(v0) || std::isnan(v1))
            return !std::isnan(v0) ? v0 : (!std::isnan(v1) ? v1 : prof->mean[k0]);
        return (1.0 - w) * v0 + w * v1;
    }

    // centered slope, interpolated between bins (second order, matching the
    // spatial stencil)
    double slope(double, int slot, double z) const {
        const int nz = static_cast<int>(prof->mean.size());
        double pos = (z - prof->z0) / prof->dz;
        int k0 = static_cast<int>(std::floor(pos));
        if (k0 < 1 || k0 + 2 >= nz) return 0.0;
        double tm = table_at(slot, k0 - 1), t0 = table_at(slot, k0);
        double t1 = table_at(slot, k0 + 1), t2 = table_at(slot, k0 + 2);
        if (std::isnan(tm) || std::isnan(t0) || std::isnan(t1) || std::isnan(t2)) return 0.0;
        double s0 = (t1 - tm) / (2.0 * prof->dz);
        double s1 = (t2 - t0) / (2.0 * prof->dz);
        double w = pos - k0;
        return (1.0 - w) * s0 + w * s1;
    }
};

}  // namespace

GluedReport glued_supersolution_residual(const FrontContext& ctx, const Terrace& terr,
                                         const StateLattice& lattice,
                                         const GluedOptions& opt) {
    GluedReport rep;
    const std::size_t K = terr.num_fronts();
    if (K == 0) throw ConfigError("glued residual: empty terrace");
    for (const auto& f : terr.fronts)
        if (!f.flags.profile_extracted)
            throw ConfigError("glued residual: front lacks an extracted profile");

    const PeriodicProblem& prob = ctx.prob;
    const int ppp = ctx.grid.points_per_period;
    const double dx = ctx.grid.dx();

    // speeds c_k + eps_k with eps_k strictly increasing, amplitudes eta_k increasing
    std::vector<double> ctil(K), eta(K), zeta(K);
    for (std::size_t k = 0; k < K; ++k) {
        ctil[k] = terr.fronts[k].speed.value + opt.eps * (1.0 + 0.1 * k);
        eta[k] = opt.eta * (1.0 + 0.1 * k);
        zeta[k] = static_cast<double>(k) * opt.separation;
    }

    // line domain covering all pieces over the whole time span
    double span = opt.t_span;
    if (span <= 0.0) {
        double cmax = 1e-3;
        for (double c : ctil) cmax = std::max(cmax, std::abs(c));
        span = 1.0 / cmax;
    }
    double halfwidth = terr.fronts[0].profile.empty()
                           ? 10.0
                           : -terr.fronts[0].profile.z0;
    int extent = opt.extent_periods;
    if (extent == 0) {
        double reach = zeta[K - 1] + halfwidth + 4.0;
        for (double c : ctil) reach = std::max(reach, zeta[K - 1] + std::abs(c) * span + halfwidth + 4.0);
        extent = static_cast<int>(std::ceil(2.0 * reach));
    }
    const int n = extent * ppp;
    const double x0 = -std::floor(extent / 2.0);

    // midpoint diffusion coefficients on the line
    std::vector<double> amid(n + 1);
    for (int i = 0; i <= n; ++i)
        amid[i] = prob.diffusion_xx({x0 + (i - 0.5) * dx, 0.0});

    std::vector<ProfilePiece> pieces(K);
    std::vector<const CellField*> phis(K + 1);
    for (std::size_t k = 0; k < K; ++k) {
        pieces[k].prof = &terr.fronts[k].profile;
        pieces[k].upper = &lattice.state(terr.fronts[k].upper_id).values;
        pieces[k].lower = &lattice.state(terr.fronts[k].lower_id).values;
    }
    for (std::size_t k = 0; k <= K; ++k)
        phis[k] = &lattice.state(terr.platform_ids[k]).eigenfunction;

    auto piece_value = [&](std::size_t k, double t, int i) {
        double x = x0 + i * dx;
        double z = x - ctil[k] * t - zeta[k];
        int slot = ((i % ppp) + ppp) % ppp;
        double u = pieces[k].value(x, slot, z);
        double psi = (1.0 - chi_cutoff(z)) * phis[k]->value_at(x) +
                     chi_cutoff(z) * phis[k + 1]->value_at(x);
        return u + eta[k] * psi;
    };
    auto piece_dt = [&](std::size_t k, double t, int i) {
        double x = x0 + i * dx;
        double z = x - ctil[k] * t - zeta[k];
        int slot = ((i % ppp) + ppp) % ppp;
        double du = pieces[k].slope(x, slot, z);
        double dpsi = chi_cutoff_prime(z) * (phis[k + 1]->value_at(x) - phis[k]->value_at(x));
        return -ctil[k] * (du + eta[k] * dpsi);
    };

    rep.min_residual = std::numeric_limits<double>::infinity();
    rep.max_glue_jump = 0.0;
    rep.switch_in_band = true;

    std::vector<double> w(n);
    for (int ts = 0; ts <= opt.t_samples; ++ts) {
        double t = span * ts / opt.t_samples;
        for (std::size_t k = 0; k < K; ++k) {
            for (int i = 0; i < n; ++i) w[i] = piece_value(k, t, i);
            for (int i = 1; i + 1 < n; ++i) {
                double lap = (amid[i + 1] * (w[i + 1] - w[i]) - amid[i] * (w[i] - w[i - 1])) /
                             (dx * dx);
                double x = x0 + i * dx;
                double f = prob.reaction_value({x, 0.0}, w[i]);
                double residual = piece_dt(k, t, i) - lap - f;
                if (residual < rep.min_residual) {
                    rep.min_residual = residual;
                    std::ostringstream os;
                    os << "piece " << k << " t=" << t << " x=" << x;
                    rep.location = os.str();
                }
            }
        }

        // switch loci of the min-glued composite between consecutive pieces
        for (std::size_t k = 0; k + 1 < K; ++k) {
            double prev_diff = 0.0;
            bool found = false;
            for (int i = 1; i + 1 < n; ++i) {
                double a = piece_value(k, t, i);
                double b = piece_value(k + 1, t, i);
                double diff = a - b;
                if (i > 1 && prev_diff < 0.0 && diff >= 0.0) {
                    // pieces cross here; composite switches from k to k+1
                    found = true;
                    double jump = std::abs(diff - prev_diff);
                    rep.max_glue_jump = std::max(rep.max_glue_jump, jump);
                    double x = x0 + i * dx;
                    double qk = lattice.state(terr.platform_ids[k + 1]).values.value_at(x);
                    double qkm1 = lattice.state(terr.platform_ids[k]).values.value_at(x);
                    double v = 0.5 * (a + b);
                    if (!(v > qk && v < qkm1)) rep.switch_in_band = false;
                    if (!(v < qk + 5.0 * eta[k + 1] + 1e-6)) rep.switch_in_band = false;
                }
                prev_diff = diff;
            }
            if (!found) rep.notes.push_back("no switch locus found between pieces " +
                                            std::to_string(k) + " and " + std::to_string(k + 1));
        }
    }

    rep.glue_continuous = rep.max_glue_jump <= 10.0 * opt.eta + 1e-3;
    rep.passed = rep.min_residual >= -opt.disc_err && rep.switch_in_band;
    return rep;
}

double calibrate_disc_constant(const FrontContext& ctx, const Terrace& single_front,
                               const StateLattice& lattice) {
    if (single_front.num_fronts() != 1)
        throw ConfigError("calibration expects a single-front terrace");
    GluedOptions opt;
    opt.eps = 0.0;
    opt.eta = 0.0;
    opt.disc_err = std::numeric_limits<double>::infinity();
    GluedReport rep = glued_supersolution_residual(ctx, single_front, lattice, opt);
    const double dx = ctx.grid.dx();
    const double dt = ctx.run.measurement_dt(ctx.prob, dx, -0.1, 1.1);
    return std::abs(rep.min_residual) / (dx * dx + dt);
}

}  // namespace terracelab
