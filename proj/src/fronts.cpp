#include "terracelab/fronts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "terracelab/linalg.hpp"

namespace terracelab {

double Direction::norm() const { return std::sqrt(double(mx) * mx + double(my) * my); }

double Direction::lattice_period() const {
    int g = std::gcd(std::abs(mx), std::abs(my));
    if (g == 0) return 1.0;
    double px = mx / double(g), py = my / double(g);
    return std::sqrt(px * px + py * py);
}

std::string Direction::str() const {
    std::ostringstream os;
    os << "(" << mx << "," << my << ")";
    return os.str();
}

double combined_se(const SpeedEstimate& a, const SpeedEstimate& b) {
    return std::sqrt(a.se * a.se + b.se * b.se);
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Crossing of a decreasing trace with a level, linear interpolation between
// sample positions. NaN when the level is not bracketed inside the trace.
double crossing_position(const std::vector<double>& pos, const std::vector<double>& val,
                         double level) {
    int idx = -1;
    for (std::size_t m = 0; m < val.size(); ++m)
        if (val[m] >= level) idx = static_cast<int>(m);
    if (idx < 0 || idx + 1 >= static_cast<int>(val.size())) return kNaN;
    double v0 = val[idx], v1 = val[idx + 1];
    if (v0 == v1) return pos[idx];
    double w = (v0 - level) / (v0 - v1);
    return pos[idx] + w * (pos[idx + 1] - pos[idx]);
}

struct TrackSample {
    double t;
    std::vector<double> x;
};

struct Tracker {
    std::vector<double> levels;
    std::vector<TrackSample> samples;
    bool lost_level = false;

    void record(double t, const std::vector<double>& pos, const std::vector<double>& val) {
        TrackSample s;
        s.t = t;
        s.x.reserve(levels.size());
        for (double lv : levels) {
            double x = crossing_position(pos, val, lv);
            if (std::isnan(x)) lost_level = true;
            s.x.push_back(x);
        }
        samples.push_back(std::move(s));
    }

    LineFit window_fit(std::size_t li, double t_lo, double t_hi) const {
        std::vector<double> t, x;
        for (const auto& s : samples) {
            if (s.t < t_lo || s.t > t_hi || std::isnan(s.x[li])) continue;
            t.push_back(s.t);
            x.push_back(s.x[li]);
        }
        return fit_line(t, x);
    }

    // Serial correlation of the tracking residuals (pulsation wobble) makes the
    // OLS slope error optimistic; a block-wise slope spread is the honest scale.
    SpeedEstimate fit_level(std::size_t li, double t_lo, double t_hi) const {
        LineFit fit = window_fit(li, t_lo, t_hi);
        SpeedEstimate est;
        est.value = fit.slope;
        est.se = fit.slope_se;
        est.r2 = fit.r2;
        est.samples = fit.n;

        const int blocks = 8;
        std::vector<double> slopes;
        double span = (t_hi - t_lo) / blocks;
        for (int b = 0; b < blocks; ++b) {
            LineFit bf = window_fit(li, t_lo + b * span, t_lo + (b + 1) * span);
            if (bf.n >= 4) slopes.push_back(bf.slope);
        }
        if (slopes.size() >= 4) {
            double m = 0.0;
            for (double s : slopes) m += s;
            m /= slopes.size();
            double v = 0.0;
            for (double s : slopes) v += (s - m) * (s - m);
            v /= (slopes.size() - 1);
            est.se = std::max(est.se, std::sqrt(v / slopes.size()));
        }
        return est;
    }
};

// Cell means along the propagation coordinate s; cells are unit periods.
void cell_means_1d(const std::vector<double>& u, int ppp, bool reversed, double x0,
                   std::vector<double>& pos, std::vector<double>& val) {
    const int cells = static_cast<int>(u.size()) / ppp;
    pos.resize(cells);
    val.resize(cells);
    for (int m = 0; m < cells; ++m) {
        int mc = reversed ? cells - 1 - m : m;
        double acc = 0.0;
        for (int i = 0; i < ppp; ++i) acc += u[std::size_t(mc) * ppp + i];
        val[m] = acc / ppp;
        double center = x0 + mc + 0.5;
        pos[m] = reversed ? -center : center;
    }
}

// Means over one axis period times the full transverse width.
void cell_means_stripe(const std::vector<double>& u, const Domain2D& dom, int ppp, int axis,
                       bool reversed, std::vector<double>& pos, std::vector<double>& val) {
    const int n_along = axis == 0 ? dom.nx : dom.ny;
    const int n_trans = axis == 0 ? dom.ny : dom.nx;
    const int cells = n_along / ppp;
    pos.resize(cells);
    val.resize(cells);
    const double s_origin = axis == 0 ? dom.x0 : dom.y0;
    for (int m = 0; m < cells; ++m) {
        int mc = reversed ? cells - 1 - m : m;
        double acc = 0.0;
        for (int a = 0; a < ppp; ++a) {
            int i_along = mc * ppp + a;
            for (int tr = 0; tr < n_trans; ++tr) {
                std::size_t k = axis == 0 ? dom.idx(i_along, tr) : dom.idx(tr, i_along);
                acc += u[k];
            }
        }
        val[m] = acc / (double(ppp) * n_trans);
        double center = s_origin + mc + 0.5;
        pos[m] = reversed ? -center : center;
    }
}

double sample_bilinear(const std::vector<double>& u, const Domain2D& dom, double x, double y) {
    double fx = (x - dom.x0) / dom.dx, fy = (y - dom.y0) / dom.dx;
    int i = static_cast<int>(std::floor(fx)), j = static_cast<int>(std::floor(fy));
    i = std::clamp(i, 0, dom.nx - 2);
    j = std::clamp(j, 0, dom.ny - 2);
    double ax = fx - i, ay = fy - j;
    return (1 - ax) * (1 - ay) * u[dom.idx(i, j)] + ax * (1 - ay) * u[dom.idx(i + 1, j)] +
           (1 - ax) * ay * u[dom.idx(i, j + 1)] + ax * ay * u[dom.idx(i + 1, j + 1)];
}

// Moving-window mean along the center line in direction e; the window is the
// lattice period along e so the pulsating cell structure averages out.
void line_trace_means(const std::vector<double>& u, const Domain2D& dom, const Direction& dir,
                      std::vector<double>& pos, std::vector<double>& val) {
    const double ex = dir.ex(), ey = dir.ey();
    const double cx = dom.x0 + 0.5 * (dom.nx - 1) * dom.dx;
    const double cy = dom.y0 + 0.5 * (dom.ny - 1) * dom.dx;
    const double half_x = 0.5 * (dom.nx - 1) * dom.dx - dom.dx;
    const double half_y = 0.5 * (dom.ny - 1) * dom.dx - dom.dx;
    double s_max = std::numeric_limits<double>::infinity();
    if (std::abs(ex) > 1e-12) s_max = std::min(s_max, half_x / std::abs(ex));
    if (std::abs(ey) > 1e-12) s_max = std::min(s_max, half_y / std::abs(ey));
    const double ds = dom.dx;
    const int half = static_cast<int>(std::floor(s_max / ds));
    std::vector<double> raw_pos(2 * half + 1), raw_val(2 * half + 1);
    for (int k = -half; k <= half; ++k) {
        double s = k * ds;
        raw_pos[k + half] = s;
        raw_val[k + half] = sample_bilinear(u, dom, cx + s * ex, cy + s * ey);
    }
    const int win = std::max(1, static_cast<int>(std::lround(dir.lattice_period() / ds)));
    const int stride = std::max(1, win / 4);
    pos.clear();
    val.clear();
    for (std::size_t m = 0; m + win <= raw_val.size(); m += stride) {
        double acc = 0.0;
        for (int a = 0; a < win; ++a) acc += raw_val[m + a];
        pos.push_back(raw_pos[m] + 0.5 * win * ds);
        val.push_back(acc / win);
    }
}

// ---------------------------------------------------------------------------
// PlanarEngine: domain setup, datum, stepping and tracing shared by the speed
// measurement and the Cauchy observation.

struct PlanarEngine {
    const FrontContext& ctx;
    const FrontJob& job;
    int ppp;
    double dx;
    double dt = 0.0;
    bool reversed = false;
    int axis = 0;
    bool diagonal = false;
    std::optional<Domain1D> dom1;
    std::optional<Domain2D> dom2;
    std::optional<Stepper1D> st1;
    std::optional<Stepper2D> st2;
    EvolveOptions opt;
    Field u0;
    double s_min = 0.0, s_max = 0.0;

    PlanarEngine(const FrontContext& c, const FrontJob& j) : ctx(c), job(j) {
        const PeriodicProblem& prob = ctx.prob;
        const GridSpec& grid = ctx.grid;
        ppp = grid.points_per_period;
        dx = grid.dx();

        if (prob.dimension() == 1 && job.dir.my != 0)
            throw ConfigError("1D problems only admit directions (+-1, 0)");
        if (job.dir.mx == 0 && job.dir.my == 0)
            throw ConfigError("zero direction");
        if (std::abs(job.dir.mx) > 5 || std::abs(job.dir.my) > 5)
            throw ConfigError("direction components must be small integers (|m| <= 5)");

        const double lo_floor = std::min(job.lower.min(), job.upper.min());
        const double hi_ceil = std::max(job.lower.max(), job.upper.max());
        dt = ctx.run.measurement_dt(prob, dx, lo_floor - 0.1, hi_ceil + 0.1);

        const double frac =
            job.interface_fraction >= 0.0 ? job.interface_fraction : grid.interface_fraction;
        const double off = job.interface_offset_periods;
        opt.eps_overshoot = ctx.run.eps_overshoot;

        if (prob.dimension() == 1) {
            reversed = job.dir.mx < 0;
            Domain1D dom;
            dom.n = grid.extent_periods * ppp;
            dom.dx = dx;
            dom.bc = Boundary::Clamped;
            double frac_x = reversed ? 1.0 - frac : frac;
            dom.x0 = -std::floor(frac_x * grid.extent_periods);
            u0.values.resize(dom.n);
            opt.lower_bound.resize(dom.n);
            opt.upper_bound.resize(dom.n);
            for (int i = 0; i < dom.n; ++i) {
                double x = dom.x(i);
                double s = reversed ? -x : x;
                u0.values[i] = s <= off ? job.upper.value_at(x) : job.lower.value_at(x);
                opt.lower_bound[i] = job.lower.value_at(x);
                opt.upper_bound[i] = job.upper.value_at(x);
            }
            const auto& left_state = reversed ? job.lower : job.upper;
            const auto& right_state = reversed ? job.upper : job.lower;
            dom1 = dom;
            st1.emplace(prob, dom, dt);
            st1->set_clamp(left_state.value_at(dom.x(-1)),
                           right_state.value_at(dom.x(dom.n)));
            double lo = dom.x0, hi = dom.x0 + dom.length();
            s_min = reversed ? -hi : lo;
            s_max = reversed ? -lo : hi;
        } else if (job.dir.axis()) {
            axis = (job.dir.mx != 0) ? 0 : 1;
            reversed = (axis == 0 ? job.dir.mx : job.dir.my) < 0;
            Domain2D dom;
            dom.dx = dx;
            int n_along = grid.extent_periods * ppp;
            int n_trans = std::max(1, grid.extent_periods_y) * ppp;
            double frac_s = reversed ? 1.0 - frac : frac;
            double origin = -std::floor(frac_s * grid.extent_periods);
            if (axis == 0) {
                dom.nx = n_along;
                dom.ny = n_trans;
                dom.x0 = origin;
                dom.bc_x = Boundary::Clamped;
                dom.bc_y = Boundary::Periodic;
            } else {
                dom.ny = n_along;
                dom.nx = n_trans;
                dom.y0 = origin;
                dom.bc_y = Boundary::Clamped;
                dom.bc_x = Boundary::Periodic;
            }
            u0.values.resize(dom.size());
            opt.lower_bound.resize(dom.size());
            opt.upper_bound.resize(dom.size());
            for (int j2 = 0; j2 < dom.ny; ++j2) {
                for (int i = 0; i < dom.nx; ++i) {
                    double x = dom.x(i), y = dom.y(j2);
                    double s = axis == 0 ? x : y;
                    if (reversed) s = -s;
                    std::size_t k = dom.idx(i, j2);
                    u0.values[k] =
                        s <= off ? job.upper.value_at(x, y) : job.lower.value_at(x, y);
                    opt.lower_bound[k] = job.lower.value_at(x, y);
                    opt.upper_bound[k] = job.upper.value_at(x, y);
                }
            }
            dom2 = dom;
            st2.emplace(prob, dom, dt);
            const auto& neg_state = reversed ? job.lower : job.upper;
            const auto& pos_state = reversed ? job.upper : job.lower;
            if (axis == 0) {
                std::vector<double> l(dom.ny), r(dom.ny);
                for (int j2 = 0; j2 < dom.ny; ++j2) {
                    l[j2] = neg_state.value_at(dom.x(-1), dom.y(j2));
                    r[j2] = pos_state.value_at(dom.x(dom.nx), dom.y(j2));
                }
                st2->set_clamp(std::move(l), std::move(r), {}, {});
            } else {
                std::vector<double> b(dom.nx), t(dom.nx);
                for (int i = 0; i < dom.nx; ++i) {
                    b[i] = neg_state.value_at(dom.x(i), dom.y(-1));
                    t[i] = pos_state.value_at(dom.x(i), dom.y(dom.ny));
                }
                st2->set_clamp({}, {}, std::move(b), std::move(t));
            }
            double len = n_along * dx;
            double lo = origin, hi = origin + len;
            s_min = reversed ? -hi : lo;
            s_max = reversed ? -lo : hi;
        } else {
            diagonal = true;
            Domain2D dom;
            dom.dx = dx;
            dom.nx = grid.extent_periods * ppp;
            dom.ny = grid.extent_periods * ppp;
            dom.x0 = -std::floor(0.5 * grid.extent_periods);
            dom.y0 = dom.x0;
            dom.bc_x = Boundary::Clamped;
            dom.bc_y = Boundary::Clamped;
            const double ex = job.dir.ex(), ey = job.dir.ey();
            u0.values.resize(dom.size());
            opt.lower_bound.resize(dom.size());
            opt.upper_bound.resize(dom.size());
            auto datum = [&](double x, double y) {
                double s = x * ex + y * ey;
                return s <= off ? job.upper.value_at(x, y) : job.lower.value_at(x, y);
            };
            for (int j2 = 0; j2 < dom.ny; ++j2) {
                for (int i = 0; i < dom.nx; ++i) {
                    double x = dom.x(i), y = dom.y(j2);
                    std::size_t k = dom.idx(i, j2);
                    u0.values[k] = datum(x, y);
                    opt.lower_bound[k] = job.lower.value_at(x, y);
                    opt.upper_bound[k] = job.upper.value_at(x, y);
                }
            }
            dom2 = dom;
            st2.emplace(prob, dom, dt);
            std::vector<double> l(dom.ny), r(dom.ny), b(dom.nx), t(dom.nx);
            for (int j2 = 0; j2 < dom.ny; ++j2) {
                l[j2] = datum(dom.x(-1), dom.y(j2));
                r[j2] = datum(dom.x(dom.nx), dom.y(j2));
            }
            for (int i = 0; i < dom.nx; ++i) {
                b[i] = datum(dom.x(i), dom.y(-1));
                t[i] = datum(dom.x(i), dom.y(dom.ny));
            }
            st2->set_clamp(std::move(l), std::move(r), std::move(b), std::move(t));
            double half = 0.5 * dom.nx * dx;
            s_min = -half;
            s_max = half;
        }
    }

    void trace(const std::vector<double>& u, std::vector<double>& pos,
               std::vector<double>& val) const {
        if (dom1) cell_means_1d(u, ppp, reversed, dom1->x0, pos, val);
        else if (!diagonal) cell_means_stripe(u, *dom2, ppp, axis, reversed, pos, val);
        else line_trace_means(u, *dom2, job.dir, pos, val);
    }

    // Max-norm distance of each period cell to a periodic state (1D/stripe).
    std::vector<double> state_distance(const std::vector<double>& u,
                                       const CellField& state) const {
        if (diagonal)
            throw ConfigError("cell state scan unsupported for non-axis directions");
        int cells;
        std::vector<double> out;
        if (dom1) {
            cells = dom1->n / ppp;
            out.resize(cells);
            for (int m = 0; m < cells; ++m) {
                int mc = reversed ? cells - 1 - m : m;
                double d = 0.0;
                for (int i = 0; i < ppp; ++i) {
                    int gi = mc * ppp + i;
                    d = std::max(d, std::abs(u[gi] - state.value_at(dom1->x(gi))));
                }
                out[m] = d;
            }
        } else {
            const Domain2D& dom = *dom2;
            int n_along = axis == 0 ? dom.nx : dom.ny;
            int n_trans = axis == 0 ? dom.ny : dom.nx;
            cells = n_along / ppp;
            out.resize(cells);
            for (int m = 0; m < cells; ++m) {
                int mc = reversed ? cells - 1 - m : m;
                double d = 0.0;
                for (int a = 0; a < ppp; ++a) {
                    int i_along = mc * ppp + a;
                    for (int tr = 0; tr < n_trans; ++tr) {
                        std::size_t k =
                            axis == 0 ? dom.idx(i_along, tr) : dom.idx(tr, i_along);
                        double x = axis == 0 ? dom.x(i_along) : dom.x(tr);
                        double y = axis == 0 ? dom.y(tr) : dom.y(i_along);
                        d = std::max(d, std::abs(u[k] - state.value_at(x, y)));
                    }
                }
                out[m] = d;
            }
        }
        return out;
    }

    EvolveReport run_from(Field start, double duration, Tracker& tracker, int cadence) {
        opt.horizon = duration;
        Observer obs{cadence, [&](int, double t, const std::vector<double>& u) {
                         std::vector<double> pos, val;
                         trace(u, pos, val);
                         tracker.record(t, pos, val);
                     }};
        if (st1) return evolve(*st1, std::move(start), opt, {obs});
        return evolve(*st2, std::move(start), opt, {obs});
    }
};

void check_boundaries(const Tracker& tracker, const PlanarEngine& eng, double margin,
                      int extent) {
    bool ok = !tracker.lost_level;
    for (const auto& s : tracker.samples) {
        for (double x : s.x) {
            if (std::isnan(x)) continue;
            if (x < eng.s_min + margin || x > eng.s_max - margin) ok = false;
        }
        if (!ok) break;
    }
    if (!ok)
        throw ResourceFailure("front reached the domain margin (extent " +
                              std::to_string(extent) + " periods too small)");
}

struct ProfileAccumulator {
    int slots = 0;
    int nz = 0;
    double w = 0.0;
    double dz = 0.0;
    std::vector<double> sum, sum2;
    std::vector<int> count;

    void init(int slots_, double halfwidth, double dz_) {
        slots = slots_;
        dz = dz_;
        w = halfwidth;
        nz = 2 * static_cast<int>(std::lround(halfwidth / dz)) + 1;
        sum.assign(std::size_t(slots) * nz, 0.0);
        sum2.assign(std::size_t(slots) * nz, 0.0);
        count.assign(std::size_t(slots) * nz, 0);
    }

    void add(int slot, double z, double v) {
        int kb = static_cast<int>(std::lround((z + w) / dz));
        if (kb < 0 || kb >= nz) return;
        std::size_t k = std::size_t(slot) * nz + kb;
        sum[k] += v;
        sum2[k] += v * v;
        ++count[k];
    }
};

Profile finalize_profile(const ProfileAccumulator& acc, double mean_upper, double mean_lower) {
    Profile prof;
    prof.z0 = -acc.w;
    prof.dz = acc.dz;
    prof.slots = acc.slots;
    prof.table.assign(acc.sum.size(), kNaN);
    prof.counts = acc.count;
    double max_var = 0.0;
    for (std::size_t k = 0; k < acc.sum.size(); ++k) {
        if (acc.count[k] == 0) continue;
        double m = acc.sum[k] / acc.count[k];
        prof.table[k] = m;
        if (acc.count[k] > 1)
            max_var = std::max(max_var, std::max(0.0, acc.sum2[k] / acc.count[k] - m * m));
    }
    prof.periodicity_defect = std::sqrt(max_var);

    prof.mean.assign(acc.nz, kNaN);
    prof.lo.assign(acc.nz, kNaN);
    prof.hi.assign(acc.nz, kNaN);
    for (int kb = 0; kb < acc.nz; ++kb) {
        double s = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
        int cnt = 0;
        for (int slot = 0; slot < acc.slots; ++slot) {
            double v = prof.table[std::size_t(slot) * acc.nz + kb];
            if (std::isnan(v)) continue;
            s += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            ++cnt;
        }
        if (cnt > 0) {
            prof.mean[kb] = s / cnt;
            prof.lo[kb] = lo;
            prof.hi[kb] = hi;
        }
    }

    double defect = 0.0;
    for (int slot = 0; slot < acc.slots; ++slot) {
        double prev = kNaN;
        for (int kb = 0; kb < acc.nz; ++kb) {
            double v = prof.table[std::size_t(slot) * acc.nz + kb];
            if (std::isnan(v)) continue;
            if (!std::isnan(prev)) defect = std::max(defect, v - prev);
            prev = v;
        }
    }
    prof.monotonicity_defect = defect;

    auto edge_mean = [&](bool left) {
        int span = std::max(1, acc.nz / 10);
        double s = 0.0;
        int cnt = 0;
        for (int a = 0; a < span; ++a) {
            int kb = left ? a : acc.nz - 1 - a;
            if (!std::isnan(prof.mean[kb])) {
                s += prof.mean[kb];
                ++cnt;
            }
        }
        return cnt ? s / cnt : kNaN;
    };
    prof.limit_defect_upper = std::abs(edge_mean(true) - mean_upper);
    prof.limit_defect_lower = std::abs(edge_mean(false) - mean_lower);
    return prof;
}

}  // namespace

// ---------------------------------------------------------------------------
// measure_front

FrontRecord measure_front(const FrontContext& ctx, const FrontJob& job) {
    const RunSpec& run = ctx.run;
    const double mean_up = job.upper.mean();
    const double mean_lo = job.lower.mean();
    const double gap = mean_up - mean_lo;
    if (gap <= 0.0) throw ConfigError("measure_front: states are not ordered");

    std::vector<double> levels = {mean_lo + 0.25 * gap, mean_lo + 0.5 * gap,
                                  mean_lo + 0.75 * gap};
    const std::size_t mid_index = 1;
    for (double cm : job.candidate_means) {
        if (cm <= mean_lo || cm >= mean_up) continue;
        levels.push_back(0.5 * (cm + mean_up));
        levels.push_back(0.5 * (cm + mean_lo));
    }

    const double base_horizon = job.horizon > 0.0 ? job.horizon : run.horizon;

    PlanarEngine eng(ctx, job);
    Tracker tracker;
    tracker.levels = levels;
    EvolveReport evrep = eng.run_from(std::move(eng.u0), base_horizon, tracker, 4);
    double horizon = base_horizon;

    std::vector<SpeedEstimate> fits;
    auto refit = [&] {
        fits.clear();
        for (std::size_t li = 0; li < levels.size(); ++li)
            fits.push_back(tracker.fit_level(li, horizon / 2.0, horizon));
    };
    // Median crossing separation x_i - x_j early vs late in the fit window.
    auto separation_growth = [&](std::size_t i, std::size_t j) {
        std::vector<double> early, late;
        for (const auto& s : tracker.samples) {
            if (std::isnan(s.x[i]) || std::isnan(s.x[j])) continue;
            double d = s.x[i] - s.x[j];
            if (s.t >= horizon / 2.0 && s.t <= 0.6 * horizon) early.push_back(d);
            else if (s.t >= 0.9 * horizon) late.push_back(d);
        }
        if (early.empty() || late.empty()) return 0.0;
        auto med = [](std::vector<double>& v) {
            std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
            return v[v.size() / 2];
        };
        return med(late) - med(early);
    };
    // A genuine two-front split has the lower level running ahead of the upper
    // one (speeds nondecreasing toward the lower state) and the crossings
    // actually diverging; a merge transient has them colliding, and cell-scale
    // tracking bias cannot fake a full period of divergence.
    auto split_pair = [&]() -> std::optional<std::pair<std::size_t, std::size_t>> {
        for (std::size_t i = 0; i < levels.size(); ++i) {
            for (std::size_t j = 0; j < levels.size(); ++j) {
                if (levels[i] >= levels[j]) continue;  // want level i below level j
                double gap = fits[i].value - fits[j].value;
                double se = std::max(combined_se(fits[i], fits[j]), 1e-12);
                if (gap > 3.0 * se && gap > 0.5 * run.zero_speed_tol &&
                    separation_growth(i, j) >= 1.0)
                    return {{i, j}};
            }
        }
        return std::nullopt;
    };

    refit();
    for (int stage = 0; stage < 16; ++stage) {
        if (split_pair()) break;
        double want = horizon;
        // slow fronts: run until the mid level has crossed several cells
        double cmid = fits[mid_index].value;
        if (std::abs(cmid) >= 0.5 * run.zero_speed_tol)
            want = std::max(want, run.min_travel_periods / std::abs(cmid));
        // merge transients: extend until all levels agree
        for (std::size_t i = 0; i < levels.size(); ++i) {
            for (std::size_t j = i + 1; j < levels.size(); ++j) {
                double gap = std::abs(fits[i].value - fits[j].value);
                double se = std::max(combined_se(fits[i], fits[j]), 1e-12);
                if (gap > 3.0 * se && gap > 0.25 * run.zero_speed_tol)
                    want = std::max(want, horizon + base_horizon);
            }
        }
        want = std::min(want, run.extension_cap * base_horizon);
        if (want <= horizon * (1.0 + 1e-9)) break;
        evrep = eng.run_from(std::move(evrep.final), want - horizon, tracker, 4);
        horizon = want;
        refit();
    }

    FrontRecord rec;
    rec.e = job.dir;
    rec.upper_id = job.upper_id;
    rec.lower_id = job.lower_id;
    rec.levels = levels;
    rec.flags.approximate_direction = eng.diagonal && job.dir.lattice_period() > 6.0;

    check_boundaries(tracker, eng, run.boundary_margin, ctx.grid.extent_periods);

    const double t_lo = horizon / 2.0, t_hi = horizon;
    rec.level_speeds = fits;
    rec.speed = rec.level_speeds[mid_index];

    if (auto pair = split_pair()) {
        const auto& ahead = fits[pair->first];
        const auto& behind = fits[pair->second];
        throw MultipleFrontsDetected(behind.value, ahead.value, combined_se(ahead, behind));
    }

    rec.flags.zero_speed = std::abs(rec.speed.value) <= run.zero_speed_tol;
    if (!rec.flags.zero_speed && rec.speed.r2 < 0.999)
        throw NumericalDiagnostic("measure_front: regression R^2 " +
                                  std::to_string(rec.speed.r2) + " below 0.999");
    rec.flags.accepted = rec.speed.se <= run.speed_se_max;

    if (job.want_profile && !rec.flags.zero_speed && ctx.prob.dimension() == 1) {
        LineFit mid = tracker.window_fit(mid_index, t_lo, t_hi);
        const double c = rec.speed.value;
        ProfileAccumulator acc;
        acc.init(eng.ppp, job.profile_halfwidth, eng.dx);
        const Domain1D& dom = *eng.dom1;
        double span = 1.2 / std::abs(c);
        int steps = static_cast<int>(std::ceil(span / eng.dt));
        Field f = std::move(evrep.final);
        for (int s = 0; s < steps; ++s) {
            eng.st1->step(f);
            double front_pos = mid.intercept + mid.slope * f.time;
            for (int i = 0; i < dom.n; ++i) {
                double sproj = eng.reversed ? -dom.x(i) : dom.x(i);
                double z = sproj - front_pos;
                int slot = ((i % eng.ppp) + eng.ppp) % eng.ppp;
                acc.add(slot, z, f.values[i]);
            }
        }
        rec.profile = finalize_profile(acc, mean_up, mean_lo);
        rec.flags.profile_extracted = true;
    } else if (job.want_profile && rec.flags.zero_speed) {
        rec.flags.note = "zero speed: profile extraction skipped";
    }

    return rec;
}

// ---------------------------------------------------------------------------
// counter-propagation

CounterPropagationReport counter_propagation_check(const FrontContext& ctx,
                                                   const StateLattice& lattice,
                                                   int unstable_id) {
    const SteadyState& q = lattice.state(unstable_id);
    if (q.stability != Stability::Unstable)
        throw ConfigError("counter_propagation_check: state is not unstable");

    const SteadyState* above = nullptr;
    const SteadyState* below = nullptr;
    for (int id : lattice.stable_ids) {
        const SteadyState& s = lattice.state(id);
        auto ord = compare_fields(s.values, q.values, ctx.run.dedup_tol);
        if (ord == Ordering::Above && (!above || s.values.mean() < above->values.mean()))
            above = &s;
        if (ord == Ordering::Below && (!below || s.values.mean() > below->values.mean()))
            below = &s;
    }
    if (!above || !below)
        throw ConfigError("counter_propagation_check: missing stable neighbors");

    CounterPropagationReport rep;
    {
        FrontJob job;
        job.upper = above->values;
        job.lower = q.values;
        job.upper_id = above->id;
        job.lower_id = unstable_id;
        job.want_profile = false;
        job.interface_fraction = 0.25;
        FrontRecord r = measure_front(ctx, job);
        rep.speed_into = r.speed.value;
        rep.se_into = r.speed.se;
    }
    {
        FrontJob job;
        job.upper = q.values;
        job.lower = below->values;
        job.upper_id = unstable_id;
        job.lower_id = below->id;
        job.want_profile = false;
        job.interface_fraction = 0.75;
        FrontRecord r = measure_front(ctx, job);
        rep.speed_out_of = r.speed.value;
        rep.se_out_of = r.speed.se;
    }
    rep.ok = rep.speed_into > ctx.run.zero_speed_tol &&
             rep.speed_out_of < -ctx.run.zero_speed_tol;
    if (!rep.ok)
        throw NumericalDiagnostic(
            "counter_propagation_check: sign dichotomy violated (into=" +
            std::to_string(rep.speed_into) + ", out=" + std::to_string(rep.speed_out_of) +
            ")");
    return rep;
}

// ---------------------------------------------------------------------------
// Cauchy observation run

CauchyObservationData planar_cauchy_run(const FrontContext& ctx, const StateLattice& lattice,
                                        Direction e, double horizon) {
    std::vector<int> chain = lattice.stable_descending();
    if (chain.size() < 2)
        throw NumericalDiagnostic("planar_cauchy_run: fewer than two stable states");

    FrontJob job;
    job.dir = e;
    job.upper = lattice.pbar().values;
    job.lower = lattice.zero().values;
    job.upper_id = lattice.pbar_id;
    job.lower_id = lattice.zero_id;
    job.interface_fraction = 0.5;
    job.want_profile = false;

    CauchyObservationData data;
    for (std::size_t k = 0; k + 1 < chain.size(); ++k)
        data.levels.push_back(0.5 * (lattice.state(chain[k]).values.mean() +
                                     lattice.state(chain[k + 1]).values.mean()));

    const double T = horizon > 0.0 ? horizon : ctx.run.horizon;
    PlanarEngine eng(ctx, job);
    Tracker tracker;
    tracker.levels = data.levels;
    EvolveReport evrep = eng.run_from(std::move(eng.u0), T, tracker, 4);
    check_boundaries(tracker, eng, ctx.run.boundary_margin, ctx.grid.extent_periods);

    for (std::size_t li = 0; li < data.levels.size(); ++li)
        data.level_speeds.push_back(tracker.fit_level(li, T / 2.0, T));

    data.t_final = evrep.final.time;
    std::vector<double> pos, val;
    eng.trace(evrep.final.values, pos, val);
    data.cell_pos = std::move(pos);
    data.cell_mean = std::move(val);
    for (const auto& st : lattice.states)
        data.state_distance.push_back(eng.state_distance(evrep.final.values, st.values));
    return data;
}

}  // namespace terracelab
