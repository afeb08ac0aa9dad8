#include "terracelab/terrace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace terracelab {

std::vector<double> Terrace::speeds() const {
    std::vector<double> out;
    for (const auto& f : fronts) out.push_back(f.speed.value);
    return out;
}

std::vector<double> Terrace::speed_ses() const {
    std::vector<double> out;
    for (const auto& f : fronts) out.push_back(f.speed.se);
    return out;
}

// ---------------------------------------------------------------------------
// build_terrace

namespace {

FrontJob make_job(const StateLattice& lattice, Direction e, int upper_id, int lower_id,
                  const std::vector<int>& chain, const BuildOptions& opt) {
    FrontJob job;
    job.dir = e;
    job.upper = lattice.state(upper_id).values;
    job.lower = lattice.state(lower_id).values;
    job.upper_id = upper_id;
    job.lower_id = lower_id;
    job.horizon = opt.horizon;
    job.interface_offset_periods = opt.interface_offset_periods;
    job.interface_fraction = 0.5;  // merge candidates can travel either way
    double up_mean = job.upper.mean(), lo_mean = job.lower.mean();
    for (int id : chain) {
        double m = lattice.state(id).values.mean();
        if (m > lo_mean && m < up_mean) job.candidate_means.push_back(m);
    }
    return job;
}

}  // namespace

Terrace build_terrace(const FrontContext& ctx, const StateLattice& lattice, Direction e,
                      const BuildOptions& opt) {
    for (const auto& st : lattice.states)
        if (st.stability == Stability::Marginal)
            throw NumericalDiagnostic(
                "build_terrace: marginal state found (lambda = " + std::to_string(st.lambda) +
                "); the stable/unstable dichotomy fails numerically");
    if (!lattice.totally_ordered)
        throw NumericalDiagnostic(
            "build_terrace: stable states intersect; only the Cauchy observation path "
            "applies to unordered lattices");

    std::vector<int> chain = lattice.stable_descending();  // pbar ... 0
    const std::size_t M = chain.size() - 1;
    if (M < 1) throw NumericalDiagnostic("build_terrace: fewer than two stable states");

    Terrace terr;
    terr.e = e;
    terr.platform_ids = chain;
    for (std::size_t k = 0; k < M; ++k) {
        FrontJob job = make_job(lattice, e, chain[k], chain[k + 1], chain, opt);
        terr.fronts.push_back(measure_front(ctx, job));
    }

    auto merge_tol = [&](std::size_t i) {
        return 2.0 * combined_se(terr.fronts[i].speed, terr.fronts[i + 1].speed);
    };

    std::vector<bool> unmergeable(terr.fronts.size(), false);
    int guard = 0;
    while (true) {
        if (++guard > static_cast<int>(M) + 1)
            throw NumericalDiagnostic("build_terrace: merge loop exceeded M iterations");
        std::vector<std::size_t> descents;
        for (std::size_t i = 0; i + 1 < terr.fronts.size(); ++i) {
            double ci = terr.fronts[i].speed.value, cj = terr.fronts[i + 1].speed.value;
            if (ci > cj + merge_tol(i) && !unmergeable[i]) descents.push_back(i);
        }
        if (descents.empty()) break;
        std::size_t i = opt.policy == MergePolicy::LeftmostFirst ? descents.front()
                                                                 : descents.back();
        int upper_id = terr.fronts[i].upper_id;
        int lower_id = terr.fronts[i + 1].lower_id;
        double c_hi = terr.fronts[i].speed.value;
        double c_lo = terr.fronts[i + 1].speed.value;
        double se_pair = combined_se(terr.fronts[i].speed, terr.fronts[i + 1].speed);

        FrontJob job = make_job(lattice, e, upper_id, lower_id, chain, opt);
        FrontRecord merged;
        try {
            merged = measure_front(ctx, job);
        } catch (const MultipleFrontsDetected& ex) {
            unmergeable[i] = true;
            terr.flags.notes.push_back("pair at index " + std::to_string(i) +
                                       " still splits: " + ex.what());
            continue;
        }

        double bracket_lo = c_lo - 2.0 * se_pair - 2.0 * merged.speed.se;
        double bracket_hi = c_hi + 2.0 * se_pair + 2.0 * merged.speed.se;
        if (merged.speed.value < bracket_lo || merged.speed.value > bracket_hi) {
            std::ostringstream os;
            os << "build_terrace: merged speed " << merged.speed.value << " outside bracket ["
               << c_lo << ", " << c_hi << "]";
            throw NumericalDiagnostic(os.str());
        }

        int dropped_platform = terr.fronts[i].lower_id;
        terr.fronts[i] = std::move(merged);
        terr.fronts.erase(terr.fronts.begin() + i + 1);
        terr.platform_ids.erase(std::find(terr.platform_ids.begin(), terr.platform_ids.end(),
                                          dropped_platform));
        unmergeable.assign(terr.fronts.size(), false);
        ++terr.flags.merges;
    }

    for (std::size_t i = 0; i + 1 < terr.fronts.size(); ++i) {
        double ci = terr.fronts[i].speed.value, cj = terr.fronts[i + 1].speed.value;
        if (ci > cj + merge_tol(i))
            throw NumericalDiagnostic("build_terrace: speeds remain decreasing after merging (" +
                                      std::to_string(ci) + " > " + std::to_string(cj) + ")");
    }

    for (const auto& f : terr.fronts) {
        if (f.flags.zero_speed) {
            terr.flags.zero_speed = true;
            terr.flags.unique_certified = false;
        }
    }
    if (terr.flags.merges > static_cast<int>(M) - 1)
        throw NumericalDiagnostic("build_terrace: more than M-1 merges");
    return terr;
}

// ---------------------------------------------------------------------------
// merge order invariance

MergeOrderReport merge_order_invariance_check(const FrontContext& ctx,
                                              const StateLattice& lattice, Direction e,
                                              double horizon) {
    BuildOptions left, right;
    left.policy = MergePolicy::LeftmostFirst;
    right.policy = MergePolicy::RightmostFirst;
    left.horizon = right.horizon = horizon;

    MergeOrderReport rep;
    rep.leftmost = build_terrace(ctx, lattice, e, left);
    rep.rightmost = build_terrace(ctx, lattice, e, right);

    if (rep.leftmost.platform_ids != rep.rightmost.platform_ids) {
        rep.match = false;
        rep.detail = "platform sets differ";
        return rep;
    }
    rep.match = true;
    for (std::size_t k = 0; k < rep.leftmost.num_fronts(); ++k) {
        double gap = std::abs(rep.leftmost.fronts[k].speed.value -
                              rep.rightmost.fronts[k].speed.value);
        double se = combined_se(rep.leftmost.fronts[k].speed, rep.rightmost.fronts[k].speed);
        rep.max_speed_gap = std::max(rep.max_speed_gap, gap);
        if (gap > 3.0 * std::max(se, 1e-12) && gap > 1e-6) {
            rep.match = false;
            rep.detail = "speed " + std::to_string(k) + " differs by " + std::to_string(gap);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Cauchy observation

ObservedTerrace observe_terrace_from_cauchy(const FrontContext& ctx,
                                            const StateLattice& lattice, Direction e,
                                            const ObserveOptions& oopt) {
    std::vector<int> chain = lattice.stable_descending();
    const std::size_t M = chain.size() - 1;

    CauchyObservationData data = planar_cauchy_run(ctx, lattice, e, oopt.horizon);

    ObservedTerrace obs;
    obs.e = e;

    // Group adjacent pair levels whose fitted speeds are statistically equal:
    // each group crosses one front; states between separated groups are the
    // platforms with expanding plateaus.
    std::vector<std::size_t> group_of(M, 0);
    std::size_t groups = 1;
    for (std::size_t k = 1; k < M; ++k) {
        const auto& prev = data.level_speeds[k - 1];
        const auto& cur = data.level_speeds[k];
        double diff = cur.value - prev.value;
        double se = std::max(combined_se(prev, cur), 1e-12);
        bool separated = diff > 3.0 * se && diff > 0.5 * ctx.run.zero_speed_tol;
        if (diff < -3.0 * se && -diff > 0.5 * ctx.run.zero_speed_tol)
            obs.notes.push_back("level speeds decrease with depth at pair " +
                                std::to_string(k) + ": ordering violated numerically");
        else if (!separated && diff > 3.0 * se)
            obs.notes.push_back("unresolved pair at " + std::to_string(k) +
                                ": speeds too close to claim a plateau");
        if (separated) ++groups;
        group_of[k] = groups - 1;
    }

    // platforms: pbar, the states where the group index steps, and 0
    obs.platform_ids.push_back(chain.front());
    for (std::size_t k = 1; k < M; ++k)
        if (group_of[k] != group_of[k - 1]) obs.platform_ids.push_back(chain[k]);
    obs.platform_ids.push_back(chain.back());

    // one speed per group: inverse-variance mean of its levels
    obs.speeds.assign(groups, {});
    for (std::size_t g = 0; g < groups; ++g) {
        double wsum = 0.0, acc = 0.0, se_min = std::numeric_limits<double>::infinity();
        std::size_t count = 0;
        for (std::size_t k = 0; k < M; ++k) {
            if (group_of[k] != g) continue;
            double w = 1.0 / std::max(data.level_speeds[k].se * data.level_speeds[k].se, 1e-20);
            acc += w * data.level_speeds[k].value;
            wsum += w;
            se_min = std::min(se_min, data.level_speeds[k].se);
            ++count;
        }
        obs.speeds[g].value = acc / wsum;
        obs.speeds[g].se = se_min;
        obs.speeds[g].samples = count;
    }

    // final-time plateau intervals per lattice state
    const double t = data.t_final;
    std::vector<double> state_means;
    for (const auto& st : lattice.states) state_means.push_back(st.values.mean());
    double c_min = obs.speeds.front().value, c_max = obs.speeds.back().value;
    double min_width =
        std::max(oopt.plateau_min_periods, oopt.plateau_speed_window * (c_max - c_min) * t);

    auto local_gap = [&](int id) {
        double m = lattice.state(id).values.mean();
        double gap = std::numeric_limits<double>::infinity();
        for (const auto& st : lattice.states) {
            if (st.id == id) continue;
            gap = std::min(gap, std::abs(st.values.mean() - m));
        }
        return std::isfinite(gap) ? gap : 1.0;
    };

    for (int id : chain) {
        double tol = oopt.plateau_tol_factor * local_gap(id);
        const auto& dist = data.state_distance[id];
        int best_lo = -1, best_hi = -1, cur_lo = -1;
        for (std::size_t m = 0; m <= dist.size(); ++m) {
            bool inside = m < dist.size() && dist[m] <= tol;
            if (inside && cur_lo < 0) cur_lo = static_cast<int>(m);
            if (!inside && cur_lo >= 0) {
                int cur_hi = static_cast<int>(m) - 1;
                if (best_lo < 0 || cur_hi - cur_lo > best_hi - best_lo) {
                    best_lo = cur_lo;
                    best_hi = cur_hi;
                }
                cur_lo = -1;
            }
        }
        if (best_lo >= 0 &&
            data.cell_pos[best_hi] - data.cell_pos[best_lo] + 1.0 >= min_width) {
            ObservedPlateau p;
            p.state_id = id;
            p.xi_lo = data.cell_pos[best_lo] / t;
            p.xi_hi = data.cell_pos[best_hi] / t;
            obs.plateaus.push_back(p);
        }
    }

    // flat stretches matching no lattice state point to a missed steady state
    {
        double tol_grad = 1e-3;
        int run_len = 0;
        for (std::size_t m = 1; m < data.cell_mean.size(); ++m) {
            bool flat = std::abs(data.cell_mean[m] - data.cell_mean[m - 1]) < tol_grad;
            bool near_state = false;
            for (std::size_t s2 = 0; s2 < data.state_distance.size(); ++s2)
                if (data.state_distance[s2][m] <= 0.05) near_state = true;
            if (flat && !near_state) ++run_len;
            else run_len = 0;
            if (run_len >= static_cast<int>(min_width)) {
                obs.unknown_plateau = true;
                obs.notes.push_back("flat region near level " +
                                    std::to_string(data.cell_mean[m]) +
                                    " matches no lattice state: re-enumerate");
                break;
            }
        }
    }

    return obs;
}

// ---------------------------------------------------------------------------
// comparison

namespace {

// L-infinity distance between two cell-averaged profiles after the best shift
// on the z lattice.
std::pair<double, double> align_profiles(const Profile& a, const Profile& b) {
    if (a.empty() || b.empty()) return {0.0, 0.0};
    double best_mis = std::numeric_limits<double>::infinity();
    double best_shift = 0.0;
    int na = static_cast<int>(a.mean.size()), nb = static_cast<int>(b.mean.size());
    for (int shift = -nb + 8; shift < na - 8; ++shift) {
        double mis = 0.0;
        int overlap = 0;
        for (int k = 0; k < nb; ++k) {
            int ka = k + shift;
            if (ka < 0 || ka >= na) continue;
            if (std::isnan(a.mean[ka]) || std::isnan(b.mean[k])) continue;
            mis = std::max(mis, std::abs(a.mean[ka] - b.mean[k]));
            ++overlap;
        }
        if (overlap < std::min(na, nb) / 2) continue;
        if (mis < best_mis) {
            best_mis = mis;
            best_shift = a.z0 + shift * a.dz - b.z0;
        }
    }
    return {best_mis, best_shift};
}

}  // namespace

TerraceMatchReport compare_terraces(const Terrace& a, const Terrace& b) {
    TerraceMatchReport rep;
    rep.structure_match =
        a.platform_ids == b.platform_ids && a.num_fronts() == b.num_fronts();
    if (!rep.structure_match) {
        rep.notes.push_back("platform structure differs");
        return rep;
    }
    rep.speeds_match = true;
    for (std::size_t k = 0; k < a.num_fronts(); ++k) {
        double gap = std::abs(a.fronts[k].speed.value - b.fronts[k].speed.value);
        rep.max_speed_gap = std::max(rep.max_speed_gap, gap);
        double se = std::max(combined_se(a.fronts[k].speed, b.fronts[k].speed), 1e-12);
        if (gap > 3.0 * se && gap > 1e-6) {
            rep.speeds_match = false;
            rep.notes.push_back("speed " + std::to_string(k) + " differs by " +
                                std::to_string(gap));
        }
    }
    rep.shifts.resize(a.num_fronts(), 0.0);
    for (std::size_t k = 0; k < a.num_fronts(); ++k) {
        if (a.fronts[k].profile.empty() || b.fronts[k].profile.empty()) continue;
        auto [mis, shift] = align_profiles(a.fronts[k].profile, b.fronts[k].profile);
        rep.shifts[k] = shift;
        rep.max_profile_mismatch = std::max(rep.max_profile_mismatch, mis);
    }
    rep.profiles_match = rep.max_profile_mismatch <= 2e-2;
    return rep;
}

TerraceMatchReport compare_terraces(const Terrace& a, const ObservedTerrace& b) {
    TerraceMatchReport rep;
    rep.structure_match =
        a.platform_ids == b.platform_ids && a.num_fronts() == b.speeds.size();
    if (!rep.structure_match) {
        rep.notes.push_back("platform structure differs between built and observed");
        return rep;
    }
    rep.speeds_match = true;
    for (std::size_t k = 0; k < a.num_fronts(); ++k) {
        double gap = std::abs(a.fronts[k].speed.value - b.speeds[k].value);
        rep.max_speed_gap = std::max(rep.max_speed_gap, gap);
        double se = std::max(combined_se(a.fronts[k].speed, b.speeds[k]), 1e-12);
        if (gap > 3.0 * se && gap > 1e-6) {
            rep.speeds_match = false;
            rep.notes.push_back("speed " + std::to_string(k) + " differs by " +
                                std::to_string(gap));
        }
    }
    return rep;
}

}  // namespace terracelab
