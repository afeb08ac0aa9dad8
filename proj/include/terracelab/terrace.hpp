#pragma once

#include <string>
#include <vector>

#include "terracelab/fronts.hpp"
#include "terracelab/spectral.hpp"

namespace terracelab {

struct TerraceFlags {
    bool unique_certified = true;  // withheld when any speed is inside zero_speed_tol
    bool zero_speed = false;
    int merges = 0;
    std::vector<std::string> notes;
};

/// Ordered stack of fronts connecting pbar to 0: platforms[0] = pbar,
/// platforms[K] = 0, fronts[k] connects platforms[k] to platforms[k+1],
/// speeds nondecreasing.
struct Terrace {
    Direction e;
    std::vector<int> platform_ids;  // descending states, size K+1
    std::vector<FrontRecord> fronts;
    TerraceFlags flags;

    std::size_t num_fronts() const { return fronts.size(); }
    std::vector<double> speeds() const;
    std::vector<double> speed_ses() const;
};

enum class MergePolicy { LeftmostFirst, RightmostFirst };

struct BuildOptions {
    MergePolicy policy = MergePolicy::LeftmostFirst;
    int interface_offset_periods = 0;
    double horizon = 0.0;  // 0 = RunSpec horizon
};

/// Builds the terrace from adjacent bistable fronts, merging pairs whose speeds
/// descend until the sequence is nondecreasing. Each merged speed must land in
/// the bracket of the speeds it replaces.
Terrace build_terrace(const FrontContext& ctx, const StateLattice& lattice, Direction e,
                      const BuildOptions& opt = {});

struct MergeOrderReport {
    bool match = false;
    Terrace leftmost;
    Terrace rightmost;
    double max_speed_gap = 0.0;
    std::string detail;
};

/// Runs the construction under both merge-selection policies and compares.
MergeOrderReport merge_order_invariance_check(const FrontContext& ctx,
                                              const StateLattice& lattice, Direction e,
                                              double horizon = 0.0);

struct ObservedPlateau {
    int state_id = -1;
    double xi_lo = 0.0;  // interval in x.e / t at the final time
    double xi_hi = 0.0;
};

/// Terrace structure read off a single Cauchy run from planar-like data.
struct ObservedTerrace {
    Direction e;
    std::vector<int> platform_ids;       // descending, size K+1
    std::vector<SpeedEstimate> speeds;   // per transition, size K
    std::vector<ObservedPlateau> plateaus;
    bool unknown_plateau = false;
    std::vector<std::string> notes;
};

struct ObserveOptions {
    double horizon = 0.0;
    double plateau_tol_factor = 1e-2;    // times the local state gap
    double plateau_min_periods = 5.0;
    double plateau_speed_window = 0.05;  // times (c_max - c_min) * t
};

ObservedTerrace observe_terrace_from_cauchy(const FrontContext& ctx,
                                            const StateLattice& lattice, Direction e,
                                            const ObserveOptions& opt = {});

struct TerraceMatchReport {
    bool structure_match = false;
    bool speeds_match = false;
    bool profiles_match = true;
    double max_speed_gap = 0.0;
    std::vector<double> shifts;  // optimal z alignment per front
    double max_profile_mismatch = 0.0;
    std::vector<std::string> notes;

    bool match() const { return structure_match && speeds_match && profiles_match; }
};

TerraceMatchReport compare_terraces(const Terrace& a, const Terrace& b);
TerraceMatchReport compare_terraces(const Terrace& a, const ObservedTerrace& b);

}  // namespace terracelab
