#pragma once

#include <optional>
#include <string>
#include <vector>

#include "terracelab/evolve.hpp"
#include "terracelab/field.hpp"
#include "terracelab/problem.hpp"
#include "terracelab/spectral.hpp"

namespace terracelab {

/// Propagation direction as an integer lattice vector; honest periodic sampling
/// wants small components. In 1D only (±1, 0) is meaningful.
struct Direction {
    int mx = 1;
    int my = 0;

    double norm() const;
    double ex() const { return mx / norm(); }
    double ey() const { return my / norm(); }
    bool axis() const { return mx == 0 || my == 0; }
    /// Lattice period along the direction (length of the shortest lattice
    /// vector parallel to it): |(mx,my)| for coprime components.
    double lattice_period() const;
    std::string str() const;
};

struct SpeedEstimate {
    double value = 0.0;
    double se = 0.0;
    double r2 = 0.0;
    std::size_t samples = 0;
};

/// Combined standard error of two estimates.
double combined_se(const SpeedEstimate& a, const SpeedEstimate& b);

/// Resampled front profile U(x, z) on (cell slot) x (z grid), plus cell-reduced
/// curves. z = x.e - c t - offset, zero at the tracked mid-level crossing.
struct Profile {
    double z0 = 0.0;
    double dz = 0.0;
    std::vector<double> mean;  // cell-averaged U per z bin
    std::vector<double> lo;    // min over cell
    std::vector<double> hi;    // max over cell
    int slots = 0;
    std::vector<double> table;   // [slot][z], NaN where unobserved
    std::vector<int> counts;     // same layout
    double periodicity_defect = 0.0;
    double monotonicity_defect = 0.0;
    double limit_defect_upper = 0.0;
    double limit_defect_lower = 0.0;

    bool empty() const { return mean.empty(); }
    double z_at(std::size_t k) const { return z0 + k * dz; }
};

struct FrontFlags {
    bool zero_speed = false;
    bool accepted = true;
    bool boundary_ok = true;
    bool profile_extracted = false;
    bool approximate_direction = false;
    std::string note;
};

struct FrontRecord {
    Direction e;
    int upper_id = -1;
    int lower_id = -1;
    SpeedEstimate speed;
    std::vector<SpeedEstimate> level_speeds;  // all tracked levels
    std::vector<double> levels;
    Profile profile;
    FrontFlags flags;
};

/// The queried state pair is connected by more than one front: two tracked
/// levels move at statistically distinct speeds.
struct MultipleFrontsDetected : NumericalDiagnostic {
    MultipleFrontsDetected(double slow, double fast, double se)
        : NumericalDiagnostic("multiple front speeds detected: " + std::to_string(slow) +
                              " vs " + std::to_string(fast)),
          c_slow(slow), c_fast(fast), se_comb(se) {}
    double c_slow;
    double c_fast;
    double se_comb;
};

struct FrontContext {
    const PeriodicProblem& prob;
    GridSpec grid;
    RunSpec run;
};

struct FrontJob {
    Direction dir{1, 0};
    CellField upper;
    CellField lower;
    int upper_id = -1;
    int lower_id = -1;
    /// Cell means of candidate intermediate states; levels bracketing each are
    /// tracked for the split test.
    std::vector<double> candidate_means;
    double horizon = 0.0;                // 0 = RunSpec horizon
    double interface_fraction = -1.0;    // <0 = grid default
    int interface_offset_periods = 0;
    bool want_profile = true;
    double profile_halfwidth = 10.0;     // periods each side
};

/// Measures the pulsating-front speed between two ordered states by level-set
/// tracking of the cell-averaged profile, least squares over [T/2, T].
/// Throws MultipleFrontsDetected when the pair is not a single front and
/// ResourceFailure on boundary contamination.
FrontRecord measure_front(const FrontContext& ctx, const FrontJob& job);

struct CounterPropagationReport {
    double speed_into = 0.0;     // upper stable neighbor invading q: must be > 0
    double speed_out_of = 0.0;   // q invading the lower stable neighbor: must be < 0
    double se_into = 0.0;
    double se_out_of = 0.0;
    bool ok = false;
};

/// Sign dichotomy of speeds around a linearly unstable state.
CounterPropagationReport counter_propagation_check(const FrontContext& ctx,
                                                   const StateLattice& lattice,
                                                   int unstable_id);

/// One Cauchy run from pbar * indicator, tracking the mid level of every
/// adjacent stable pair; feeds the terrace observation. 1D and axis
/// directions only.
struct CauchyObservationData {
    std::vector<double> levels;               // tracked pair mid-levels, top first
    std::vector<SpeedEstimate> level_speeds;  // same order
    double t_final = 0.0;
    std::vector<double> cell_pos;             // ascending s, cell centers at t_final
    std::vector<double> cell_mean;
    // state_distance[s][m]: max-norm distance of cell m to lattice state s
    std::vector<std::vector<double>> state_distance;
};

CauchyObservationData planar_cauchy_run(const FrontContext& ctx, const StateLattice& lattice,
                                        Direction e, double horizon);

}  // namespace terracelab
