#pragma once

#include <string>
#include <vector>

#include "terracelab/fronts.hpp"
#include "terracelab/spectral.hpp"
#include "terracelab/terrace.hpp"
#include "terracelab/wulff.hpp"

namespace terracelab {

/// Smooth nondecreasing cutoff: 0 for z <= -1, 1 for z >= 1.
double chi_cutoff(double z);
double chi_cutoff_prime(double z);

// ---------------------------------------------------------------------------
// compact-support spreading

/// Scaled super-level outline at one time: radii of {u >= level}/t in 5-degree
/// angular bins around the origin.
struct MeasuredShape {
    double time = 0.0;
    int upper_id = -1;
    int lower_id = -1;
    double level = 0.0;
    std::vector<double> angles;  // bin centers, radians
    std::vector<double> radii;   // scaled by 1/t
    double area = 0.0;           // scaled

    ShapePolygon outline() const;
    double radius_at(double angle) const;  // circular interpolation
};

struct SpreadingOptions {
    double r0 = 8.0;  // initial plateau radius (invasion wants it big enough)
    std::vector<double> times;
    double invasion_tol = 1e-3;
    double invasion_fraction = 0.1;  // of the horizon, sustained
    int angle_bins = 72;
};

struct SpreadingResult {
    std::vector<std::vector<MeasuredShape>> shapes;  // [time][platform pair]
    std::vector<double> times;
    bool invasion = false;
    double invasion_time = -1.0;
};

/// Evolves pbar * 1_ball on a clamped square and extracts one outline per
/// adjacent stable pair at each requested time. Throws ResourceFailure when no
/// invasion is detected or when a contour touches the boundary margin.
SpreadingResult spreading_run(const FrontContext& ctx, const StateLattice& lattice,
                              const SpreadingOptions& opt);

struct ShapeMatchReport {
    bool upper_ok = false;  // measured inside (1+eps) predicted
    bool lower_ok = false;  // (1-eps) predicted inside measured
    double hausdorff = 0.0;
    double eps = 0.0;
    bool passed() const { return upper_ok && lower_ok; }
};

/// Two-sided sandwich of a measured outline against a predicted polygon.
ShapeMatchReport shape_match(const MeasuredShape& measured, const ShapePolygon& predicted,
                             double eps);

/// Marching-squares contour points of {field = level} on a rectangle.
std::vector<std::array<double, 2>> contour_points(const std::vector<double>& values,
                                                  const Domain2D& dom, double level);

// ---------------------------------------------------------------------------
// residual certificates

struct PerturbationReport {
    bool passed = false;
    double delta = 0.0;       // largest passing perturbation size
    double margin = 0.0;      // worst of R -+ delta*eta*e^{-sigma t} over the sweep
    double disc_err = 0.0;
    std::string location;
    std::vector<std::string> notes;
};

/// Certificate that p +- eta phi e^{-sigma t} are strict super/subsolutions
/// near p: evaluates the parabolic residual analytically in time and with the
/// discrete operator in space, sweeping delta downward until both signs pass.
PerturbationReport perturbation_residual(const CellOperator& op, const SteadyState& p,
                                         const std::vector<double>& t_grid, double disc_err,
                                         double delta_min = 1e-4);

struct GluedOptions {
    double eps = 0.05;        // speed bump of the lowest piece; grows with k
    double eta = 1e-3;        // perturbation amplitude of the lowest piece
    double separation = 25.0; // periods between consecutive fronts at t = 0
    int t_samples = 16;
    double t_span = 0.0;      // 0 = one pulsation period of the fastest front
    double disc_err = 1e-3;
    int extent_periods = 0;   // 0 = derive from fronts + separation
};

struct GluedReport {
    bool passed = false;
    double min_residual = 0.0;  // over pieces, interior nodes, times
    std::string location;
    bool glue_continuous = false;
    double max_glue_jump = 0.0;
    bool switch_in_band = false;
    std::vector<std::string> notes;
};

/// Assembles the perturbed moving profiles at speeds c_k + eps_k, blends the
/// neighboring eigenfunctions with the chi cutoff, and evaluates the parabolic
/// residual of every piece on a space-time grid; also checks the min-glued
/// composite switches inside the plateau bands.
GluedReport glued_supersolution_residual(const FrontContext& ctx, const Terrace& terr,
                                         const StateLattice& lattice,
                                         const GluedOptions& opt);

/// Residual scale of the discretization, measured on an unperturbed moving
/// profile (eta = eps = 0); the budget constant C in C * (dx^2 + dt).
double calibrate_disc_constant(const FrontContext& ctx, const Terrace& single_front,
                               const StateLattice& lattice);

}  // namespace terracelab
