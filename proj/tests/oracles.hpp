#pragma once

// Independent oracles used by the test suites: these deliberately avoid the
// library's solver paths (time stepping, power iteration) so they can certify
// them.

#include <utility>
#include <vector>

#include "terracelab/problem.hpp"
#include "terracelab/spectral.hpp"

namespace oracle {

/// Speed of the traveling-wave connection U'' + c U' + f(U) = 0,
/// U(-inf) = upper, U(+inf) = lower, by bisection shooting from the unstable
/// manifold at the upper state.
double shooting_speed(const terracelab::Polynomial& f, double upper, double lower,
                      double c_lo = -2.0, double c_hi = 2.0);

struct ShootingProfile {
    std::vector<double> z;
    std::vector<double> u;
    double speed = 0.0;
};

/// Profile at the shooting speed, shifted so u = (upper+lower)/2 at z = 0.
ShootingProfile shooting_profile(const terracelab::Polynomial& f, double upper, double lower,
                                 double c_lo = -2.0, double c_hi = 2.0);

/// Largest eigenvalue and positive max-normalized eigenvector of the assembled
/// periodic cell operator, via dense symmetric eigendecomposition.
std::pair<double, std::vector<double>> dense_principal_eigenpair(
    const terracelab::CellOperator& op, const std::vector<double>& potential);

/// Exact integral of a polynomial over [lo, hi].
double poly_integral(const terracelab::Polynomial& f, double lo, double hi);

}  // namespace oracle
