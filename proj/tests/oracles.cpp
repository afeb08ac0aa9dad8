#include "oracles.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace oracle {

using terracelab::Polynomial;

namespace {

enum class Shot { Undershoot, Turnback };

// Integrate U'' + cU' + f(U) = 0 forward from the unstable manifold at `upper`
// and classify the failure mode. Undershoot (crossed below lower) means c is
// too small, turnback (U' >= 0 strictly inside) means c is too large.
Shot classify_shot(const Polynomial& f, double upper, double lower, double c) {
    const double band = 1e-4 * (upper - lower);
    const double fp_up = f.deriv_eval(upper);
    if (fp_up >= 0.0) throw std::invalid_argument("upper state is not stable");
    const double mu = 0.5 * (-c + std::sqrt(c * c - 4.0 * fp_up));
    const double eps0 = 1e-7 * (upper - lower);

    double u = upper - eps0;
    double v = -eps0 * mu;
    const double dz = 5e-3;
    const double z_max = 5000.0;

    auto rhs = [&](double uu, double vv, double& du, double& dv) {
        du = vv;
        dv = -c * vv - f.eval(uu);
    };

    for (double z = 0.0; z < z_max; z += dz) {
        double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
        rhs(u, v, k1u, k1v);
        rhs(u + 0.5 * dz * k1u, v + 0.5 * dz * k1v, k2u, k2v);
        rhs(u + 0.5 * dz * k2u, v + 0.5 * dz * k2v, k3u, k3v);
        rhs(u + dz * k3u, v + dz * k3v, k4u, k4v);
        u += dz / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
        v += dz / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
        if (u < lower - band) return Shot::Undershoot;
        if (v >= 0.0 && u < upper - band && u > lower + band) return Shot::Turnback;
    }
    // still descending at z_max: treat as a stall in a valley (excess drag)
    return Shot::Turnback;
}

}  // namespace

double shooting_speed(const Polynomial& f, double upper, double lower, double c_lo,
                      double c_hi) {
    if (classify_shot(f, upper, lower, c_lo) != Shot::Undershoot)
        throw std::invalid_argument("shooting bracket: c_lo does not undershoot");
    if (classify_shot(f, upper, lower, c_hi) != Shot::Turnback)
        throw std::invalid_argument("shooting bracket: c_hi does not turn back");
    for (int it = 0; it < 60; ++it) {
        double c = 0.5 * (c_lo + c_hi);
        if (classify_shot(f, upper, lower, c) == Shot::Undershoot) c_lo = c;
        else c_hi = c;
    }
    return 0.5 * (c_lo + c_hi);
}

ShootingProfile shooting_profile(const Polynomial& f, double upper, double lower, double c_lo,
                                 double c_hi) {
    ShootingProfile prof;
    prof.speed = shooting_speed(f, upper, lower, c_lo, c_hi);
    const double c = prof.speed;
    const double fp_up = f.deriv_eval(upper);
    const double mu = 0.5 * (-c + std::sqrt(c * c - 4.0 * fp_up));
    const double eps0 = 1e-7 * (upper - lower);
    const double mid = 0.5 * (upper + lower);

    double u = upper - eps0;
    double v = -eps0 * mu;
    const double dz = 5e-3;
    auto rhs = [&](double uu, double vv, double& du, double& dv) {
        du = vv;
        dv = -c * vv - f.eval(uu);
    };
    std::vector<double> z_raw, u_raw;
    double z_mid = 0.0;
    bool seen_mid = false;
    for (double z = 0.0; z < 4000.0; z += dz) {
        z_raw.push_back(z);
        u_raw.push_back(u);
        double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
        rhs(u, v, k1u, k1v);
        rhs(u + 0.5 * dz * k1u, v + 0.5 * dz * k1v, k2u, k2v);
        rhs(u + 0.5 * dz * k2u, v + 0.5 * dz * k2v, k3u, k3v);
        rhs(u + dz * k3u, v + dz * k3v, k4u, k4v);
        double u_next = u + dz / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
        double v_next = v + dz / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
        if (!seen_mid && u >= mid && u_next < mid) {
            z_mid = z + dz * (u - mid) / (u - u_next);
            seen_mid = true;
        }
        u = u_next;
        v = v_next;
        if (u < lower + 1e-9 && std::abs(v) < 1e-9) break;
        if (u < lower - 0.05) break;
    }
    if (!seen_mid) throw std::runtime_error("shooting profile never crossed mid level");
    for (std::size_t i = 0; i < z_raw.size(); ++i) {
        prof.z.push_back(z_raw[i] - z_mid);
        prof.u.push_back(std::clamp(u_raw[i], lower, upper));
    }
    return prof;
}

std::pair<double, std::vector<double>> dense_principal_eigenpair(
    const terracelab::CellOperator& op, const std::vector<double>& potential) {
    Eigen::MatrixXd dense = Eigen::MatrixXd(op.assemble(potential));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("dense eigensolver failed");
    const auto& vals = solver.eigenvalues();
    int last = static_cast<int>(vals.size()) - 1;  // ascending order
    Eigen::VectorXd vec = solver.eigenvectors().col(last);
    if (vec.maxCoeff() < -vec.minCoeff()) vec = -vec;
    vec /= vec.maxCoeff();
    return {vals[last], std::vector<double>(vec.data(), vec.data() + vec.size())};
}

double poly_integral(const Polynomial& f, double lo, double hi) {
    const auto& c = f.coefficients();
    double acc = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        double p = static_cast<double>(i) + 1.0;
        acc += c[i] / p * (std::pow(hi, p) - std::pow(lo, p));
    }
    return acc;
}

}  // namespace oracle
