#include "hanle/reference_model.hpp"

#include <cmath>

namespace hanle {

bool ActiveRegion::contains(double b_x, double b_y) const {
    if (empty()) return true;
    for (const auto& hp : half_planes)
        if (hp.a * b_x + hp.b * b_y >= hp.c) return true;
    if (!sectors.empty()) {
        const double r = std::hypot(b_x, b_y);
        double theta = std::atan2(b_y, b_x) * 180.0 / M_PI;
        if (theta < 0.0) theta += 360.0;
        for (const auto& s : sectors) {
            if (r < s.r_min) continue;
            if (s.r_max > 0.0 && r > s.r_max) continue;
            double lo = std::fmod(s.theta_min_deg, 360.0);
            double hi = std::fmod(s.theta_max_deg, 360.0);
            if (lo < 0.0) lo += 360.0;
            if (hi < 0.0) hi += 360.0;
            const bool inside = (lo <= hi) ? (theta >= lo && theta <= hi)
                                           : (theta >= lo || theta <= hi);
            if (inside) return true;
        }
    }
    return false;
}

static void check_gamma(double gamma) {
    if (!(gamma > 0.0)) throw invalid_parameter("classic signal: gamma must be > 0");
}

static void check_omega(const Omega& omega) {
    if (!is_finite(omega.x) || !is_finite(omega.y) || !is_finite(omega.z))
        throw invalid_parameter("classic signal: non-finite omega");
}

double s_b_classic(const Omega& omega, double gamma) {
    check_gamma(gamma);
    check_omega(omega);
    const double g2 = gamma * gamma;
    const double wx2 = omega.x * omega.x;
    const double wyz2 = omega.yz_squared();
    const double num = gamma * omega.z * (g2 + 4.0 * wx2 + wyz2) -
                       omega.x * omega.y * (g2 + 4.0 * wx2 - 2.0 * wyz2);
    const double den = (g2 + wx2 + wyz2) * (g2 + 4.0 * wx2 + 4.0 * wyz2);
    return num / den;
}

double s_t_classic(const Omega& omega, double gamma) {
    check_gamma(gamma);
    check_omega(omega);
    const double g2 = gamma * gamma;
    const double wx2 = omega.x * omega.x;
    const double wyz2 = omega.yz_squared();
    const double q = wyz2 - 2.0 * wx2;
    const double num = g2 + q * q / g2 + 2.0 * wyz2 + 5.0 * wx2;
    const double den = (g2 + wx2 + wyz2) * (g2 + 4.0 * wx2 + 4.0 * wyz2);
    return num / den;
}

double s_b_classic(double w_x, double w_y, double w_z, double gamma) {
    return s_b_classic(Omega{w_x, w_y, w_z}, gamma);
}

double s_t_classic(double w_x, double w_y, double w_z, double gamma) {
    return s_t_classic(Omega{w_x, w_y, w_z}, gamma);
}

double effective_b_y(double b_y, const ModifiedModelParams& params) {
    if (!is_finite(b_y)) throw invalid_parameter("effective_b_y: non-finite b_y");
    const double mag = std::sqrt(b_y * b_y + params.b_y0 * params.b_y0);
    if (b_y > 0.0) return mag;
    if (b_y < 0.0) return -mag;
    return params.branch_sign * mag;
}

namespace {

struct ModifiedEval {
    Omega omega;
    double envelope;  // 0 when masked out
};

ModifiedEval modified_inputs(const FieldVector& field, const ModifiedModelParams& p) {
    if (!field.finite()) throw invalid_parameter("modified signal: non-finite field");
    ModifiedEval e;
    const double gamma_gyro = p.base.gamma_gyro;
    const double b_y_eff = effective_b_y(field.b_y, p);
    e.omega = Omega{gamma_gyro * field.b_x, p.k_aniso * gamma_gyro * b_y_eff,
                    gamma_gyro * field.b_z};
    if (!p.active_region.contains(field.b_x, field.b_y)) {
        e.envelope = 0.0;
        return e;
    }
    const double b_xy = std::hypot(field.b_x, field.b_y);
    e.envelope = std::max(0.0, 1.0 - p.decay_coeff * b_xy);
    return e;
}

}  // namespace

double s_b_modified(const FieldVector& field, const ModifiedModelParams& params) {
    const ModifiedEval e = modified_inputs(field, params);
    if (e.envelope == 0.0) return 0.0;
    return e.envelope * s_b_classic(e.omega, params.base.gamma2);
}

double s_t_modified(const FieldVector& field, const ModifiedModelParams& params) {
    const ModifiedEval e = modified_inputs(field, params);
    if (e.envelope == 0.0) return 0.0;
    return e.envelope * s_t_classic(e.omega, params.base.gamma2);
}

SignalPair signals_modified(const FieldVector& field, const ModifiedModelParams& params) {
    const ModifiedEval e = modified_inputs(field, params);
    if (e.envelope == 0.0) return SignalPair{0.0, 0.0};
    return SignalPair{e.envelope * s_b_classic(e.omega, params.base.gamma2),
                      e.envelope * s_t_classic(e.omega, params.base.gamma2)};
}

}  // namespace hanle
