// Shared domain types and unit conventions.
//
// Unit convention: all relaxation/gain rates and angular frequencies are
// stored in the same linear-frequency unit (1/s). The gyromagnetic ratio is
// given in Hz/nT and omega_i = gamma_gyro * B_i; no 2*pi factors appear
// anywhere in the model.

#ifndef HANLE_TYPES_HPP
#define HANLE_TYPES_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hanle {

struct invalid_parameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Pole of the linear orientation response at chi = gamma1, omega_x = 0.
struct threshold_singularity : std::domain_error {
    using std::domain_error::domain_error;
};

inline bool is_finite(double v) { return std::isfinite(v); }

// External magnetic field, nanotesla.
struct FieldVector {
    double b_x = 0.0;
    double b_y = 0.0;
    double b_z = 0.0;

    bool finite() const { return is_finite(b_x) && is_finite(b_y) && is_finite(b_z); }
    bool operator==(const FieldVector&) const = default;
};

// Field components converted to precession frequencies (1/s).
struct Omega {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double yz_squared() const { return y * y + z * z; }
    bool operator==(const Omega&) const = default;
};

// All model rate constants. a_x is the stationary pump alignment R/gamma2.
struct ModelRates {
    double gamma_gyro = 3.5;  // Hz/nT, Cs default
    double gamma1 = 1.0;      // orientation relaxation, 1/s
    double gamma2 = 1.0;      // alignment relaxation, 1/s
    double chi = 0.0;         // spontaneous-polarization gain, 1/s
    double eta = 0.0;         // cubic saturation, 1/s per P^2
    double alpha = 0.0;       // alignment-to-orientation seeding, 1/s
    double xi = 0.7;          // detection-basis projection, dimensionless
    double pump_rate = 1.0;   // optical pumping rate R, 1/s
    double a_x = 1.0;         // stationary pump alignment, dimensionless

    static ModelRates from_pump(double pump_rate, double gamma2) {
        ModelRates r;
        r.pump_rate = pump_rate;
        r.gamma2 = gamma2;
        r.a_x = pump_rate / gamma2;
        return r;
    }

    void validate() const {
        if (!(gamma1 > 0.0) || !(gamma2 > 0.0))
            throw invalid_parameter("ModelRates: gamma1 and gamma2 must be positive");
        if (eta < 0.0) throw invalid_parameter("ModelRates: eta must be >= 0");
        if (pump_rate < 0.0) throw invalid_parameter("ModelRates: pump_rate must be >= 0");
        for (double v : {gamma_gyro, gamma1, gamma2, chi, eta, alpha, xi, pump_rate, a_x})
            if (!is_finite(v)) throw invalid_parameter("ModelRates: non-finite entry");
    }

    bool operator==(const ModelRates&) const = default;
};

// Dynamical variables of the reduced transverse model.
struct SpinState {
    double a_y = 0.0;
    double a_z = 0.0;
    double p_y = 0.0;
    double p_z = 0.0;

    bool finite() const {
        return is_finite(a_y) && is_finite(a_z) && is_finite(p_y) && is_finite(p_z);
    }
    bool operator==(const SpinState&) const = default;
};

// Half plane in the (B_x, B_y) plane: active where a*b_x + b*b_y >= c.
struct HalfPlane {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    bool operator==(const HalfPlane&) const = default;
};

// Angular sector in the (B_x, B_y) plane. Angles in degrees, radii in nT;
// r_max <= 0 means unbounded.
struct AngularSector {
    double theta_min_deg = 0.0;
    double theta_max_deg = 360.0;
    double r_min = 0.0;
    double r_max = -1.0;
    bool operator==(const AngularSector&) const = default;
};

// Union of half-plane and sector predicates. No predicates = whole plane.
struct ActiveRegion {
    std::vector<HalfPlane> half_planes;
    std::vector<AngularSector> sectors;

    bool empty() const { return half_planes.empty() && sectors.empty(); }
    bool contains(double b_x, double b_y) const;
    bool operator==(const ActiveRegion&) const = default;
};

// Phenomenological corrections applied on top of the classic signal forms.
// branch_sign resolves Sign(0) in the effective-field rule and is updated by
// the scan engine from the most recent nonzero B_y sign.
struct ModifiedModelParams {
    ModelRates base;
    double k_aniso = 1.0;      // y-axis scaling k = Gamma_y / Gamma_x
    double b_y0 = 0.0;         // internal effective field magnitude, nT
    double decay_coeff = 0.0;  // amplitude decay per |B_xy|, 1/nT
    ActiveRegion active_region;
    int branch_sign = +1;

    void validate() const {
        base.validate();
        if (!(k_aniso > 0.0)) throw invalid_parameter("ModifiedModelParams: k_aniso must be > 0");
        if (b_y0 < 0.0) throw invalid_parameter("ModifiedModelParams: b_y0 must be >= 0");
        if (decay_coeff < 0.0)
            throw invalid_parameter("ModifiedModelParams: decay_coeff must be >= 0");
        if (branch_sign != 1 && branch_sign != -1)
            throw invalid_parameter("ModifiedModelParams: branch_sign must be +1 or -1");
        for (double v : {k_aniso, b_y0, decay_coeff})
            if (!is_finite(v)) throw invalid_parameter("ModifiedModelParams: non-finite entry");
    }

    bool operator==(const ModifiedModelParams&) const = default;
};

// omega_i = gamma_gyro * B_i, exact and linear per component.
inline Omega omega_from_field(const FieldVector& field, const ModelRates& rates) {
    if (!field.finite()) throw invalid_parameter("omega_from_field: non-finite field");
    return Omega{rates.gamma_gyro * field.b_x, rates.gamma_gyro * field.b_y,
                 rates.gamma_gyro * field.b_z};
}

inline FieldVector field_from_omega(const Omega& omega, const ModelRates& rates) {
    if (rates.gamma_gyro == 0.0)
        throw invalid_parameter("field_from_omega: gamma_gyro must be nonzero");
    return FieldVector{omega.x / rates.gamma_gyro, omega.y / rates.gamma_gyro,
                       omega.z / rates.gamma_gyro};
}

}  // namespace hanle

#endif
