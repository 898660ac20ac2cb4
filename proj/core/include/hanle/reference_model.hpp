// Closed-form alignment response (polarization rotation S_B and transmission
// S_T) and the phenomenologically modified variants used for map fitting.
// Proportionality constants are fixed to 1; amplitude scaling is a fit
// parameter in the analysis module.

#ifndef HANLE_REFERENCE_MODEL_HPP
#define HANLE_REFERENCE_MODEL_HPP

#include "hanle/types.hpp"

namespace hanle {

struct SignalPair {
    double s_b = 0.0;
    double s_t = 0.0;
    bool operator==(const SignalPair&) const = default;
};

// Classic polarization-rotation signal:
//   [G w_z (G^2 + 4w_x^2 + w_yz^2) - w_x w_y (G^2 + 4w_x^2 - 2w_yz^2)]
//   / [(G^2 + w_x^2 + w_yz^2)(G^2 + 4w_x^2 + 4w_yz^2)]
double s_b_classic(const Omega& omega, double gamma);

// Classic transmission signal:
//   [G^2 + (w_yz^2 - 2w_x^2)^2 / G^2 + 2w_yz^2 + 5w_x^2]
//   / [(G^2 + w_x^2 + w_yz^2)(G^2 + 4w_x^2 + 4w_yz^2)]
double s_t_classic(const Omega& omega, double gamma);

double s_b_classic(double w_x, double w_y, double w_z, double gamma);
double s_t_classic(double w_x, double w_y, double w_z, double gamma);

// Effective transverse field Sign(b_y) * sqrt(b_y^2 + b_y0^2); at b_y = 0
// the sign is taken from params.branch_sign.
double effective_b_y(double b_y, const ModifiedModelParams& params);

// Classic forms evaluated at (w_x, k * w_yEff, w_z), scaled by the linear
// decay envelope max(0, 1 - decay_coeff * |B_xy|) and zeroed outside the
// active region. The single relaxation rate of the classic forms is
// params.base.gamma2.
double s_b_modified(const FieldVector& field, const ModifiedModelParams& params);
double s_t_modified(const FieldVector& field, const ModifiedModelParams& params);
SignalPair signals_modified(const FieldVector& field, const ModifiedModelParams& params);

}  // namespace hanle

#endif
