// Threshold, branch and hysteresis analysis of the spontaneous-polarization
// subsystem: pitchfork amplitudes, bistable-region continuation, and
// branch-switch detection in slowly ramped field scans.

#ifndef HANLE_BIFURCATION_HPP
#define HANLE_BIFURCATION_HPP

#include <optional>
#include <string>
#include <vector>

#include "hanle/dynamics.hpp"
#include "hanle/types.hpp"

namespace hanle {

// Rate threshold for self-sustaining spontaneous polarization (strict).
inline bool threshold_check(const ModelRates& rates) { return rates.chi > rates.gamma1; }

// Steady spontaneous-orientation magnitude sqrt((chi - gamma1) / eta) above
// threshold, 0 at or below. Throws for eta = 0 above threshold (unbounded
// growth, saturation missing).
double pitchfork_amplitude(const ModelRates& rates);

enum class ControlParam { Chi, Bx, By };

std::string to_string(ControlParam c);
ControlParam control_from_string(const std::string& s);

struct BifurcationDiagram {
    ControlParam control = ControlParam::Chi;
    std::vector<double> control_values;
    // One entry per control value; points may be empty where the solver
    // failed (failures recorded per point, the sweep is not aborted).
    std::vector<std::vector<Equilibrium>> branches;
    std::vector<std::string> point_diagnostics;  // empty string = clean point
};

// Natural-parameter continuation: solves for all equilibria at each control
// value, warm-starting from the previous column's solutions.
BifurcationDiagram sweep_diagram(ControlParam control, double from, double to, int steps,
                                 const DynamicsConfig& cfg, const FieldVector& fixed_field);

// Forward-then-backward ramp of one field component. The backward leg starts
// from the forward leg's final state; the state memory across the turnaround
// is the phenomenon of interest.
struct HysteresisProtocol {
    char axis = 'x';            // 'x' or 'y': the ramped component
    double sweep_from = 0.0;    // nT
    double sweep_to = 0.0;      // nT
    double rate = 1.0;          // nT/s
    FieldVector fixed;          // non-ramped components
    int samples = 201;
    double settle_time = 0.0;   // hold at the start field before the forward leg
    // Initial P_z; when unset the seed is seed_eps * sign(initial B_y)
    // (or +seed_eps at B_y = 0).
    std::optional<double> prepared_p_z;
    double seed_eps = 1e-6;

    void validate() const;
};

struct HysteresisSample {
    double t = 0.0;
    FieldVector field;
    double signal = 0.0;
    SpinState state;
};

struct HysteresisReport {
    std::vector<HysteresisSample> forward_trace;
    std::vector<HysteresisSample> backward_trace;
    double loop_area = 0.0;
    std::vector<double> switch_points;  // control values where the branch flips
    bool bistable = false;
    bool valid = true;
    std::string diagnostic;
    // Relative tolerance (vs max |signal|) above which traces count as split.
    double split_tol = 0.01;
};

HysteresisReport hysteresis_scan(const HysteresisProtocol& ramp, const DynamicsConfig& cfg,
                                 const IntegratorSettings& settings);

}  // namespace hanle

#endif
