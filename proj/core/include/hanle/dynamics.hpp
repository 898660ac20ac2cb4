// Reduced transverse spin dynamics: alignment quadratures (A_y, A_z) driven
// by the pump alignment A_x, orientation quadratures (P_y, P_z) with
// spontaneous-polarization gain, cubic saturation and alignment seeding.
// B_z is assumed zero throughout; a nonzero omega.z is ignored with a
// warning on the integration report.

#ifndef HANLE_DYNAMICS_HPP
#define HANLE_DYNAMICS_HPP

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "hanle/types.hpp"

namespace hanle {

enum class Variant { SP, AOC, Both };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct DynamicsConfig {
    ModelRates rates;
    double aoc_alpha = 0.0;  // dissipative alignment-to-orientation term, 0 disables
    Variant variant = Variant::SP;

    void validate() const {
        rates.validate();
        if (aoc_alpha < 0.0 || !is_finite(aoc_alpha))
            throw invalid_parameter("DynamicsConfig: aoc_alpha must be finite and >= 0");
    }

    // Dissipative AOC term is active in AOC/Both variants only.
    double aoc_term() const {
        return (variant == Variant::AOC || variant == Variant::Both) ? aoc_alpha : 0.0;
    }
    // Gain and saturation are active in SP/Both variants only.
    bool sp_terms() const { return variant == Variant::SP || variant == Variant::Both; }

    bool operator==(const DynamicsConfig&) const = default;
};

struct IntegratorSettings {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    double max_step = 1e30;
    double max_time = 1e4;
    double convergence_eps = 1e-9;  // steady state when ||rhs||_inf drops below
    double fixed_step = 0.0;        // > 0 selects the deterministic RK4 mode

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(max_step > 0.0) || !(max_time > 0.0) ||
            !(convergence_eps > 0.0))
            throw invalid_parameter("IntegratorSettings: all tolerances must be positive");
        if (fixed_step < 0.0) throw invalid_parameter("IntegratorSettings: fixed_step < 0");
    }
};

// Time derivative of the state. Only omega.x and omega.y enter.
SpinState rhs(const SpinState& state, const Omega& omega, const DynamicsConfig& cfg);

using OmegaRamp = std::function<Omega(double)>;

struct TrajectoryPoint {
    double t = 0.0;
    SpinState state;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;  // includes the initial and final state
    bool reached_steady_state = false;
    bool failed = false;
    std::string failure;       // set when failed
    SpinState last_good;       // last accepted state (== final state when !failed)
    double t_last = 0.0;
    std::vector<std::string> warnings;

    const SpinState& final_state() const { return last_good; }
};

// Integrates from t = 0 to settings.max_time with an adaptive embedded
// Dormand-Prince 5(4) pair and PI step control, or with fixed-step classic
// RK4 when settings.fixed_step > 0. Constant-omega runs stop early once
// ||rhs||_inf < convergence_eps.
Trajectory integrate(const SpinState& initial, const Omega& omega, const DynamicsConfig& cfg,
                     const IntegratorSettings& settings);
Trajectory integrate(const SpinState& initial, const OmegaRamp& omega_of_t,
                     const DynamicsConfig& cfg, const IntegratorSettings& settings);

// Advances `state` in place from t0 to t1 without recording; returns false
// (and leaves the last good state in `state`) on integration failure.
bool advance(SpinState& state, double t0, double t1, const OmegaRamp& omega_of_t,
             const DynamicsConfig& cfg, const IntegratorSettings& settings,
             std::string* failure = nullptr);

// Closed-form stationary state of the linearized system (eta treated as 0).
// Throws threshold_singularity at the pole of the orientation response.
SpinState steady_state_linear(const Omega& omega, const DynamicsConfig& cfg);

struct Equilibrium {
    SpinState state;
    bool stable = false;
    std::array<double, 4> eig_real{};  // real parts of the Jacobian spectrum
};

struct EquilibriumSet {
    std::vector<Equilibrium> equilibria;
    std::string diagnostic;  // set when empty
    std::vector<std::string> warnings;
};

// All roots of rhs = 0 found by damped Newton iteration from multiple seeds
// (origin, linear steady state, +/- pitchfork estimate, caller extras),
// deduplicated and labeled by Jacobian eigenvalues.
EquilibriumSet steady_state_full(const Omega& omega, const DynamicsConfig& cfg,
                                 const std::vector<SpinState>& extra_seeds = {});

// Observed polarization-rotation signal A_y + xi * P_y.
double detected_signal(const SpinState& state, const ModelRates& rates);

// Closed-form orientation contribution A_P = xi * P_y in the linear regime.
// SP variant:   w_x w_y alpha xi G2 A_x / [(G2^2 + w_x^2)(G1^2 - chi G1 + w_x^2)]
// AOC variant:  same numerator / [(G2 (G2 + aoc) + w_x^2)(G1^2 + w_x^2)]
// Both:         AOC first denominator with the chi term kept.
double a_p_closed_form(const Omega& omega, const DynamicsConfig& cfg);

}  // namespace hanle

#endif
