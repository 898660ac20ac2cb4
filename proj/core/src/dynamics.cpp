#include "hanle/dynamics.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

namespace hanle {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::SP: return "sp";
        case Variant::AOC: return "aoc";
        case Variant::Both: return "both";
    }
    return "sp";
}

Variant variant_from_string(const std::string& s) {
    if (s == "sp") return Variant::SP;
    if (s == "aoc") return Variant::AOC;
    if (s == "both") return Variant::Both;
    throw invalid_parameter("unknown dynamics variant: " + s);
}

SpinState rhs(const SpinState& s, const Omega& omega, const DynamicsConfig& cfg) {
    const ModelRates& r = cfg.rates;
    SpinState d;
    d.a_y = omega.x * s.a_z - r.gamma2 * s.a_y;
    d.a_z = omega.y * r.a_x - omega.x * s.a_y - (r.gamma2 + cfg.aoc_term()) * s.a_z;
    d.p_y = omega.x * s.p_z - r.gamma1 * s.p_y;
    d.p_z = -omega.x * s.p_y - r.gamma1 * s.p_z + r.alpha * s.a_z;
    if (cfg.sp_terms()) d.p_z += r.chi * s.p_z - r.eta * s.p_z * s.p_z * s.p_z;
    return d;
}

namespace {

using Vec4 = std::array<double, 4>;

inline Vec4 to_vec(const SpinState& s) { return {s.a_y, s.a_z, s.p_y, s.p_z}; }
inline SpinState to_state(const Vec4& v) { return SpinState{v[0], v[1], v[2], v[3]}; }

inline Vec4 deriv(const Vec4& y, double t, const OmegaRamp& omega_of_t,
                  const DynamicsConfig& cfg) {
    return to_vec(rhs(to_state(y), omega_of_t(t), cfg));
}

inline bool finite4(const Vec4& y) {
    return is_finite(y[0]) && is_finite(y[1]) && is_finite(y[2]) && is_finite(y[3]);
}

inline double inf_norm(const Vec4& y) {
    return std::max(std::max(std::abs(y[0]), std::abs(y[1])),
                    std::max(std::abs(y[2]), std::abs(y[3])));
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// Error coefficients: b - b_hat (4th-order embedded solution).
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct StepResult {
    Vec4 y;
    double error;  // scaled error norm, accept when <= 1
    Vec4 k_last;   // derivative at the end point (FSAL)
};

StepResult dopri_step(const Vec4& y, const Vec4& k1, double t, double h,
                      const OmegaRamp& omega_of_t, const DynamicsConfig& cfg,
                      const IntegratorSettings& st) {
    Vec4 y2, y3, y4, y5, y6, y7;
    for (int i = 0; i < 4; ++i) y2[i] = y[i] + h * a21 * k1[i];
    const Vec4 k2 = deriv(y2, t + c2 * h, omega_of_t, cfg);
    for (int i = 0; i < 4; ++i) y3[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    const Vec4 k3 = deriv(y3, t + c3 * h, omega_of_t, cfg);
    for (int i = 0; i < 4; ++i) y4[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    const Vec4 k4 = deriv(y4, t + c4 * h, omega_of_t, cfg);
    for (int i = 0; i < 4; ++i)
        y5[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    const Vec4 k5 = deriv(y5, t + c5 * h, omega_of_t, cfg);
    for (int i = 0; i < 4; ++i)
        y6[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const Vec4 k6 = deriv(y6, t + h, omega_of_t, cfg);
    for (int i = 0; i < 4; ++i)
        y7[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    const Vec4 k7 = deriv(y7, t + h, omega_of_t, cfg);

    double err2 = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double e =
            h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double sc = st.abs_tol + st.rel_tol * std::max(std::abs(y[i]), std::abs(y7[i]));
        const double q = e / sc;
        err2 += q * q;
    }
    return StepResult{y7, std::sqrt(err2 / 4.0), k7};
}

Vec4 rk4_step(const Vec4& y, double t, double h, const OmegaRamp& omega_of_t,
              const DynamicsConfig& cfg) {
    const Vec4 k1 = deriv(y, t, omega_of_t, cfg);
    Vec4 ytmp;
    for (int i = 0; i < 4; ++i) ytmp[i] = y[i] + 0.5 * h * k1[i];
    const Vec4 k2 = deriv(ytmp, t + 0.5 * h, omega_of_t, cfg);
    for (int i = 0; i < 4; ++i) ytmp[i] = y[i] + 0.5 * h * k2[i];
    const Vec4 k3 = deriv(ytmp, t + 0.5 * h, omega_of_t, cfg);
    for (int i = 0; i < 4; ++i) ytmp[i] = y[i] + h * k3[i];
    const Vec4 k4 = deriv(ytmp, t + h, omega_of_t, cfg);
    Vec4 out;
    for (int i = 0; i < 4; ++i)
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

double initial_step(const Vec4& y, const Vec4& k1, const DynamicsConfig& cfg,
                    const IntegratorSettings& st, const Omega& omega0) {
    const double rate = std::max({cfg.rates.gamma1, cfg.rates.gamma2 + cfg.aoc_term(),
                                  std::abs(cfg.rates.chi), std::abs(omega0.x),
                                  std::abs(omega0.y), inf_norm(k1)});
    double h = (rate > 0.0) ? 0.01 / rate : 1e-3;
    return std::min(h, st.max_step);
}

constexpr double kStateBound = 1e12;

struct Driver {
    Vec4 y;
    double t = 0.0;
    bool failed = false;
    std::string failure;

    // Advances to t_end (within rounding of the final step); on failure
    // leaves the last accepted state.
    template <typename OnStep>
    void run(double t_end, const OmegaRamp& omega_of_t, const DynamicsConfig& cfg,
             const IntegratorSettings& st, OnStep&& on_step) {
        const double t_eps = 1e-14 * std::max(1.0, std::abs(t_end));
        if (st.fixed_step > 0.0) {
            while (t_end - t > t_eps) {
                const double h = std::min(st.fixed_step, t_end - t);
                const Vec4 ynew = rk4_step(y, t, h, omega_of_t, cfg);
                if (!finite4(ynew) || inf_norm(ynew) > kStateBound) {
                    failed = true;
                    failure = "non-finite or unbounded state in fixed-step integration";
                    return;
                }
                y = ynew;
                t += h;
                if (!on_step()) return;
            }
            return;
        }

        Vec4 k1 = deriv(y, t, omega_of_t, cfg);
        double h = initial_step(y, k1, cfg, st, omega_of_t(t));
        double prev_err = 1.0;
        const double h_floor = 1e-14;
        while (t_end - t > t_eps) {
            if (h < h_floor * std::max(1.0, std::abs(t))) {
                failed = true;
                failure = "step size underflow";
                return;
            }
            const double h_eff = std::min({h, st.max_step, t_end - t});
            const StepResult r = dopri_step(y, k1, t, h_eff, omega_of_t, cfg, st);
            if (!finite4(r.y) || inf_norm(r.y) > kStateBound) {
                // Shrink and retry; give up once the step degenerates.
                h = 0.25 * h_eff;
                continue;
            }
            if (r.error <= 1.0) {
                t += h_eff;
                y = r.y;
                k1 = r.k_last;  // FSAL
                const double fac =
                    0.9 * std::pow(std::max(r.error, 1e-10), -0.7 / 5.0) *
                    std::pow(std::max(prev_err, 1e-10), 0.4 / 5.0);
                h = h_eff * std::clamp(fac, 0.2, 5.0);
                prev_err = std::max(r.error, 1e-10);
                if (!on_step()) return;
            } else {
                h = h_eff * std::max(0.2, 0.9 * std::pow(r.error, -0.2));
            }
        }
    }
};

Trajectory integrate_impl(const SpinState& initial, const OmegaRamp& omega_of_t,
                          const DynamicsConfig& cfg, const IntegratorSettings& settings,
                          bool constant_omega) {
    cfg.validate();
    settings.validate();
    if (!initial.finite()) throw invalid_parameter("integrate: non-finite initial state");

    Trajectory traj;
    if (std::abs(omega_of_t(0.0).z) > 0.0)
        traj.warnings.push_back("omega.z != 0 is ignored by the reduced dynamics");

    Driver d;
    d.y = to_vec(initial);
    traj.points.push_back({0.0, initial});

    d.run(settings.max_time, omega_of_t, cfg, settings, [&]() {
        traj.points.push_back({d.t, to_state(d.y)});
        if (constant_omega) {
            const Vec4 f = deriv(d.y, d.t, omega_of_t, cfg);
            if (inf_norm(f) < settings.convergence_eps) {
                traj.reached_steady_state = true;
                return false;
            }
        }
        return true;
    });

    traj.failed = d.failed;
    traj.failure = d.failure;
    traj.last_good = to_state(d.y);
    traj.t_last = d.t;
    return traj;
}

}  // namespace

Trajectory integrate(const SpinState& initial, const Omega& omega, const DynamicsConfig& cfg,
                     const IntegratorSettings& settings) {
    return integrate_impl(
        initial, [omega](double) { return omega; }, cfg, settings, true);
}

Trajectory integrate(const SpinState& initial, const OmegaRamp& omega_of_t,
                     const DynamicsConfig& cfg, const IntegratorSettings& settings) {
    return integrate_impl(initial, omega_of_t, cfg, settings, false);
}

bool advance(SpinState& state, double t0, double t1, const OmegaRamp& omega_of_t,
             const DynamicsConfig& cfg, const IntegratorSettings& settings,
             std::string* failure) {
    if (t1 <= t0) return true;
    Driver d;
    d.y = {state.a_y, state.a_z, state.p_y, state.p_z};
    d.t = t0;
    d.run(t1, omega_of_t, cfg, settings, []() { return true; });
    state = SpinState{d.y[0], d.y[1], d.y[2], d.y[3]};
    if (d.failed && failure) *failure = d.failure;
    return !d.failed;
}

SpinState steady_state_linear(const Omega& omega, const DynamicsConfig& cfg) {
    cfg.validate();
    const ModelRates& r = cfg.rates;
    const double wx = omega.x, wy = omega.y;
    const double d2 = r.gamma2 * (r.gamma2 + cfg.aoc_term()) + wx * wx;
    SpinState s;
    s.a_z = r.gamma2 * wy * r.a_x / d2;
    s.a_y = wx * wy * r.a_x / d2;

    const double chi_eff = cfg.sp_terms() ? r.chi : 0.0;
    const double d1 = r.gamma1 * r.gamma1 - chi_eff * r.gamma1 + wx * wx;
    const double d1_scale = r.gamma1 * r.gamma1 + std::abs(chi_eff) * r.gamma1 + wx * wx;
    if (std::abs(d1) <= 1e-14 * d1_scale)
        throw threshold_singularity(
            "linear orientation response is singular (chi at the SP threshold)");
    s.p_z = r.alpha * r.gamma1 * s.a_z / d1;
    s.p_y = (wx / r.gamma1) * s.p_z;
    return s;
}

namespace {

Eigen::Matrix4d jacobian(const SpinState& s, const Omega& omega, const DynamicsConfig& cfg) {
    const ModelRates& r = cfg.rates;
    const double wx = omega.x;
    const double chi_eff = cfg.sp_terms() ? r.chi : 0.0;
    const double eta_eff = cfg.sp_terms() ? r.eta : 0.0;
    Eigen::Matrix4d j = Eigen::Matrix4d::Zero();
    j(0, 0) = -r.gamma2;
    j(0, 1) = wx;
    j(1, 0) = -wx;
    j(1, 1) = -(r.gamma2 + cfg.aoc_term());
    j(2, 2) = -r.gamma1;
    j(2, 3) = wx;
    j(3, 1) = r.alpha;
    j(3, 2) = -wx;
    j(3, 3) = chi_eff - r.gamma1 - 3.0 * eta_eff * s.p_z * s.p_z;
    return j;
}

bool newton_solve(SpinState& x, const Omega& omega, const DynamicsConfig& cfg, double tol) {
    auto resid_norm = [&](const SpinState& s) {
        const SpinState f = rhs(s, omega, cfg);
        return std::max(std::max(std::abs(f.a_y), std::abs(f.a_z)),
                        std::max(std::abs(f.p_y), std::abs(f.p_z)));
    };
    for (int iter = 0; iter < 100; ++iter) {
        const SpinState f = rhs(x, omega, cfg);
        const double fn = std::max(std::max(std::abs(f.a_y), std::abs(f.a_z)),
                                   std::max(std::abs(f.p_y), std::abs(f.p_z)));
        if (fn < tol) return true;
        Eigen::Vector4d fv(f.a_y, f.a_z, f.p_y, f.p_z);
        const Eigen::Matrix4d j = jacobian(x, omega, cfg);
        Eigen::Vector4d step = j.partialPivLu().solve(-fv);
        if (!step.allFinite()) return false;
        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k < 30; ++k) {
            SpinState trial{x.a_y + lambda * step(0), x.a_z + lambda * step(1),
                            x.p_y + lambda * step(2), x.p_z + lambda * step(3)};
            if (trial.finite() && resid_norm(trial) < (1.0 - 1e-4 * lambda) * fn) {
                x = trial;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) return resid_norm(x) < tol;
    }
    return resid_norm(x) < tol;
}

}  // namespace

EquilibriumSet steady_state_full(const Omega& omega, const DynamicsConfig& cfg,
                                 const std::vector<SpinState>& extra_seeds) {
    cfg.validate();
    EquilibriumSet out;
    if (std::abs(omega.z) > 0.0)
        out.warnings.push_back("omega.z != 0 is ignored by the reduced dynamics");

    const ModelRates& r = cfg.rates;
    std::vector<SpinState> seeds;
    seeds.push_back(SpinState{});
    try {
        seeds.push_back(steady_state_linear(omega, cfg));
    } catch (const threshold_singularity&) {
    }
    const double chi_eff = cfg.sp_terms() ? r.chi : 0.0;
    if (cfg.sp_terms() && r.eta > 0.0 && chi_eff > r.gamma1) {
        const double p = std::sqrt((chi_eff - r.gamma1) / r.eta);
        // Alignment equilibrium is unique; seed it exactly.
        const double d2 = r.gamma2 * (r.gamma2 + cfg.aoc_term()) + omega.x * omega.x;
        const double az = r.gamma2 * omega.y * r.a_x / d2;
        const double ay = omega.x * omega.y * r.a_x / d2;
        seeds.push_back(SpinState{ay, az, omega.x * p / r.gamma1, p});
        seeds.push_back(SpinState{ay, az, -omega.x * p / r.gamma1, -p});
    }
    seeds.insert(seeds.end(), extra_seeds.begin(), extra_seeds.end());

    const double rate_scale = std::max(r.gamma1, r.gamma2);
    const double stab_tol = 1e-9 * rate_scale;

    for (const SpinState& seed : seeds) {
        SpinState x = seed;
        const double tol =
            1e-12 * rate_scale *
            std::max(1.0, std::max(std::max(std::abs(x.a_y), std::abs(x.a_z)),
                                   std::max(std::abs(x.p_y), std::abs(x.p_z))));
        if (!newton_solve(x, omega, cfg, tol)) continue;
        const double xs = std::max({1.0, std::abs(x.a_y), std::abs(x.a_z), std::abs(x.p_y),
                                    std::abs(x.p_z)});
        bool duplicate = false;
        for (const Equilibrium& e : out.equilibria) {
            const double d = std::max(
                std::max(std::abs(e.state.a_y - x.a_y), std::abs(e.state.a_z - x.a_z)),
                std::max(std::abs(e.state.p_y - x.p_y), std::abs(e.state.p_z - x.p_z)));
            if (d < 1e-7 * xs) {
                duplicate = true;
                break;
            }
        }
        if (duplicate) continue;

        Equilibrium eq;
        eq.state = x;
        const Eigen::Matrix4d j = jacobian(x, omega, cfg);
        const Eigen::EigenSolver<Eigen::Matrix4d> es(j);
        bool stable = true;
        for (int i = 0; i < 4; ++i) {
            eq.eig_real[i] = es.eigenvalues()(i).real();
            if (eq.eig_real[i] > stab_tol) stable = false;
        }
        eq.stable = stable;
        out.equilibria.push_back(eq);
    }

    if (out.equilibria.empty())
        out.diagnostic = "Newton iteration did not converge from any seed";
    return out;
}

double detected_signal(const SpinState& state, const ModelRates& rates) {
    return state.a_y + rates.xi * state.p_y;
}

double a_p_closed_form(const Omega& omega, const DynamicsConfig& cfg) {
    cfg.validate();
    const ModelRates& r = cfg.rates;
    const double wx = omega.x, wy = omega.y;
    const double num = wx * wy * r.alpha * r.xi * r.gamma2 * r.a_x;
    const double d_align = r.gamma2 * (r.gamma2 + cfg.aoc_term()) + wx * wx;
    const double chi_eff = cfg.sp_terms() ? r.chi : 0.0;
    const double d_orient = r.gamma1 * r.gamma1 - chi_eff * r.gamma1 + wx * wx;
    const double d_scale = r.gamma1 * r.gamma1 + std::abs(chi_eff) * r.gamma1 + wx * wx;
    if (std::abs(d_orient) <= 1e-14 * d_scale)
        throw threshold_singularity("a_p_closed_form: orientation denominator vanishes");
    return num / (d_align * d_orient);
}

}  // namespace hanle
