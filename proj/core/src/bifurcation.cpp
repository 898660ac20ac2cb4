#include "hanle/bifurcation.hpp"

#include <algorithm>
#include <cmath>

namespace hanle {

double pitchfork_amplitude(const ModelRates& rates) {
    rates.validate();
    if (rates.chi <= rates.gamma1) return 0.0;
    if (rates.eta <= 0.0)
        throw invalid_parameter(
            "pitchfork_amplitude: chi above threshold with eta = 0 has no bounded "
            "stationary amplitude");
    return std::sqrt((rates.chi - rates.gamma1) / rates.eta);
}

std::string to_string(ControlParam c) {
    switch (c) {
        case ControlParam::Chi: return "chi";
        case ControlParam::Bx: return "b_x";
        case ControlParam::By: return "b_y";
    }
    return "chi";
}

ControlParam control_from_string(const std::string& s) {
    if (s == "chi") return ControlParam::Chi;
    if (s == "b_x" || s == "bx") return ControlParam::Bx;
    if (s == "b_y" || s == "by") return ControlParam::By;
    throw invalid_parameter("unknown control parameter: " + s);
}

BifurcationDiagram sweep_diagram(ControlParam control, double from, double to, int steps,
                                 const DynamicsConfig& cfg, const FieldVector& fixed_field) {
    cfg.validate();
    if (from == to) steps = 1;
    if (steps < 1 || (steps < 2 && from != to))
        throw invalid_parameter("sweep_diagram: steps must be >= 2 for a nonzero range");

    BifurcationDiagram diagram;
    diagram.control = control;
    std::vector<SpinState> warm;
    for (int i = 0; i < steps; ++i) {
        const double v =
            (steps == 1) ? from : from + (to - from) * static_cast<double>(i) / (steps - 1);
        DynamicsConfig point_cfg = cfg;
        FieldVector field = fixed_field;
        switch (control) {
            case ControlParam::Chi: point_cfg.rates.chi = v; break;
            case ControlParam::Bx: field.b_x = v; break;
            case ControlParam::By: field.b_y = v; break;
        }
        const Omega omega = omega_from_field(field, point_cfg.rates);
        const EquilibriumSet set = steady_state_full(omega, point_cfg, warm);
        diagram.control_values.push_back(v);
        diagram.branches.push_back(set.equilibria);
        diagram.point_diagnostics.push_back(set.diagnostic);
        warm.clear();
        for (const Equilibrium& e : set.equilibria) warm.push_back(e.state);
    }
    return diagram;
}

void HysteresisProtocol::validate() const {
    if (axis != 'x' && axis != 'y')
        throw invalid_parameter("HysteresisProtocol: axis must be 'x' or 'y'");
    if (!(rate > 0.0) || !is_finite(rate))
        throw invalid_parameter("HysteresisProtocol: rate must be positive");
    if (sweep_from == sweep_to)
        throw invalid_parameter("HysteresisProtocol: sweep range must be nonzero");
    if (samples < 2) throw invalid_parameter("HysteresisProtocol: samples must be >= 2");
    if (settle_time < 0.0) throw invalid_parameter("HysteresisProtocol: settle_time < 0");
}

namespace {

FieldVector field_at(const HysteresisProtocol& p, double value) {
    FieldVector f = p.fixed;
    if (p.axis == 'x')
        f.b_x = value;
    else
        f.b_y = value;
    return f;
}

// Integrates one ramp leg, sampling `samples` evenly spaced points.
bool run_leg(const HysteresisProtocol& p, double from, double to, SpinState& state,
             const DynamicsConfig& cfg, const IntegratorSettings& settings,
             std::vector<HysteresisSample>& out, std::string& failure) {
    const double span = std::abs(to - from);
    const double duration = span / p.rate;
    const double dir = (to > from) ? 1.0 : -1.0;
    const ModelRates& rates = cfg.rates;
    OmegaRamp ramp = [&](double t) {
        return omega_from_field(field_at(p, from + dir * p.rate * t), rates);
    };
    double t_prev = 0.0;
    for (int i = 0; i < p.samples; ++i) {
        const double t_i = duration * static_cast<double>(i) / (p.samples - 1);
        if (t_i > t_prev) {
            if (!advance(state, t_prev, t_i, ramp, cfg, settings, &failure)) return false;
            t_prev = t_i;
        }
        HysteresisSample s;
        s.t = t_i;
        s.field = field_at(p, from + dir * p.rate * t_i);
        s.state = state;
        s.signal = detected_signal(state, rates);
        out.push_back(s);
    }
    return true;
}

double control_value(const HysteresisSample& s, char axis) {
    return axis == 'x' ? s.field.b_x : s.field.b_y;
}

// A switch is a P_z zero crossing that settles beyond the deadband on the
// other side; the reported control value is the interpolated crossing.
void detect_switches(const std::vector<HysteresisSample>& trace, char axis, double deadband,
                     std::vector<double>& out) {
    int last_sign = 0;
    size_t last_idx = 0;
    for (size_t i = 0; i < trace.size(); ++i) {
        const double p = trace[i].state.p_z;
        if (std::abs(p) <= deadband) continue;
        const int s = (p > 0.0) ? 1 : -1;
        if (last_sign != 0 && s != last_sign) {
            double c = control_value(trace[i], axis);
            for (size_t k = last_idx; k < i; ++k) {
                const double p0 = trace[k].state.p_z;
                const double p1 = trace[k + 1].state.p_z;
                if (p0 * p1 <= 0.0 && p0 != p1) {
                    const double w = p0 / (p0 - p1);
                    c = control_value(trace[k], axis) +
                        w * (control_value(trace[k + 1], axis) - control_value(trace[k], axis));
                    break;
                }
            }
            out.push_back(c);
        }
        last_sign = s;
        last_idx = i;
    }
}

}  // namespace

HysteresisReport hysteresis_scan(const HysteresisProtocol& ramp, const DynamicsConfig& cfg,
                                 const IntegratorSettings& settings) {
    ramp.validate();
    cfg.validate();
    settings.validate();

    HysteresisReport report;
    const ModelRates& rates = cfg.rates;

    SpinState state;
    if (ramp.prepared_p_z) {
        state.p_z = *ramp.prepared_p_z;
    } else {
        const double by0 = field_at(ramp, ramp.sweep_from).b_y;
        state.p_z = ramp.seed_eps * (by0 < 0.0 ? -1.0 : 1.0);
    }

    std::string failure;
    if (ramp.settle_time > 0.0) {
        const Omega w0 = omega_from_field(field_at(ramp, ramp.sweep_from), rates);
        OmegaRamp hold = [w0](double) { return w0; };
        if (!advance(state, 0.0, ramp.settle_time, hold, cfg, settings, &failure)) {
            report.valid = false;
            report.diagnostic = "settle failed: " + failure;
            return report;
        }
    }

    if (!run_leg(ramp, ramp.sweep_from, ramp.sweep_to, state, cfg, settings,
                 report.forward_trace, failure)) {
        report.valid = false;
        report.diagnostic = "forward leg failed: " + failure;
        return report;
    }
    if (!run_leg(ramp, ramp.sweep_to, ramp.sweep_from, state, cfg, settings,
                 report.backward_trace, failure)) {
        report.valid = false;
        report.diagnostic = "backward leg failed: " + failure;
        return report;
    }

    // Align the backward trace by control value (it is the forward sampling
    // reversed) and compare.
    const size_t n = report.forward_trace.size();
    double max_abs = 0.0;
    for (const auto& s : report.forward_trace) max_abs = std::max(max_abs, std::abs(s.signal));
    for (const auto& s : report.backward_trace) max_abs = std::max(max_abs, std::abs(s.signal));

    double area = 0.0;
    int split_run = 0, best_run = 0;
    for (size_t i = 0; i < n; ++i) {
        const double diff =
            report.forward_trace[i].signal - report.backward_trace[n - 1 - i].signal;
        if (std::abs(diff) > report.split_tol * std::max(max_abs, 1e-300)) {
            ++split_run;
            best_run = std::max(best_run, split_run);
        } else {
            split_run = 0;
        }
        if (i + 1 < n) {
            const double diff_next =
                report.forward_trace[i + 1].signal - report.backward_trace[n - 2 - i].signal;
            const double db = control_value(report.forward_trace[i + 1], ramp.axis) -
                              control_value(report.forward_trace[i], ramp.axis);
            area += 0.5 * (diff + diff_next) * db;
        }
    }
    report.loop_area = std::abs(area);
    report.bistable = best_run >= 3;

    double deadband = 0.0;
    if (threshold_check(rates) && rates.eta > 0.0 && cfg.sp_terms())
        deadband = 0.1 * pitchfork_amplitude(rates);
    if (deadband > 0.0) {
        detect_switches(report.forward_trace, ramp.axis, deadband, report.switch_points);
        detect_switches(report.backward_trace, ramp.axis, deadband, report.switch_points);
    }
    return report;
}

}  // namespace hanle
