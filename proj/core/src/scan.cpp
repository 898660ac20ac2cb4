#include "hanle/scan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hanle/parallel.hpp"

namespace hanle {

std::string to_string(ScanKind k) {
    switch (k) {
        case ScanKind::LineX: return "line_x";
        case ScanKind::LineY: return "line_y";
        case ScanKind::GridXY: return "grid_xy";
        case ScanKind::Radial: return "radial";
    }
    return "line_x";
}

std::string to_string(Engine e) { return e == Engine::ClosedForm ? "closed" : "ode"; }

ScanKind scan_kind_from_string(const std::string& s) {
    if (s == "line_x") return ScanKind::LineX;
    if (s == "line_y") return ScanKind::LineY;
    if (s == "grid_xy") return ScanKind::GridXY;
    if (s == "radial") return ScanKind::Radial;
    throw invalid_parameter("unknown scan kind: " + s);
}

Engine engine_from_string(const std::string& s) {
    if (s == "closed" || s == "closed_form") return Engine::ClosedForm;
    if (s == "ode") return Engine::Ode;
    throw invalid_parameter("unknown engine: " + s);
}

void ScanProtocol::validate() const {
    if (kind == ScanKind::LineX || kind == ScanKind::LineY) {
        if (!is_finite(sweep_min) || !is_finite(sweep_max) || sweep_min == sweep_max)
            throw invalid_parameter("ScanProtocol: sweep range must be finite and nonzero");
        if (samples < 2) throw invalid_parameter("ScanProtocol: samples must be >= 2");
    }
    if (kind == ScanKind::GridXY) {
        if (grid_bx_steps < 1 || grid_by_steps < 1)
            throw invalid_parameter("ScanProtocol: grid steps must be >= 1");
    }
    if (kind == ScanKind::Radial) {
        if (!(radius > 0.0)) throw invalid_parameter("ScanProtocol: radius must be > 0");
        if (!(angle_step_deg > 0.0))
            throw invalid_parameter("ScanProtocol: angle step must be > 0");
        const double ratio = 360.0 / angle_step_deg;
        if (std::abs(ratio - std::round(ratio)) > 1e-9)
            throw invalid_parameter("ScanProtocol: angle step must divide 360");
        if (samples < 2) throw invalid_parameter("ScanProtocol: samples must be >= 2");
    }
    if (engine == Engine::Ode && !(sweep_rate > 0.0))
        throw invalid_parameter("ScanProtocol: sweep_rate must be > 0 in ODE mode");
    if (smooth_window != 0 && (smooth_window < 0 || smooth_window % 2 == 0))
        throw invalid_parameter("ScanProtocol: smooth_window must be odd or 0");
    if (settle_time < 0.0) throw invalid_parameter("ScanProtocol: settle_time must be >= 0");
}

namespace {

// Parametrized field path with uniform sampling: line sweeps and radial rays
// share the machinery.
struct FieldPath {
    std::function<FieldVector(double)> at;  // u in [0, 1]
    double length_nt = 0.0;                 // swept length for rate -> duration
};

FieldPath line_path(const ScanProtocol& p) {
    const bool along_x = (p.kind != ScanKind::LineY);
    const double from = p.backward ? p.sweep_max : p.sweep_min;
    const double to = p.backward ? p.sweep_min : p.sweep_max;
    FieldVector base = p.fixed;
    FieldPath path;
    path.length_nt = std::abs(to - from);
    path.at = [base, from, to, along_x](double u) {
        FieldVector f = base;
        const double v = from + (to - from) * u;
        if (along_x)
            f.b_x = v;
        else
            f.b_y = v;
        return f;
    };
    return path;
}

FieldPath ray_path(const ScanProtocol& p, double theta_deg) {
    const double th = theta_deg * M_PI / 180.0;
    const double cx = std::cos(th), sy = std::sin(th);
    const double r_end = p.through_center ? -p.radius : 0.0;
    const double r0 = p.radius;
    FieldVector base = p.fixed;
    FieldPath path;
    path.length_nt = std::abs(r0 - r_end);
    path.at = [base, r0, r_end, cx, sy](double u) {
        FieldVector f = base;
        const double r = r0 + (r_end - r0) * u;
        f.b_x = r * cx;
        f.b_y = r * sy;
        return f;
    };
    return path;
}

ScanTrace run_closed_form(const ScanProtocol& p, const FieldPath& path, int samples,
                          const ModifiedModelParams& params_in) {
    ScanTrace trace;
    trace.kind = p.kind;
    trace.engine = Engine::ClosedForm;
    ModifiedModelParams params = params_in;
    trace.samples.reserve(static_cast<size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        const double u = static_cast<double>(i) / (samples - 1);
        ScanSample s;
        s.t = static_cast<double>(i);
        s.field = path.at(u);
        if (s.field.b_y > 0.0)
            params.branch_sign = +1;
        else if (s.field.b_y < 0.0)
            params.branch_sign = -1;
        const SignalPair sig = signals_modified(s.field, params);
        s.s_b = sig.s_b;
        s.s_t = sig.s_t;
        trace.samples.push_back(s);
    }
    return trace;
}

ScanTrace run_ode(const ScanProtocol& p, const FieldPath& path, int samples,
                  const ScanModel& model, SpinState* state_io) {
    ScanTrace trace;
    trace.kind = p.kind;
    trace.engine = Engine::Ode;

    const ModelRates& rates = model.dynamics.rates;
    const double duration = path.length_nt / p.sweep_rate;
    OmegaRamp ramp = [&path, &rates, duration](double t) {
        return omega_from_field(path.at(std::clamp(t / duration, 0.0, 1.0)), rates);
    };

    SpinState state;
    if (state_io) {
        state = *state_io;
    } else {
        const double by0 = path.at(0.0).b_y;
        state.p_z = p.seed_eps * (by0 < 0.0 ? -1.0 : 1.0);
    }
    if (path.at(0.0).b_z != 0.0)
        trace.notes.push_back("b_z != 0 is ignored by the ODE engine");

    std::string failure;
    if (p.settle_time > 0.0) {
        const Omega w0 = omega_from_field(path.at(0.0), rates);
        OmegaRamp hold = [w0](double) { return w0; };
        if (!advance(state, 0.0, p.settle_time, hold, model.dynamics, model.integ, &failure)) {
            trace.truncated = true;
            trace.diagnostic = "settle failed: " + failure;
            if (state_io) *state_io = state;
            return trace;
        }
    }

    double t_prev = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double t_i = duration * static_cast<double>(i) / (samples - 1);
        if (t_i > t_prev) {
            if (!advance(state, t_prev, t_i, ramp, model.dynamics, model.integ, &failure)) {
                trace.truncated = true;
                trace.diagnostic = "integration failed at t=" + std::to_string(t_i) + ": " +
                                   failure;
                break;
            }
            t_prev = t_i;
        }
        ScanSample s;
        s.t = t_i;
        s.field = path.at(t_i / duration);
        s.has_state = true;
        s.state = state;
        s.s_b = detected_signal(state, rates);
        s.s_t = s_t_classic(omega_from_field(s.field, rates), rates.gamma2);
        trace.samples.push_back(s);
    }
    if (state_io) *state_io = state;
    return trace;
}

}  // namespace

ScanTrace run_line_scan(const ScanProtocol& protocol, const ScanModel& model,
                        SpinState* state_io) {
    protocol.validate();
    if (protocol.kind != ScanKind::LineX && protocol.kind != ScanKind::LineY)
        throw invalid_parameter("run_line_scan: protocol kind must be LINE_X or LINE_Y");
    const FieldPath path = line_path(protocol);
    if (protocol.engine == Engine::ClosedForm)
        return run_closed_form(protocol, path, protocol.samples, model.modified);
    return run_ode(protocol, path, protocol.samples, model, state_io);
}

SignalMap run_grid_map(const ScanProtocol& protocol, const ScanModel& model) {
    protocol.validate();
    if (protocol.kind != ScanKind::GridXY)
        throw invalid_parameter("run_grid_map: protocol kind must be GRID_XY");

    SignalMap map;
    const int nx = protocol.grid_bx_steps, ny = protocol.grid_by_steps;
    map.bx_values.resize(static_cast<size_t>(nx));
    map.by_values.resize(static_cast<size_t>(ny));
    for (int i = 0; i < nx; ++i)
        map.bx_values[static_cast<size_t>(i)] =
            (nx == 1) ? protocol.grid_bx_min
                      : protocol.grid_bx_min +
                            (protocol.grid_bx_max - protocol.grid_bx_min) * i / (nx - 1);
    for (int j = 0; j < ny; ++j)
        map.by_values[static_cast<size_t>(j)] =
            (ny == 1) ? protocol.grid_by_min
                      : protocol.grid_by_min +
                            (protocol.grid_by_max - protocol.grid_by_min) * j / (ny - 1);
    map.s_b.assign(static_cast<size_t>(nx) * ny, std::numeric_limits<double>::quiet_NaN());
    map.s_t.assign(static_cast<size_t>(nx) * ny, std::numeric_limits<double>::quiet_NaN());

    ScanProtocol row = protocol;
    row.kind = ScanKind::LineX;
    row.sweep_min = protocol.grid_bx_min;
    row.sweep_max = protocol.grid_bx_max;
    row.samples = nx;
    if (nx == 1) {
        // Degenerate single-column grid: evaluate pointwise.
        for (int j = 0; j < ny; ++j) {
            FieldVector f = protocol.fixed;
            f.b_x = map.bx_values[0];
            f.b_y = map.by_values[static_cast<size_t>(j)];
            if (protocol.engine == Engine::ClosedForm) {
                ModifiedModelParams params = model.modified;
                if (f.b_y > 0.0) params.branch_sign = +1;
                if (f.b_y < 0.0) params.branch_sign = -1;
                const SignalPair sig = signals_modified(f, params);
                map.s_b[static_cast<size_t>(j)] = sig.s_b;
                map.s_t[static_cast<size_t>(j)] = sig.s_t;
            } else {
                // Relax to the stationary state at the single grid node.
                SpinState init;
                init.p_z = protocol.seed_eps * (f.b_y < 0.0 ? -1.0 : 1.0);
                const Omega w = omega_from_field(f, model.dynamics.rates);
                const Trajectory traj = integrate(init, w, model.dynamics, model.integ);
                map.s_b[static_cast<size_t>(j)] =
                    detected_signal(traj.final_state(), model.dynamics.rates);
                map.s_t[static_cast<size_t>(j)] = s_t_classic(w, model.dynamics.rates.gamma2);
            }
        }
    } else {
        std::vector<std::string> row_errors(static_cast<size_t>(ny));
        auto run_row = [&](std::size_t j) {
            ScanProtocol rp = row;
            rp.fixed.b_y = map.by_values[j];
            const ScanTrace t = run_line_scan(rp, model);
            for (size_t i = 0; i < t.samples.size(); ++i) {
                map.s_b[j * static_cast<size_t>(nx) + i] = t.samples[i].s_b;
                map.s_t[j * static_cast<size_t>(nx) + i] = t.samples[i].s_t;
            }
            if (t.truncated) row_errors[j] = t.diagnostic;
        };
        if (protocol.carry_state && protocol.engine == Engine::Ode) {
            SpinState state;
            for (int j = 0; j < ny; ++j) {
                ScanProtocol rp = row;
                rp.fixed.b_y = map.by_values[static_cast<size_t>(j)];
                if (j == 0) state.p_z = protocol.seed_eps * (rp.fixed.b_y < 0.0 ? -1.0 : 1.0);
                const ScanTrace t = run_line_scan(rp, model, &state);
                for (size_t i = 0; i < t.samples.size(); ++i) {
                    map.s_b[static_cast<size_t>(j) * nx + i] = t.samples[i].s_b;
                    map.s_t[static_cast<size_t>(j) * nx + i] = t.samples[i].s_t;
                }
                if (t.truncated) row_errors[static_cast<size_t>(j)] = t.diagnostic;
            }
        } else {
            parallel_for(static_cast<size_t>(ny), run_row);
        }
        for (size_t j = 0; j < row_errors.size(); ++j)
            if (!row_errors[j].empty())
                map.provenance.push_back("row " + std::to_string(j) + " truncated: " +
                                         row_errors[j]);
    }

    map.provenance.push_back("engine: " + to_string(protocol.engine));
    if (protocol.smooth_window > 1) {
        smooth_rows(map, protocol.smooth_window);
        map.provenance.push_back("smoothing: moving average, window " +
                                 std::to_string(protocol.smooth_window));
    }
    return map;
}

std::vector<ScanTrace> run_radial_map(const ScanProtocol& protocol, const ScanModel& model) {
    protocol.validate();
    if (protocol.kind != ScanKind::Radial)
        throw invalid_parameter("run_radial_map: protocol kind must be RADIAL");

    const double sweep_deg = protocol.through_center ? 180.0 : 360.0;
    const int n_rays = static_cast<int>(std::round(sweep_deg / protocol.angle_step_deg));
    std::vector<ScanTrace> rays(static_cast<size_t>(n_rays));

    auto run_ray = [&](std::size_t k, SpinState* carry) {
        const double theta = protocol.angle_step_deg * static_cast<double>(k);
        const FieldPath path = ray_path(protocol, theta);
        ScanTrace t;
        if (protocol.engine == Engine::ClosedForm)
            t = run_closed_form(protocol, path, protocol.samples, model.modified);
        else
            t = run_ode(protocol, path, protocol.samples, model, carry);
        t.kind = ScanKind::Radial;
        t.angle_deg = theta;
        rays[k] = std::move(t);
    };

    if (protocol.carry_state && protocol.engine == Engine::Ode) {
        SpinState state;
        state.p_z = protocol.seed_eps;
        for (int k = 0; k < n_rays; ++k) run_ray(static_cast<size_t>(k), &state);
    } else {
        parallel_for(static_cast<size_t>(n_rays),
                     [&](std::size_t k) { run_ray(k, nullptr); });
    }
    return rays;
}

void smooth_rows(SignalMap& map, int window) {
    if (window <= 1) return;
    if (window % 2 == 0) throw invalid_parameter("smooth_rows: window must be odd");
    const int half = window / 2;
    const int nx = static_cast<int>(map.nx());
    const int ny = static_cast<int>(map.ny());
    auto smooth = [&](std::vector<double>& values) {
        if (values.empty()) return;
        std::vector<double> row(static_cast<size_t>(nx));
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                // Window shrinks near the edges.
                const int lo = std::max(0, i - half);
                const int hi = std::min(nx - 1, i + half);
                double acc = 0.0;
                for (int k = lo; k <= hi; ++k)
                    acc += values[static_cast<size_t>(j) * nx + k];
                row[static_cast<size_t>(i)] = acc / (hi - lo + 1);
            }
            for (int i = 0; i < nx; ++i)
                values[static_cast<size_t>(j) * nx + i] = row[static_cast<size_t>(i)];
        }
    };
    smooth(map.s_b);
    smooth(map.s_t);
}

}  // namespace hanle
