// Command-line front end: field-scan simulation, bifurcation and hysteresis
// analysis, map fitting, width extraction, and angular-momentum bookkeeping.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>

#include "hanle/analysis.hpp"
#include "hanle/bifurcation.hpp"
#include "hanle/config.hpp"
#include "hanle/dynamics.hpp"
#include "hanle/io.hpp"
#include "hanle/scan.hpp"
#include "hanle/spin_algebra.hpp"
#include "hanle/version.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    bool lax = false;
    std::string out_override;
    std::string engine_override;
    double sweep_rate_override = 0.0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_engine = false) {
    cmd->add_option("--config", args.config_path, "run configuration file")->required();
    cmd->add_flag("--lax", args.lax, "warn on unknown config keys instead of failing");
    cmd->add_option("--out", args.out_override, "output path (overrides output.path)");
    if (with_engine) {
        cmd->add_option("--engine", args.engine_override, "engine override: closed|ode");
        cmd->add_option("--sweep-rate", args.sweep_rate_override,
                        "ODE ramp rate override, nT/s");
    }
}

hanle::RunConfig load(const CommonArgs& args) {
    hanle::RunConfig config = hanle::parse_config(args.config_path, !args.lax);
    for (const auto& w : config.warnings) std::cerr << "warning: " << w << "\n";
    if (!args.engine_override.empty())
        config.protocol.engine = hanle::engine_from_string(args.engine_override);
    if (args.sweep_rate_override > 0.0) config.protocol.sweep_rate = args.sweep_rate_override;
    if (!args.out_override.empty()) config.out_path = args.out_override;
    return config;
}

hanle::ScanModel scan_model(const hanle::RunConfig& config) {
    hanle::ScanModel model;
    model.modified = config.modified;
    model.dynamics = config.dynamics;
    model.integ = config.integrator;
    return model;
}

hanle::Provenance provenance(const hanle::RunConfig& config) {
    hanle::Provenance prov;
    prov.config_hash = hanle::config_hash(config);
    prov.with_timestamp = config.out_timestamps;
    return prov;
}

int run_map(const CommonArgs& args) {
    hanle::RunConfig config = load(args);
    config.protocol.kind = hanle::ScanKind::GridXY;
    const hanle::SignalMap map = hanle::run_grid_map(config.protocol, scan_model(config));
    hanle::Provenance prov = provenance(config);
    prov.extra = map.provenance;
    const hanle::MapFormat format = hanle::map_format_from_string(config.out_format);
    if (config.out_channel == "both" && format == hanle::MapFormat::Grid) {
        // Grid layout holds one channel per file.
        hanle::export_map(map, config.out_path, format, hanle::Channel::SB, prov);
        hanle::export_map(map, config.out_path + ".st", format, hanle::Channel::ST, prov);
    } else {
        const hanle::Channel ch = (config.out_channel == "s_t") ? hanle::Channel::ST
                                                                : hanle::Channel::SB;
        hanle::export_map(map, config.out_path, format, ch, prov);
    }
    std::cout << "map: " << map.nx() << "x" << map.ny() << " -> " << config.out_path << "\n";
    return 0;
}

int run_scan(const CommonArgs& args) {
    hanle::RunConfig config = load(args);
    if (config.protocol.kind != hanle::ScanKind::LineX &&
        config.protocol.kind != hanle::ScanKind::LineY)
        config.protocol.kind = hanle::ScanKind::LineX;
    const hanle::ScanTrace trace = hanle::run_line_scan(config.protocol, scan_model(config));
    hanle::export_trace(trace, config.out_path, provenance(config));
    std::cout << "scan: " << trace.samples.size() << " samples -> " << config.out_path << "\n";
    if (trace.truncated) {
        std::cerr << "error: trace truncated: " << trace.diagnostic << "\n";
        return 1;
    }
    return 0;
}

int run_radial(const CommonArgs& args) {
    hanle::RunConfig config = load(args);
    config.protocol.kind = hanle::ScanKind::Radial;
    const auto rays = hanle::run_radial_map(config.protocol, scan_model(config));
    hanle::export_radial(rays, config.out_path, provenance(config));
    std::cout << "radial: " << rays.size() << " rays -> " << config.out_path << "\n";
    return 0;
}

int run_bifurcate(const CommonArgs& args) {
    hanle::RunConfig config = load(args);
    const hanle::BifurcationDiagram diagram =
        hanle::sweep_diagram(config.bif_control, config.bif_from, config.bif_to,
                             config.bif_steps, config.dynamics, config.protocol.fixed);
    hanle::export_diagram(diagram, config.out_path, provenance(config));
    std::cout << "bifurcate: " << diagram.control_values.size() << " control values -> "
              << config.out_path << "\n";
    return 0;
}

int run_hysteresis(const CommonArgs& args, const std::string& trace_out) {
    hanle::RunConfig config = load(args);
    hanle::HysteresisReport report =
        hanle::hysteresis_scan(config.hysteresis, config.dynamics, config.integrator);
    report.split_tol = config.hysteresis_split_tol;
    const hanle::Provenance prov = provenance(config);
    hanle::export_hysteresis_report(report, config.out_path, prov);
    if (!trace_out.empty()) hanle::export_hysteresis_traces(report, trace_out, prov);
    std::cout << "hysteresis: bistable=" << (report.bistable ? "true" : "false")
              << " loop_area=" << hanle::format_double(report.loop_area) << " -> "
              << config.out_path << "\n";
    if (!report.valid) {
        std::cerr << "error: hysteresis scan invalid: " << report.diagnostic << "\n";
        return 1;
    }
    return 0;
}

int run_fit(const CommonArgs& args, const std::string& data_path,
            const std::string& data_format, bool curve_mode) {
    hanle::RunConfig config = load(args);
    const hanle::Provenance prov = provenance(config);
    if (curve_mode) {
        std::vector<double> b_y, amplitude;
        hanle::ingest_curve(data_path, b_y, amplitude);
        const hanle::CurveFitResult fit = hanle::fit_amplitude_curve(
            b_y, amplitude, config.curve_scale_guess, config.curve_width_guess,
            config.curve_b_y0_guess, config.fit);
        hanle::export_curve_fit_report(fit, config.out_path, prov);
        std::cout << "fit: b_y0=" << hanle::format_double(fit.b_y0)
                  << " width=" << hanle::format_double(fit.width)
                  << " converged=" << (fit.converged ? "true" : "false") << " -> "
                  << config.out_path << "\n";
        return fit.converged ? 0 : 1;
    }
    const hanle::SignalMap data =
        hanle::ingest_map(data_path, hanle::map_format_from_string(data_format));
    const hanle::FitResult fit =
        hanle::fit_map(data, config.modified, config.fit_scale_guess, config.fit);
    hanle::export_fit_report(fit, config.out_path, prov);
    std::cout << "fit: gamma2=" << hanle::format_double(fit.params.base.gamma2)
              << " k=" << hanle::format_double(fit.params.k_aniso)
              << " b_y0=" << hanle::format_double(fit.params.b_y0)
              << " rms=" << hanle::format_double(fit.residual_rms)
              << " converged=" << (fit.converged ? "true" : "false") << " -> "
              << config.out_path << "\n";
    return fit.converged ? 0 : 1;
}

int run_widths(const CommonArgs& args) {
    hanle::RunConfig config = load(args);
    if (config.protocol.kind != hanle::ScanKind::LineX &&
        config.protocol.kind != hanle::ScanKind::LineY)
        config.protocol.kind = hanle::ScanKind::LineX;
    const hanle::ScanTrace trace = hanle::run_line_scan(config.protocol, scan_model(config));
    hanle::WidthReport report;
    if (config.width_method == hanle::WidthMethod::ExtremaHalfDistance) {
        report = hanle::hwhm_extrema(trace, config.analysis_channel);
    } else {
        std::vector<double> x, y;
        for (const auto& s : trace.samples) {
            x.push_back(config.protocol.kind == hanle::ScanKind::LineY ? s.field.b_y
                                                                       : s.field.b_x);
            y.push_back(config.analysis_channel == hanle::Channel::SB ? s.s_b : s.s_t);
        }
        report = hanle::hwhm_half_max(x, y);
        report.axis = (config.protocol.kind == hanle::ScanKind::LineY) ? 'y' : 'x';
    }
    hanle::export_width_report(report, config.out_path, provenance(config));
    std::cout << "widths: axis=" << report.axis
              << " hwhm=" << hanle::format_double(report.hwhm) << " nT -> " << config.out_path
              << "\n";
    return 0;
}

int run_algebra(double f_value) {
    const double twice_f_real = 2.0 * f_value;
    const int twice_f = static_cast<int>(std::lround(twice_f_real));
    if (twice_f < 1 || std::abs(twice_f_real - twice_f) > 1e-9)
        throw hanle::invalid_parameter("algebra: F must be a positive integer or half-integer");
    const hanle::SublevelDistribution dist = hanle::stretched_state_populations(twice_f);
    std::cout << "F = " << hanle::format_double(dist.f()) << "\n";
    std::cout << "populations (m = -F..F):";
    for (double p : dist.populations) std::cout << " " << hanle::format_double(p);
    std::cout << "\n";
    std::cout << "second_moment_x = " << hanle::format_double(hanle::second_moment_x(twice_f))
              << "\n";
    std::cout << "quasi_alignment_moment = "
              << hanle::format_double(hanle::quasi_alignment_moment(twice_f)) << "\n";
    std::cout << "normalized_projection_ratio = "
              << hanle::format_double(hanle::normalized_projection_ratio(twice_f)) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hanle alignment-resonance simulator and analysis toolkit"};
    app.set_version_flag("--version", std::string("hanle ") + hanle::kVersion);
    app.require_subcommand(1);

    CommonArgs map_args, scan_args, radial_args, bif_args, hyst_args, fit_args, width_args;
    std::string hyst_trace_out;
    std::string fit_data, fit_format = "grid";
    bool fit_curve = false;
    double algebra_f = 4.0;

    add_common(app.add_subcommand("map", "2D field map of the modeled signals"), map_args,
               true);
    add_common(app.add_subcommand("scan", "1D line scan"), scan_args, true);
    add_common(app.add_subcommand("radial", "radial rays toward / through the center"),
               radial_args, true);
    add_common(app.add_subcommand("bifurcate", "equilibrium branches along a control sweep"),
               bif_args);
    CLI::App* hyst = app.add_subcommand("hysteresis", "forward/backward ramp comparison");
    add_common(hyst, hyst_args);
    hyst->add_option("--trace-out", hyst_trace_out, "also write the two legs as CSV");
    CLI::App* fit = app.add_subcommand("fit", "least-squares fit of a map or amplitude curve");
    add_common(fit, fit_args);
    fit->add_option("--data", fit_data, "input data file")->required();
    fit->add_option("--data-format", fit_format, "data layout: grid|long");
    fit->add_flag("--curve", fit_curve, "fit an amplitude-vs-B_y curve (two-column CSV)");
    add_common(app.add_subcommand("widths", "resonance width of the configured line scan"),
               width_args, true);
    CLI::App* algebra =
        app.add_subcommand("algebra", "stretched-state populations and moments");
    algebra->add_option("--f", algebra_f, "total angular momentum F (integer or half-integer)")
        ->required();
    app.add_subcommand("config-reference", "print all configuration keys and defaults");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("map")) return run_map(map_args);
        if (app.got_subcommand("scan")) return run_scan(scan_args);
        if (app.got_subcommand("radial")) return run_radial(radial_args);
        if (app.got_subcommand("bifurcate")) return run_bifurcate(bif_args);
        if (app.got_subcommand("hysteresis")) return run_hysteresis(hyst_args, hyst_trace_out);
        if (app.got_subcommand("fit")) return run_fit(fit_args, fit_data, fit_format, fit_curve);
        if (app.got_subcommand("widths")) return run_widths(width_args);
        if (app.got_subcommand("algebra")) return run_algebra(algebra_f);
        if (app.got_subcommand("config-reference")) {
            std::cout << hanle::config_reference();
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
