// Plain-text key-value run configuration with dotted section names:
//
//   rates.gamma2 = 12.0        # comment
//   protocol.kind = grid_xy
//
// Unknown keys are errors in strict mode, warnings otherwise. Every key has
// a documented default; serialization emits the full canonical schema and
// round-trips to a fixed point.

#ifndef HANLE_CONFIG_HPP
#define HANLE_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hanle/analysis.hpp"
#include "hanle/bifurcation.hpp"
#include "hanle/dynamics.hpp"
#include "hanle/fit.hpp"
#include "hanle/scan.hpp"
#include "hanle/types.hpp"

namespace hanle {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    ModelRates rates;
    DynamicsConfig dynamics;
    IntegratorSettings integrator;
    ModifiedModelParams modified;
    ScanProtocol protocol;

    ControlParam bif_control = ControlParam::Chi;
    double bif_from = 0.0;
    double bif_to = 2.0;
    int bif_steps = 41;

    HysteresisProtocol hysteresis;
    double hysteresis_split_tol = 0.01;

    WidthMethod width_method = WidthMethod::ExtremaHalfDistance;
    Channel analysis_channel = Channel::SB;

    FitOptions fit;
    double fit_scale_guess = 1.0;
    double curve_scale_guess = 1.0;
    double curve_width_guess = 30.0;
    double curve_b_y0_guess = 10.0;

    std::string out_path = "out.csv";
    std::string out_format = "grid";     // grid | long
    std::string out_channel = "s_b";     // s_b | s_t | both
    bool out_timestamps = true;

    std::vector<std::string> warnings;   // lax-mode unknown keys
    std::map<std::string, std::string> canonical;  // full normalized schema
};

RunConfig parse_config(const std::string& path, bool strict = true);
RunConfig parse_config_text(const std::string& text, bool strict = true,
                            const std::string& origin = "<string>");

// Canonical full-schema serialization; parse(serialize(c)) == c.
std::string serialize_config(const RunConfig& config);

// FNV-1a over the canonical serialization.
std::uint64_t config_hash(const RunConfig& config);

// Human-readable reference of every key, default and description.
std::string config_reference();

}  // namespace hanle

#endif
