#include "hanle/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace hanle {

namespace {

enum class ValueType { Number, Integer, Boolean, Enum, Text };

struct KeyDef {
    const char* key;
    const char* def;
    ValueType type;
    const char* choices;  // '|'-separated for Enum
    const char* doc;
};

// The complete schema. Order defines canonical serialization order.
const KeyDef kSchema[] = {
    {"rates.gamma_gyro", "3.5", ValueType::Number, "", "gyromagnetic ratio, Hz/nT"},
    {"rates.gamma1", "1", ValueType::Number, "", "orientation relaxation rate, 1/s"},
    {"rates.gamma2", "1", ValueType::Number, "", "alignment relaxation rate, 1/s"},
    {"rates.chi", "0", ValueType::Number, "", "spontaneous-polarization gain, 1/s"},
    {"rates.eta", "0", ValueType::Number, "", "cubic saturation coefficient, 1/s"},
    {"rates.alpha", "0", ValueType::Number, "", "alignment-to-orientation seeding, 1/s"},
    {"rates.xi", "0.7", ValueType::Number, "", "detection-basis projection coefficient"},
    {"rates.pump_rate", "1", ValueType::Number, "", "optical pumping rate R, 1/s"},
    {"rates.a_x", "auto", ValueType::Text, "",
     "stationary pump alignment; 'auto' derives pump_rate/gamma2"},
    {"dynamics.variant", "sp", ValueType::Enum, "sp|aoc|both",
     "active nonlinear terms: SP gain/saturation, dissipative AOC, or both"},
    {"dynamics.aoc_alpha", "0", ValueType::Number, "",
     "dissipative alignment-to-orientation coefficient, 1/s"},
    {"integrator.rel_tol", "1e-08", ValueType::Number, "", "adaptive relative tolerance"},
    {"integrator.abs_tol", "1e-12", ValueType::Number, "", "adaptive absolute tolerance"},
    {"integrator.max_step", "1e+30", ValueType::Number, "", "step-size cap, s"},
    {"integrator.max_time", "10000", ValueType::Number, "", "integration horizon, s"},
    {"integrator.convergence_eps", "1e-09", ValueType::Number, "",
     "steady-state threshold on ||rhs||_inf"},
    {"integrator.fixed_step", "0", ValueType::Number, "",
     "> 0 selects deterministic fixed-step RK4 with this step, s"},
    {"modified.k_aniso", "1", ValueType::Number, "", "y-axis scaling factor k"},
    {"modified.b_y0", "0", ValueType::Number, "", "internal effective field, nT"},
    {"modified.decay_coeff", "0", ValueType::Number, "", "amplitude decay per |B_xy|, 1/nT"},
    {"modified.branch_sign", "1", ValueType::Integer, "",
     "effective-field sign branch at B_y = 0 (+1 or -1)"},
    {"modified.region_half_planes", "", ValueType::Text, "",
     "active half planes 'a,b,c; ...' (a*bx + b*by >= c); empty = no mask"},
    {"modified.region_sectors", "", ValueType::Text, "",
     "active sectors 'th_min,th_max,r_min,r_max; ...' degrees/nT; r_max<=0 unbounded"},
    {"protocol.kind", "line_x", ValueType::Enum, "line_x|line_y|grid_xy|radial", "scan kind"},
    {"protocol.engine", "closed", ValueType::Enum, "closed|ode", "signal engine"},
    {"protocol.fixed_bx", "0", ValueType::Number, "", "fixed B_x, nT"},
    {"protocol.fixed_by", "0", ValueType::Number, "", "fixed B_y, nT"},
    {"protocol.fixed_bz", "0", ValueType::Number, "", "fixed B_z, nT"},
    {"protocol.sweep_min", "-1", ValueType::Number, "", "line sweep start, nT"},
    {"protocol.sweep_max", "1", ValueType::Number, "", "line sweep end, nT"},
    {"protocol.samples", "201", ValueType::Integer, "", "samples per line or ray"},
    {"protocol.sweep_rate", "1", ValueType::Number, "", "ODE ramp rate, nT/s"},
    {"protocol.direction", "forward", ValueType::Enum, "forward|backward", "sweep direction"},
    {"protocol.grid_bx_min", "-1", ValueType::Number, "", "grid B_x start, nT"},
    {"protocol.grid_bx_max", "1", ValueType::Number, "", "grid B_x end, nT"},
    {"protocol.grid_bx_steps", "41", ValueType::Integer, "", "grid B_x nodes"},
    {"protocol.grid_by_min", "-1", ValueType::Number, "", "grid B_y start, nT"},
    {"protocol.grid_by_max", "1", ValueType::Number, "", "grid B_y end, nT"},
    {"protocol.grid_by_steps", "41", ValueType::Integer, "", "grid B_y nodes"},
    {"protocol.radius", "42.5", ValueType::Number, "", "radial scan radius, nT"},
    {"protocol.angle_step", "5", ValueType::Number, "", "radial angle step, degrees"},
    {"protocol.through_center", "false", ValueType::Boolean, "",
     "radial rays continue to the opposite edge (semicircle set)"},
    {"protocol.settle_time", "0", ValueType::Number, "", "hold before recording, s"},
    {"protocol.seed_eps", "1e-06", ValueType::Number, "",
     "reset seed magnitude in P_z; sign follows the initial B_y"},
    {"protocol.carry_state", "false", ValueType::Boolean, "",
     "carry ODE state across rows/rays instead of per-row reset"},
    {"bifurcation.control", "chi", ValueType::Enum, "chi|b_x|b_y", "swept control parameter"},
    {"bifurcation.from", "0", ValueType::Number, "", "control range start"},
    {"bifurcation.to", "2", ValueType::Number, "", "control range end"},
    {"bifurcation.steps", "41", ValueType::Integer, "", "control values"},
    {"hysteresis.axis", "x", ValueType::Enum, "x|y", "ramped field component"},
    {"hysteresis.sweep_from", "-1", ValueType::Number, "", "ramp start, nT"},
    {"hysteresis.sweep_to", "1", ValueType::Number, "", "ramp end, nT"},
    {"hysteresis.rate", "1", ValueType::Number, "", "ramp rate, nT/s"},
    {"hysteresis.samples", "201", ValueType::Integer, "", "samples per leg"},
    {"hysteresis.settle_time", "0", ValueType::Number, "", "hold before the forward leg, s"},
    {"hysteresis.prepared_p_z", "none", ValueType::Text, "",
     "initial P_z; 'none' uses seed_eps * sign(initial B_y)"},
    {"hysteresis.seed_eps", "1e-06", ValueType::Number, "", "reset seed magnitude in P_z"},
    {"hysteresis.split_tol", "0.01", ValueType::Number, "",
     "relative split tolerance for bistability detection"},
    {"analysis.width_method", "extrema_half_distance", ValueType::Enum,
     "extrema_half_distance|half_max", "resonance width convention"},
    {"analysis.channel", "s_b", ValueType::Enum, "s_b|s_t", "analyzed signal channel"},
    {"fit.max_iterations", "200", ValueType::Integer, "", "optimizer iteration cap"},
    {"fit.gradient_tol", "1e-10", ValueType::Number, "", "gradient convergence tolerance"},
    {"fit.step_tol", "1e-12", ValueType::Number, "", "step-size convergence tolerance"},
    {"fit.cost_tol", "1e-14", ValueType::Number, "", "cost-change convergence tolerance"},
    {"fit.fd_rel", "1e-06", ValueType::Number, "", "finite-difference relative step"},
    {"fit.fd_abs", "1e-09", ValueType::Number, "", "finite-difference absolute floor"},
    {"fit.simplex_fallback", "true", ValueType::Boolean, "",
     "fall back to Nelder-Mead when LM stalls"},
    {"fit.joint_channels", "true", ValueType::Boolean, "",
     "share model parameters across s_b and s_t, separate scales"},
    {"fit.float_gamma_gyro", "false", ValueType::Boolean, "",
     "unlock the gyromagnetic ratio during fits (held at the Cs value by default)"},
    {"fit.scale_guess", "1", ValueType::Number, "", "initial amplitude scale"},
    {"fit.curve_scale_guess", "1", ValueType::Number, "", "amplitude-curve scale guess"},
    {"fit.curve_width_guess", "30", ValueType::Number, "", "amplitude-curve width guess, nT"},
    {"fit.curve_b_y0_guess", "10", ValueType::Number, "", "amplitude-curve b_y0 guess, nT"},
    {"output.path", "out.csv", ValueType::Text, "", "output file path"},
    {"output.format", "grid", ValueType::Enum, "grid|long", "map CSV layout"},
    {"output.channel", "s_b", ValueType::Enum, "s_b|s_t|both", "exported map channel"},
    {"output.smooth_window", "0", ValueType::Integer, "",
     "odd moving-average width applied along map rows, 0 = off"},
    {"output.timestamps", "true", ValueType::Boolean, "",
     "include a timestamp comment in provenance headers (disable for byte-identical runs)"},
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // Shorten when a shorter representation round-trips exactly.
    for (int prec = 1; prec < 17; ++prec) {
        char probe[40];
        std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
        if (std::strtod(probe, nullptr) == v) return probe;
    }
    return buf;
}

double parse_number(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0')
        throw config_error("config: key '" + key + "' has non-numeric value '" + value + "'");
    return v;
}

long parse_integer(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const long v = std::strtol(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0')
        throw config_error("config: key '" + key + "' has non-integer value '" + value + "'");
    return v;
}

bool parse_boolean(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw config_error("config: key '" + key + "' has non-boolean value '" + value + "'");
}

const KeyDef* find_key(const std::string& key) {
    for (const KeyDef& def : kSchema)
        if (key == def.key) return &def;
    return nullptr;
}

std::string normalize(const KeyDef& def, const std::string& raw) {
    switch (def.type) {
        case ValueType::Number: return format_number(parse_number(def.key, raw));
        case ValueType::Integer: return std::to_string(parse_integer(def.key, raw));
        case ValueType::Boolean: return parse_boolean(def.key, raw) ? "true" : "false";
        case ValueType::Enum: {
            std::string choices(def.choices);
            std::stringstream ss(choices);
            std::string c;
            while (std::getline(ss, c, '|'))
                if (raw == c) return raw;
            throw config_error("config: key '" + std::string(def.key) + "' has value '" + raw +
                               "', expected one of " + choices);
        }
        case ValueType::Text: return raw;
    }
    return raw;
}

std::vector<std::vector<double>> parse_tuple_list(const std::string& key,
                                                  const std::string& text, size_t arity) {
    std::vector<std::vector<double>> out;
    std::stringstream groups(text);
    std::string group;
    while (std::getline(groups, group, ';')) {
        group = trim(group);
        if (group.empty()) continue;
        std::vector<double> tuple;
        std::stringstream items(group);
        std::string item;
        while (std::getline(items, item, ',')) tuple.push_back(parse_number(key, trim(item)));
        if (tuple.size() != arity)
            throw config_error("config: key '" + key + "' expects groups of " +
                               std::to_string(arity) + " numbers");
        out.push_back(std::move(tuple));
    }
    return out;
}

RunConfig resolve(std::map<std::string, std::string> values,
                  std::vector<std::string> warnings) {
    RunConfig c;
    auto str = [&](const char* key) { return values.at(key); };
    auto num = [&](const char* key) { return parse_number(key, values.at(key)); };
    auto integer = [&](const char* key) {
        return static_cast<int>(parse_integer(key, values.at(key)));
    };
    auto boolean = [&](const char* key) { return parse_boolean(key, values.at(key)); };

    c.rates.gamma_gyro = num("rates.gamma_gyro");
    c.rates.gamma1 = num("rates.gamma1");
    c.rates.gamma2 = num("rates.gamma2");
    c.rates.chi = num("rates.chi");
    c.rates.eta = num("rates.eta");
    c.rates.alpha = num("rates.alpha");
    c.rates.xi = num("rates.xi");
    c.rates.pump_rate = num("rates.pump_rate");
    if (str("rates.a_x") == "auto")
        c.rates.a_x = c.rates.pump_rate / c.rates.gamma2;
    else
        c.rates.a_x = parse_number("rates.a_x", str("rates.a_x"));
    c.rates.validate();

    c.dynamics.rates = c.rates;
    c.dynamics.variant = variant_from_string(str("dynamics.variant"));
    c.dynamics.aoc_alpha = num("dynamics.aoc_alpha");
    c.dynamics.validate();

    c.integrator.rel_tol = num("integrator.rel_tol");
    c.integrator.abs_tol = num("integrator.abs_tol");
    c.integrator.max_step = num("integrator.max_step");
    c.integrator.max_time = num("integrator.max_time");
    c.integrator.convergence_eps = num("integrator.convergence_eps");
    c.integrator.fixed_step = num("integrator.fixed_step");
    c.integrator.validate();

    c.modified.base = c.rates;
    c.modified.k_aniso = num("modified.k_aniso");
    c.modified.b_y0 = num("modified.b_y0");
    c.modified.decay_coeff = num("modified.decay_coeff");
    c.modified.branch_sign = integer("modified.branch_sign");
    for (const auto& t :
         parse_tuple_list("modified.region_half_planes", str("modified.region_half_planes"), 3))
        c.modified.active_region.half_planes.push_back(HalfPlane{t[0], t[1], t[2]});
    for (const auto& t :
         parse_tuple_list("modified.region_sectors", str("modified.region_sectors"), 4))
        c.modified.active_region.sectors.push_back(AngularSector{t[0], t[1], t[2], t[3]});
    c.modified.validate();

    c.protocol.kind = scan_kind_from_string(str("protocol.kind"));
    c.protocol.engine = engine_from_string(str("protocol.engine"));
    c.protocol.fixed = FieldVector{num("protocol.fixed_bx"), num("protocol.fixed_by"),
                                   num("protocol.fixed_bz")};
    c.protocol.sweep_min = num("protocol.sweep_min");
    c.protocol.sweep_max = num("protocol.sweep_max");
    c.protocol.samples = integer("protocol.samples");
    c.protocol.sweep_rate = num("protocol.sweep_rate");
    c.protocol.backward = (str("protocol.direction") == "backward");
    c.protocol.grid_bx_min = num("protocol.grid_bx_min");
    c.protocol.grid_bx_max = num("protocol.grid_bx_max");
    c.protocol.grid_bx_steps = integer("protocol.grid_bx_steps");
    c.protocol.grid_by_min = num("protocol.grid_by_min");
    c.protocol.grid_by_max = num("protocol.grid_by_max");
    c.protocol.grid_by_steps = integer("protocol.grid_by_steps");
    c.protocol.radius = num("protocol.radius");
    c.protocol.angle_step_deg = num("protocol.angle_step");
    c.protocol.through_center = boolean("protocol.through_center");
    c.protocol.settle_time = num("protocol.settle_time");
    c.protocol.seed_eps = num("protocol.seed_eps");
    c.protocol.carry_state = boolean("protocol.carry_state");
    c.protocol.smooth_window = integer("output.smooth_window");
    c.protocol.validate();

    c.bif_control = control_from_string(str("bifurcation.control"));
    c.bif_from = num("bifurcation.from");
    c.bif_to = num("bifurcation.to");
    c.bif_steps = integer("bifurcation.steps");

    c.hysteresis.axis = str("hysteresis.axis")[0];
    c.hysteresis.sweep_from = num("hysteresis.sweep_from");
    c.hysteresis.sweep_to = num("hysteresis.sweep_to");
    c.hysteresis.rate = num("hysteresis.rate");
    c.hysteresis.samples = integer("hysteresis.samples");
    c.hysteresis.settle_time = num("hysteresis.settle_time");
    c.hysteresis.fixed = c.protocol.fixed;
    if (str("hysteresis.prepared_p_z") != "none")
        c.hysteresis.prepared_p_z =
            parse_number("hysteresis.prepared_p_z", str("hysteresis.prepared_p_z"));
    c.hysteresis.seed_eps = num("hysteresis.seed_eps");
    c.hysteresis_split_tol = num("hysteresis.split_tol");
    c.hysteresis.validate();

    c.width_method = width_method_from_string(str("analysis.width_method"));
    c.analysis_channel = channel_from_string(str("analysis.channel"));

    c.fit.max_iterations = integer("fit.max_iterations");
    c.fit.gradient_tol = num("fit.gradient_tol");
    c.fit.step_tol = num("fit.step_tol");
    c.fit.cost_tol = num("fit.cost_tol");
    c.fit.fd_rel = num("fit.fd_rel");
    c.fit.fd_abs = num("fit.fd_abs");
    c.fit.simplex_fallback = boolean("fit.simplex_fallback");
    c.fit.joint_channels = boolean("fit.joint_channels");
    c.fit.float_gamma_gyro = boolean("fit.float_gamma_gyro");
    c.fit_scale_guess = num("fit.scale_guess");
    c.curve_scale_guess = num("fit.curve_scale_guess");
    c.curve_width_guess = num("fit.curve_width_guess");
    c.curve_b_y0_guess = num("fit.curve_b_y0_guess");

    c.out_path = str("output.path");
    c.out_format = str("output.format");
    c.out_channel = str("output.channel");
    c.out_timestamps = boolean("output.timestamps");

    c.warnings = std::move(warnings);
    c.canonical = std::move(values);
    return c;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, bool strict, const std::string& origin) {
    std::map<std::string, std::string> values;
    // Defaults pass through the same normalization as user values so that
    // parse -> serialize -> parse is a fixed point.
    for (const KeyDef& def : kSchema) values[def.key] = normalize(def, def.def);

    std::vector<std::string> warnings;
    std::map<std::string, int> seen;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(origin + ":" + std::to_string(line_no) +
                               ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw config_error(origin + ":" + std::to_string(line_no) + ": empty key");
        const KeyDef* def = find_key(key);
        if (!def) {
            const std::string msg =
                origin + ":" + std::to_string(line_no) + ": unknown key '" + key + "'";
            if (strict) throw config_error(msg);
            warnings.push_back(msg);
            continue;
        }
        if (seen.count(key))
            throw config_error(origin + ":" + std::to_string(line_no) + ": duplicate key '" +
                               key + "' (first at line " + std::to_string(seen[key]) + ")");
        seen[key] = line_no;
        try {
            values[key] = normalize(*def, value);
        } catch (const config_error& e) {
            throw config_error(origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    try {
        return resolve(std::move(values), std::move(warnings));
    } catch (const invalid_parameter& e) {
        throw config_error(origin + ": validation failed: " + e.what());
    }
}

RunConfig parse_config(const std::string& path, bool strict) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), strict, path);
}

std::string serialize_config(const RunConfig& config) {
    std::string out;
    std::string section;
    for (const KeyDef& def : kSchema) {
        const std::string key(def.key);
        const std::string sec = key.substr(0, key.find('.'));
        if (sec != section) {
            if (!out.empty()) out += "\n";
            section = sec;
        }
        const auto it = config.canonical.find(key);
        const std::string value = (it != config.canonical.end()) ? it->second : def.def;
        out += key + " = " + value + "\n";
    }
    return out;
}

std::uint64_t config_hash(const RunConfig& config) {
    const std::string s = serialize_config(config);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::string config_reference() {
    std::string out = "Configuration keys (key = default  -- description):\n";
    std::string section;
    for (const KeyDef& def : kSchema) {
        const std::string key(def.key);
        const std::string sec = key.substr(0, key.find('.'));
        if (sec != section) {
            out += "\n[" + sec + "]\n";
            section = sec;
        }
        out += "  " + key + " = " + (std::string(def.def).empty() ? "<empty>" : def.def) +
               "  -- " + def.doc;
        if (def.type == ValueType::Enum) out += " (one of: " + std::string(def.choices) + ")";
        out += "\n";
    }
    return out;
}

}  // namespace hanle
