#include "hanle/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

#include "hanle/version.hpp"

namespace hanle {

MapFormat map_format_from_string(const std::string& s) {
    if (s == "grid" || s == "csv_grid") return MapFormat::Grid;
    if (s == "long" || s == "csv_long") return MapFormat::Long;
    throw invalid_parameter("unknown map format: " + s);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    for (int prec = 1; prec < 17; ++prec) {
        char probe[40];
        std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
        if (std::strtod(probe, nullptr) == v) return probe;
    }
    return buf;
}

std::vector<std::string> Provenance::lines() const {
    std::vector<std::string> out;
    out.push_back(std::string("# hanle ") + kVersion);
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(config_hash));
    out.push_back(std::string("# config_hash: ") + hash);
    if (with_timestamp) {
        const std::time_t now = std::time(nullptr);
        char buf[64];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        out.push_back(std::string("# generated: ") + buf);
    }
    for (const auto& e : extra) out.push_back("# " + e);
    return out;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    return out;
}

void write_header(std::ofstream& out, const Provenance& prov) {
    for (const auto& line : prov.lines()) out << line << "\n";
}

double parse_cell(const std::string& cell, const std::string& path, int line_no) {
    char* end = nullptr;
    const std::string t = cell;
    const double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0')
        throw io_error(path + ":" + std::to_string(line_no) + ": non-numeric cell '" + cell +
                       "'");
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    return cells;
}

struct CsvReader {
    std::string path;
    std::ifstream in;
    int line_no = 0;

    explicit CsvReader(const std::string& p) : path(p), in(p) {
        if (!in) throw io_error("cannot open '" + p + "' for reading");
    }

    // Next non-comment, non-empty row.
    bool next(std::vector<std::string>& cells) {
        std::string line;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            if (line[0] == '#') continue;
            cells = split_csv(line);
            return true;
        }
        return false;
    }
};

SignalMap ingest_grid(const std::string& path) {
    CsvReader reader(path);
    std::vector<std::string> cells;
    if (!reader.next(cells)) throw io_error(path + ": empty grid file");
    if (cells.size() < 2) throw io_error(path + ": grid header needs at least one B_x column");

    SignalMap map;
    for (size_t i = 1; i < cells.size(); ++i)
        map.bx_values.push_back(parse_cell(cells[i], path, reader.line_no));
    const size_t nx = map.bx_values.size();

    while (reader.next(cells)) {
        if (cells.size() != nx + 1)
            throw io_error(path + ":" + std::to_string(reader.line_no) + ": ragged row (" +
                           std::to_string(cells.size() - 1) + " cells, expected " +
                           std::to_string(nx) + ")");
        map.by_values.push_back(parse_cell(cells[0], path, reader.line_no));
        for (size_t i = 1; i < cells.size(); ++i)
            map.s_b.push_back(parse_cell(cells[i], path, reader.line_no));
    }
    if (map.by_values.empty()) throw io_error(path + ": grid has no data rows");
    for (size_t j = 1; j < map.by_values.size(); ++j)
        if (map.by_values[j] == map.by_values[j - 1])
            throw io_error(path + ": duplicate B_y row " + format_double(map.by_values[j]));
    return map;
}

SignalMap ingest_long(const std::string& path) {
    CsvReader reader(path);
    std::vector<std::string> cells;
    if (!reader.next(cells)) throw io_error(path + ": empty file");
    if (cells.size() != 3 && cells.size() != 4)
        throw io_error(path + ": expected header b_x,b_y,s_b[,s_t]");
    const bool with_st = cells.size() == 4;

    struct Node {
        double sb, st;
    };
    std::vector<double> bx_raw, by_raw;
    std::map<std::pair<double, double>, Node> nodes;
    while (reader.next(cells)) {
        if (cells.size() != (with_st ? 4u : 3u))
            throw io_error(path + ":" + std::to_string(reader.line_no) + ": ragged row");
        const double bx = parse_cell(cells[0], path, reader.line_no);
        const double by = parse_cell(cells[1], path, reader.line_no);
        Node n{parse_cell(cells[2], path, reader.line_no),
               with_st ? parse_cell(cells[3], path, reader.line_no) : 0.0};
        const auto key = std::make_pair(by, bx);
        if (nodes.count(key))
            throw io_error(path + ":" + std::to_string(reader.line_no) + ": duplicate node (" +
                           cells[0] + ", " + cells[1] + ")");
        nodes[key] = n;
        bx_raw.push_back(bx);
        by_raw.push_back(by);
    }
    if (nodes.empty()) throw io_error(path + ": no data rows");

    auto unique_sorted = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    SignalMap map;
    map.bx_values = unique_sorted(bx_raw);
    map.by_values = unique_sorted(by_raw);

    std::vector<std::string> missing;
    map.s_b.resize(map.nx() * map.ny());
    if (with_st) map.s_t.resize(map.nx() * map.ny());
    for (size_t j = 0; j < map.ny(); ++j) {
        for (size_t i = 0; i < map.nx(); ++i) {
            const auto it = nodes.find(std::make_pair(map.by_values[j], map.bx_values[i]));
            if (it == nodes.end()) {
                if (missing.size() < 8)
                    missing.push_back("(" + format_double(map.bx_values[i]) + ", " +
                                      format_double(map.by_values[j]) + ")");
                continue;
            }
            map.s_b[j * map.nx() + i] = it->second.sb;
            if (with_st) map.s_t[j * map.nx() + i] = it->second.st;
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw io_error(path + ": grid incomplete, missing node(s) " + list);
    }
    return map;
}

}  // namespace

SignalMap ingest_map(const std::string& path, MapFormat format) {
    return format == MapFormat::Grid ? ingest_grid(path) : ingest_long(path);
}

void export_map(const SignalMap& map, const std::string& path, MapFormat format,
                Channel channel, const Provenance& prov) {
    if (channel == Channel::ST && !map.has_s_t())
        throw invalid_parameter("export_map: map carries no s_t channel");
    std::ofstream out = open_out(path);
    write_header(out, prov);
    if (format == MapFormat::Grid) {
        out << "by\\bx";
        for (double bx : map.bx_values) out << "," << format_double(bx);
        out << "\n";
        for (size_t j = 0; j < map.ny(); ++j) {
            out << format_double(map.by_values[j]);
            for (size_t i = 0; i < map.nx(); ++i)
                out << ","
                    << format_double(channel == Channel::SB ? map.sb_at(i, j)
                                                            : map.st_at(i, j));
            out << "\n";
        }
    } else {
        out << (map.has_s_t() ? "b_x,b_y,s_b,s_t" : "b_x,b_y,s_b") << "\n";
        for (size_t j = 0; j < map.ny(); ++j) {
            for (size_t i = 0; i < map.nx(); ++i) {
                out << format_double(map.bx_values[i]) << "," << format_double(map.by_values[j])
                    << "," << format_double(map.sb_at(i, j));
                if (map.has_s_t()) out << "," << format_double(map.st_at(i, j));
                out << "\n";
            }
        }
    }
    if (!out) throw io_error("write failed for '" + path + "'");
}

void export_trace(const ScanTrace& trace, const std::string& path, const Provenance& prov) {
    std::ofstream out = open_out(path);
    write_header(out, prov);
    for (const auto& n : trace.notes) out << "# " << n << "\n";
    if (trace.truncated) out << "# truncated: " << trace.diagnostic << "\n";
    const bool with_state = !trace.samples.empty() && trace.samples.front().has_state;
    out << "t,b_x,b_y,b_z,s_b,s_t";
    if (with_state) out << ",a_y,a_z,p_y,p_z";
    out << "\n";
    for (const auto& s : trace.samples) {
        out << format_double(s.t) << "," << format_double(s.field.b_x) << ","
            << format_double(s.field.b_y) << "," << format_double(s.field.b_z) << ","
            << format_double(s.s_b) << "," << format_double(s.s_t);
        if (with_state)
            out << "," << format_double(s.state.a_y) << "," << format_double(s.state.a_z) << ","
                << format_double(s.state.p_y) << "," << format_double(s.state.p_z);
        out << "\n";
    }
    if (!out) throw io_error("write failed for '" + path + "'");
}

void export_radial(const std::vector<ScanTrace>& rays, const std::string& path,
                   const Provenance& prov) {
    std::ofstream out = open_out(path);
    write_header(out, prov);
    const bool with_state =
        !rays.empty() && !rays.front().samples.empty() && rays.front().samples.front().has_state;
    out << "angle_deg,t,b_x,b_y,s_b,s_t";
    if (with_state) out << ",p_z";
    out << "\n";
    for (const auto& ray : rays) {
        if (ray.truncated) out << "# ray " << format_double(ray.angle_deg)
                               << " truncated: " << ray.diagnostic << "\n";
        for (const auto& s : ray.samples) {
            out << format_double(ray.angle_deg) << "," << format_double(s.t) << ","
                << format_double(s.field.b_x) << "," << format_double(s.field.b_y) << ","
                << format_double(s.s_b) << "," << format_double(s.s_t);
            if (with_state) out << "," << format_double(s.state.p_z);
            out << "\n";
        }
    }
    if (!out) throw io_error("write failed for '" + path + "'");
}

void export_diagram(const BifurcationDiagram& diagram, const std::string& path,
                    const Provenance& prov) {
    std::ofstream out = open_out(path);
    write_header(out, prov);
    out << "# control: " << to_string(diagram.control) << "\n";
    out << "control,p_z,stable,a_y,a_z,p_y\n";
    for (size_t k = 0; k < diagram.control_values.size(); ++k) {
        if (!diagram.point_diagnostics[k].empty())
            out << "# point " << format_double(diagram.control_values[k]) << ": "
                << diagram.point_diagnostics[k] << "\n";
        for (const Equilibrium& e : diagram.branches[k]) {
            out << format_double(diagram.control_values[k]) << ","
                << format_double(e.state.p_z) << "," << (e.stable ? 1 : 0) << ","
                << format_double(e.state.a_y) << "," << format_double(e.state.a_z) << ","
                << format_double(e.state.p_y) << "\n";
        }
    }
    if (!out) throw io_error("write failed for '" + path + "'");
}

void export_hysteresis_traces(const HysteresisReport& report, const std::string& path,
                              const Provenance& prov) {
    std::ofstream out = open_out(path);
    write_header(out, prov);
    out << "leg,t,b_x,b_y,signal,p_z\n";
    auto dump = [&](const std::vector<HysteresisSample>& trace, const char* leg) {
        for (const auto& s : trace)
            out << leg << "," << format_double(s.t) << "," << format_double(s.field.b_x) << ","
                << format_double(s.field.b_y) << "," << format_double(s.signal) << ","
                << format_double(s.state.p_z) << "\n";
    };
    dump(report.forward_trace, "forward");
    dump(report.backward_trace, "backward");
    if (!out) throw io_error("write failed for '" + path + "'");
}

void export_hysteresis_report(const HysteresisReport& report, const std::string& path,
                              const Provenance& prov) {
    std::ofstream out = open_out(path);
    write_header(out, prov);
    out << "bistable: " << (report.bistable ? "true" : "false") << "\n";
    out << "valid: " << (report.valid ? "true" : "false") << "\n";
    if (!report.diagnostic.empty()) out << "diagnostic: " << report.diagnostic << "\n";
    out << "loop_area: " << format_double(report.loop_area) << "\n";
    out << "split_tol: " << format_double(report.split_tol) << "\n";
    out << "switch_count: " << report.switch_points.size() << "\n";
    for (size_t i = 0; i < report.switch_points.size(); ++i)
        out << "switch_point_" << i << ": " << format_double(report.switch_points[i]) << "\n";
    if (!out) throw io_error("write failed for '" + path + "'");
}

void export_fit_report(const FitResult& fit, const std::string& path, const Provenance& prov) {
    std::ofstream out = open_out(path);
    write_header(out, prov);
    out << "converged: " << (fit.converged ? "true" : "false") << "\n";
    out << "iterations: " << fit.iterations << "\n";
    out << "residual_rms: " << format_double(fit.residual_rms) << "\n";
    out << "gamma2: " << format_double(fit.params.base.gamma2) << "\n";
    out << "k_aniso: " << format_double(fit.params.k_aniso) << "\n";
    out << "b_y0: " << format_double(fit.params.b_y0) << "\n";
    out << "decay_coeff: " << format_double(fit.params.decay_coeff) << "\n";
    out << "scale_sb: " << format_double(fit.scale_sb) << "\n";
    out << "scale_st: " << format_double(fit.scale_st) << "\n";
    for (size_t i = 0; i < fit.per_param_sensitivity.size(); ++i)
        out << "sensitivity_" << fit.param_names[i] << ": "
            << format_double(fit.per_param_sensitivity[i]) << "\n";
    out << "message: " << fit.message << "\n";
    if (!out) throw io_error("write failed for '" + path + "'");
}

void export_curve_fit_report(const CurveFitResult& fit, const std::string& path,
                             const Provenance& prov) {
    std::ofstream out = open_out(path);
    write_header(out, prov);
    out << "converged: " << (fit.converged ? "true" : "false") << "\n";
    out << "iterations: " << fit.iterations << "\n";
    out << "residual_rms: " << format_double(fit.residual_rms) << "\n";
    out << "scale: " << format_double(fit.scale) << "\n";
    out << "width: " << format_double(fit.width) << "\n";
    out << "b_y0: " << format_double(fit.b_y0) << "\n";
    if (!out) throw io_error("write failed for '" + path + "'");
}

void export_width_report(const WidthReport& report, const std::string& path,
                         const Provenance& prov) {
    std::ofstream out = open_out(path);
    write_header(out, prov);
    out << "axis: " << report.axis << "\n";
    out << "method: " << to_string(report.method) << "\n";
    out << "hwhm: " << format_double(report.hwhm) << "\n";
    out << "extremum_1: " << format_double(report.extrema_positions[0]) << "\n";
    out << "extremum_2: " << format_double(report.extrema_positions[1]) << "\n";
    if (!out) throw io_error("write failed for '" + path + "'");
}

void ingest_curve(const std::string& path, std::vector<double>& b_y,
                  std::vector<double>& amplitude) {
    CsvReader reader(path);
    std::vector<std::string> cells;
    bool first = true;
    while (reader.next(cells)) {
        if (cells.size() != 2)
            throw io_error(path + ":" + std::to_string(reader.line_no) +
                           ": expected two columns (b_y, amplitude)");
        if (first) {
            first = false;
            // Optional header row.
            char* end = nullptr;
            std::strtod(cells[0].c_str(), &end);
            if (end == cells[0].c_str()) continue;
        }
        b_y.push_back(parse_cell(cells[0], path, reader.line_no));
        amplitude.push_back(parse_cell(cells[1], path, reader.line_no));
    }
    if (b_y.size() < 4) throw io_error(path + ": need at least 4 curve points");
}

}  // namespace hanle
