// Text-first data exchange: CSV maps and traces, key-value report records.
// All numbers are written as shortest round-trip decimal text; comment lines
// start with '#'.
//
// CSV_GRID: header row of B_x values after a corner label, first column B_y
// values, body = one signal channel.
// CSV_LONG: columns b_x, b_y, s_b[, s_t].

#ifndef HANLE_IO_HPP
#define HANLE_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "hanle/analysis.hpp"
#include "hanle/bifurcation.hpp"
#include "hanle/fit.hpp"
#include "hanle/scan.hpp"

namespace hanle {

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class MapFormat { Grid, Long };

MapFormat map_format_from_string(const std::string& s);

// Provenance comment block: tool version, config hash, optional timestamp.
struct Provenance {
    std::uint64_t config_hash = 0;
    bool with_timestamp = true;
    std::vector<std::string> extra;  // free-form note lines

    std::vector<std::string> lines() const;
};

// Shortest decimal text that parses back to the identical double.
std::string format_double(double v);

SignalMap ingest_map(const std::string& path, MapFormat format);

void export_map(const SignalMap& map, const std::string& path, MapFormat format,
                Channel channel, const Provenance& prov);
void export_trace(const ScanTrace& trace, const std::string& path, const Provenance& prov);
void export_radial(const std::vector<ScanTrace>& rays, const std::string& path,
                   const Provenance& prov);
void export_diagram(const BifurcationDiagram& diagram, const std::string& path,
                    const Provenance& prov);
void export_hysteresis_traces(const HysteresisReport& report, const std::string& path,
                              const Provenance& prov);
void export_hysteresis_report(const HysteresisReport& report, const std::string& path,
                              const Provenance& prov);
void export_fit_report(const FitResult& fit, const std::string& path, const Provenance& prov);
void export_curve_fit_report(const CurveFitResult& fit, const std::string& path,
                             const Provenance& prov);
void export_width_report(const WidthReport& report, const std::string& path,
                         const Provenance& prov);

// Two-column CSV (b_y, amplitude) for amplitude-vs-B_y curve fits.
void ingest_curve(const std::string& path, std::vector<double>& b_y,
                  std::vector<double>& amplitude);

}  // namespace hanle

#endif
