// Signal-shape analysis: extrema location, resonance widths (half the
// distance between the dominant extrema), amplitude normalization, and
// nonlinear least-squares fitting of maps and amplitude curves to the
// modified reference model.

#ifndef HANLE_ANALYSIS_HPP
#define HANLE_ANALYSIS_HPP

#include <array>
#include <string>
#include <vector>

#include "hanle/scan.hpp"
#include "hanle/types.hpp"

namespace hanle {

struct unresolved_width : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Channel { SB, ST };

std::string to_string(Channel c);
Channel channel_from_string(const std::string& s);

struct Extremum {
    double position = 0.0;  // sub-sample, from local quadratic interpolation
    double value = 0.0;
    bool is_maximum = false;
};

// Interior local extrema via three-point tests refined by quadratic
// interpolation. x must be strictly monotone. Returns an empty vector for
// monotone traces.
std::vector<Extremum> find_extrema(const std::vector<double>& x, const std::vector<double>& y);
std::vector<Extremum> find_extrema(const ScanTrace& trace, Channel channel);

enum class WidthMethod { ExtremaHalfDistance, HalfMax };

std::string to_string(WidthMethod m);
WidthMethod width_method_from_string(const std::string& s);

struct WidthReport {
    char axis = 'x';
    double hwhm = 0.0;  // nT when positions are fields
    std::array<double, 2> extrema_positions{};
    WidthMethod method = WidthMethod::ExtremaHalfDistance;
};

// Half the distance between the two dominant extrema (largest |value| with
// opposite signs; ties resolved toward the pair closest to the trace
// center). Throws unresolved_width when fewer than two suitable extrema
// exist.
WidthReport hwhm_extrema(const std::vector<double>& x, const std::vector<double>& y);
WidthReport hwhm_extrema(const ScanTrace& trace, Channel channel);

// Half width at half maximum of the dominant |signal| peak.
WidthReport hwhm_half_max(const std::vector<double>& x, const std::vector<double>& y);

// peak_signal / (photocurrent * density); the subthreshold constant of the
// normalized rotation amplitude, cm^3 when density is atoms/cm^3.
double normalize_amplitude(double peak_signal, double photocurrent, double density);

// Per-row dominant-extremum amplitude (signed value of the largest |s|
// extremum of each B_x row), e.g. for amplitude-vs-B_y curves.
struct RowAmplitude {
    double b_y = 0.0;
    double amplitude = 0.0;
};
std::vector<RowAmplitude> row_amplitudes(const SignalMap& map, Channel channel);

// Extrema positions of each row joined into per-quadrant polylines.
struct LocusBranch {
    int quadrant = 1;  // 1: (+,+)  2: (-,+)  3: (-,-)  4: (+,-)
    std::vector<std::array<double, 2>> points;  // (b_x, b_y)
};
std::vector<LocusBranch> extrema_locus(const SignalMap& map, Channel channel);

}  // namespace hanle

#endif
