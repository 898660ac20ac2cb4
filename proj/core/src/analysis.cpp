#include "hanle/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace hanle {

std::string to_string(Channel c) { return c == Channel::SB ? "s_b" : "s_t"; }

Channel channel_from_string(const std::string& s) {
    if (s == "s_b" || s == "sb") return Channel::SB;
    if (s == "s_t" || s == "st") return Channel::ST;
    throw invalid_parameter("unknown channel: " + s);
}

std::string to_string(WidthMethod m) {
    return m == WidthMethod::ExtremaHalfDistance ? "extrema_half_distance" : "half_max";
}

WidthMethod width_method_from_string(const std::string& s) {
    if (s == "extrema_half_distance" || s == "extrema") return WidthMethod::ExtremaHalfDistance;
    if (s == "half_max") return WidthMethod::HalfMax;
    throw invalid_parameter("unknown width method: " + s);
}

std::vector<Extremum> find_extrema(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw invalid_parameter("find_extrema: size mismatch");
    if (x.size() < 5) throw invalid_parameter("find_extrema: need at least 5 samples");
    std::vector<Extremum> out;
    for (size_t i = 1; i + 1 < y.size(); ++i) {
        const bool is_max = y[i] > y[i - 1] && y[i] >= y[i + 1];
        const bool is_min = y[i] < y[i - 1] && y[i] <= y[i + 1];
        if (!is_max && !is_min) continue;
        // Local quadratic through the three points for a sub-sample vertex.
        const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
        const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
        const double d0 = (y1 - y0) / (x1 - x0);
        const double d1 = (y2 - y1) / (x2 - x1);
        const double curv = (d1 - d0) / (x2 - x0);
        Extremum e;
        e.is_maximum = is_max;
        if (curv != 0.0) {
            const double xv = 0.5 * (x0 + x1) - 0.5 * d0 / curv;
            if (xv >= x0 && xv <= x2) {
                e.position = xv;
                // Quadratic value at the vertex.
                e.value = y0 + d0 * (xv - x0) + curv * (xv - x0) * (xv - x1);
            } else {
                e.position = x1;
                e.value = y1;
            }
        } else {
            e.position = x1;
            e.value = y1;
        }
        out.push_back(e);
    }
    return out;
}

namespace {

std::vector<double> trace_positions(const ScanTrace& trace) {
    std::vector<double> x;
    x.reserve(trace.samples.size());
    const bool along_y = (trace.kind == ScanKind::LineY);
    for (const auto& s : trace.samples) x.push_back(along_y ? s.field.b_y : s.field.b_x);
    return x;
}

std::vector<double> trace_values(const ScanTrace& trace, Channel channel) {
    std::vector<double> y;
    y.reserve(trace.samples.size());
    for (const auto& s : trace.samples)
        y.push_back(channel == Channel::SB ? s.s_b : s.s_t);
    return y;
}

}  // namespace

std::vector<Extremum> find_extrema(const ScanTrace& trace, Channel channel) {
    return find_extrema(trace_positions(trace), trace_values(trace, channel));
}

WidthReport hwhm_extrema(const std::vector<double>& x, const std::vector<double>& y) {
    const std::vector<Extremum> ext = find_extrema(x, y);
    // Dominant pair: opposite-sign extrema maximizing the combined |value|;
    // near-ties resolved toward the pair closest to the trace center.
    const double center = 0.5 * (x.front() + x.back());
    double best_score = -1.0;
    double best_dist = 0.0;
    int bi = -1, bj = -1;
    for (size_t i = 0; i < ext.size(); ++i) {
        for (size_t j = i + 1; j < ext.size(); ++j) {
            if (ext[i].value * ext[j].value >= 0.0) continue;
            const double score = std::abs(ext[i].value) + std::abs(ext[j].value);
            const double dist =
                std::abs(0.5 * (ext[i].position + ext[j].position) - center);
            const bool better =
                score > best_score * (1.0 + 1e-9) ||
                (score > best_score * (1.0 - 1e-9) && dist < best_dist);
            if (better) {
                best_score = score;
                best_dist = dist;
                bi = static_cast<int>(i);
                bj = static_cast<int>(j);
            }
        }
    }
    if (bi < 0)
        throw unresolved_width(
            "hwhm_extrema: no opposite-sign extrema pair found in the trace");
    WidthReport r;
    r.method = WidthMethod::ExtremaHalfDistance;
    r.extrema_positions = {ext[static_cast<size_t>(bi)].position,
                           ext[static_cast<size_t>(bj)].position};
    r.hwhm = std::abs(r.extrema_positions[0] - r.extrema_positions[1]) / 2.0;
    if (!(r.hwhm > 0.0)) throw unresolved_width("hwhm_extrema: degenerate extrema pair");
    return r;
}

WidthReport hwhm_extrema(const ScanTrace& trace, Channel channel) {
    WidthReport r = hwhm_extrema(trace_positions(trace), trace_values(trace, channel));
    r.axis = (trace.kind == ScanKind::LineY) ? 'y' : 'x';
    return r;
}

WidthReport hwhm_half_max(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 5)
        throw invalid_parameter("hwhm_half_max: need at least 5 samples");
    size_t ipk = 0;
    for (size_t i = 0; i < y.size(); ++i)
        if (std::abs(y[i]) > std::abs(y[ipk])) ipk = i;
    const double peak = y[ipk];
    if (peak == 0.0) throw unresolved_width("hwhm_half_max: flat trace");
    const double half = 0.5 * std::abs(peak);
    auto crossing = [&](bool leftward) -> double {
        const int step = leftward ? -1 : 1;
        for (int i = static_cast<int>(ipk); i + step >= 0 &&
                                            i + step < static_cast<int>(y.size());
             i += step) {
            const double a = std::abs(y[static_cast<size_t>(i)]);
            const double b = std::abs(y[static_cast<size_t>(i + step)]);
            if (a >= half && b < half) {
                const double w = (a - half) / (a - b);
                return x[static_cast<size_t>(i)] +
                       w * (x[static_cast<size_t>(i + step)] - x[static_cast<size_t>(i)]);
            }
        }
        throw unresolved_width("hwhm_half_max: half level not crossed inside the trace");
    };
    const double xl = crossing(true);
    const double xr = crossing(false);
    WidthReport r;
    r.method = WidthMethod::HalfMax;
    r.extrema_positions = {xl, xr};
    r.hwhm = 0.5 * std::abs(xr - xl);
    return r;
}

double normalize_amplitude(double peak_signal, double photocurrent, double density) {
    if (!(photocurrent > 0.0)) throw invalid_parameter("normalize_amplitude: photocurrent <= 0");
    if (!(density > 0.0)) throw invalid_parameter("normalize_amplitude: density <= 0");
    if (!is_finite(peak_signal)) throw invalid_parameter("normalize_amplitude: non-finite peak");
    return peak_signal / (photocurrent * density);
}

std::vector<RowAmplitude> row_amplitudes(const SignalMap& map, Channel channel) {
    std::vector<RowAmplitude> out;
    const size_t nx = map.nx();
    if (nx < 5) return out;
    std::vector<double> y(nx);
    for (size_t j = 0; j < map.ny(); ++j) {
        for (size_t i = 0; i < nx; ++i)
            y[i] = (channel == Channel::SB) ? map.sb_at(i, j) : map.st_at(i, j);
        const std::vector<Extremum> ext = find_extrema(map.bx_values, y);
        if (ext.empty()) continue;
        const Extremum* best = &ext.front();
        for (const auto& e : ext)
            if (std::abs(e.value) > std::abs(best->value)) best = &e;
        out.push_back(RowAmplitude{map.by_values[j], best->value});
    }
    return out;
}

std::vector<LocusBranch> extrema_locus(const SignalMap& map, Channel channel) {
    std::vector<LocusBranch> branches(4);
    for (int q = 0; q < 4; ++q) branches[static_cast<size_t>(q)].quadrant = q + 1;
    const size_t nx = map.nx();
    if (nx < 5 || map.ny() == 0) return {};
    std::vector<double> y(nx);
    for (size_t j = 0; j < map.ny(); ++j) {
        for (size_t i = 0; i < nx; ++i)
            y[i] = (channel == Channel::SB) ? map.sb_at(i, j) : map.st_at(i, j);
        std::vector<Extremum> ext;
        try {
            ext = find_extrema(map.bx_values, y);
        } catch (const invalid_parameter&) {
            continue;  // rows without enough samples are skipped
        }
        const double by = map.by_values[j];
        for (const auto& e : ext) {
            const int q = (e.position >= 0.0) ? (by >= 0.0 ? 0 : 3) : (by >= 0.0 ? 1 : 2);
            branches[static_cast<size_t>(q)].points.push_back({e.position, by});
        }
    }
    std::vector<LocusBranch> out;
    for (auto& b : branches) {
        if (b.points.empty()) continue;
        std::sort(b.points.begin(), b.points.end(),
                  [](const auto& l, const auto& r) { return l[1] < r[1]; });
        out.push_back(std::move(b));
    }
    return out;
}

}  // namespace hanle
