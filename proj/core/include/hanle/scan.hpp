// Field-scanning protocols over either the closed-form modified model or the
// full ODE dynamics: 1D line scans, 2D grid maps, radial maps.

#ifndef HANLE_SCAN_HPP
#define HANLE_SCAN_HPP

#include <string>
#include <vector>

#include "hanle/dynamics.hpp"
#include "hanle/reference_model.hpp"
#include "hanle/types.hpp"

namespace hanle {

enum class ScanKind { LineX, LineY, GridXY, Radial };
enum class Engine { ClosedForm, Ode };

std::string to_string(ScanKind k);
std::string to_string(Engine e);
ScanKind scan_kind_from_string(const std::string& s);
Engine engine_from_string(const std::string& s);

struct ScanProtocol {
    ScanKind kind = ScanKind::LineX;
    Engine engine = Engine::ClosedForm;
    FieldVector fixed;        // values of the non-swept components
    double sweep_min = -1.0;  // nT
    double sweep_max = 1.0;   // nT
    int samples = 201;        // per line / per ray
    double sweep_rate = 1.0;  // nT/s, ODE engine
    bool backward = false;

    // GridXY
    double grid_bx_min = -1.0, grid_bx_max = 1.0;
    int grid_bx_steps = 41;
    double grid_by_min = -1.0, grid_by_max = 1.0;
    int grid_by_steps = 41;

    // Radial
    double radius = 42.5;          // nT
    double angle_step_deg = 5.0;
    bool through_center = false;   // edge-to-opposite-edge rays (semicircle set)

    // ODE engine state handling
    double settle_time = 0.0;      // hold at the start field before recording
    double seed_eps = 1e-6;        // reset seed magnitude in P_z
    bool carry_state = false;      // carry state across rows/rays

    int smooth_window = 0;         // odd moving-average width along rows, 0 = off

    void validate() const;
};

struct ScanSample {
    double t = 0.0;  // seconds in ODE mode, sample index in closed-form mode
    FieldVector field;
    double s_b = 0.0;
    double s_t = 0.0;
    bool has_state = false;
    SpinState state;
};

struct ScanTrace {
    std::vector<ScanSample> samples;
    ScanKind kind = ScanKind::LineX;
    Engine engine = Engine::ClosedForm;
    double angle_deg = 0.0;  // radial rays only
    bool truncated = false;
    std::string diagnostic;
    std::vector<std::string> notes;
};

struct SignalMap {
    std::vector<double> bx_values;
    std::vector<double> by_values;
    std::vector<double> s_b;  // row-major, index = iy * nx + ix
    std::vector<double> s_t;  // empty when absent
    std::vector<std::string> provenance;

    std::size_t nx() const { return bx_values.size(); }
    std::size_t ny() const { return by_values.size(); }
    bool has_s_t() const { return !s_t.empty(); }
    double sb_at(std::size_t ix, std::size_t iy) const { return s_b[iy * nx() + ix]; }
    double st_at(std::size_t ix, std::size_t iy) const { return s_t[iy * nx() + ix]; }
    bool complete() const {
        return s_b.size() == nx() * ny() && (s_t.empty() || s_t.size() == nx() * ny());
    }
};

// Bundles the two engines' parameters; the closed-form engine uses
// `modified`, the ODE engine uses `dynamics` + `integ`. In ODE mode s_b is
// the detected signal A_y + xi P_y and s_t is the classic transmission form
// evaluated at the instantaneous field with gamma2 (the reduced dynamics
// carries no transmission observable of its own).
struct ScanModel {
    ModifiedModelParams modified;
    DynamicsConfig dynamics;
    IntegratorSettings integ;
};

// Line scan along B_x or B_y. The closed-form engine evaluates the modified
// signals pointwise, carrying the effective-field branch sign from the most
// recent nonzero B_y. The ODE engine integrates one continuous ramp with
// state memory across samples. `state_io`, when given, supplies the initial
// state and receives the final one (row/ray chaining).
ScanTrace run_line_scan(const ScanProtocol& protocol, const ScanModel& model,
                        SpinState* state_io = nullptr);

// Grid map assembled from LINE_X rows. ODE rows restart from the reset state
// (zero plus a P_z seed following the row's B_y sign) unless carry_state is
// set; failed rows are flagged in provenance, not silently filled.
SignalMap run_grid_map(const ScanProtocol& protocol, const ScanModel& model);

// Radial rays from the circle edge toward the center, or through to the
// opposite edge when through_center is set (angles then cover a semicircle).
std::vector<ScanTrace> run_radial_map(const ScanProtocol& protocol, const ScanModel& model);

// Centered moving average of odd width applied along each row; width <= 1
// returns the input unchanged.
void smooth_rows(SignalMap& map, int window);

}  // namespace hanle

#endif
