#include <doctest.h>

#include <cmath>

#include "hanle/bifurcation.hpp"

using namespace hanle;

namespace {

DynamicsConfig sp_cfg(double chi, double gamma1 = 1.0, double eta = 1.0,
                      double alpha = 0.1, double gamma2 = 10.0) {
    DynamicsConfig cfg;
    cfg.rates.gamma_gyro = 1.0;  // fields in rate units for these tests
    cfg.rates.gamma1 = gamma1;
    cfg.rates.gamma2 = gamma2;
    cfg.rates.chi = chi;
    cfg.rates.eta = eta;
    cfg.rates.alpha = alpha;
    cfg.rates.xi = 0.7;
    cfg.rates.pump_rate = gamma2;
    cfg.rates.a_x = 1.0;
    return cfg;
}

}  // namespace

TEST_CASE("pitchfork amplitude") {
    ModelRates r;
    r.gamma1 = 1.0;
    r.eta = 1.0;
    r.chi = 1.0;
    CHECK(pitchfork_amplitude(r) == 0.0);  // threshold
    r.chi = 2.0;
    CHECK(pitchfork_amplitude(r) == doctest::Approx(1.0).epsilon(1e-15));
    r.chi = 1.44;
    r.eta = 4.0;
    CHECK(pitchfork_amplitude(r) == doctest::Approx(std::sqrt(0.44 / 4.0)).epsilon(1e-12));
    r.eta = 0.0;
    CHECK_THROWS_AS(pitchfork_amplitude(r), invalid_parameter);
}

TEST_CASE("pitchfork amplitude satisfies the cubic stationarity condition") {
    for (double chi : {1.0, 1.3, 2.7, 8.0}) {
        for (double eta : {0.3, 1.0, 4.0}) {
            ModelRates r;
            r.gamma1 = 1.0;
            r.chi = chi;
            r.eta = eta;
            const double p = pitchfork_amplitude(r);
            const double landau = r.eta * p * p * p + (r.gamma1 - r.chi) * p;
            CHECK(std::abs(landau) <= 1e-14 * std::max(1.0, chi));
        }
    }
}

TEST_CASE("threshold check is strict") {
    ModelRates r;
    r.gamma1 = 1.0;
    r.chi = 0.0;
    CHECK(!threshold_check(r));
    r.chi = 1.0;
    CHECK(!threshold_check(r));
    r.chi = 1.01;
    CHECK(threshold_check(r));
}

TEST_CASE("sweep_diagram: chi sweep crosses the pitchfork") {
    const DynamicsConfig cfg = sp_cfg(0.0);
    const BifurcationDiagram d =
        sweep_diagram(ControlParam::Chi, 0.2, 2.0, 19, cfg, FieldVector{});
    REQUIRE(d.control_values.size() == 19);
    for (size_t k = 0; k < d.control_values.size(); ++k) {
        const double chi = d.control_values[k];
        const auto& eqs = d.branches[k];
        if (chi < 1.0) {
            REQUIRE(eqs.size() == 1);
            CHECK(eqs[0].stable);
            CHECK(std::abs(eqs[0].state.p_z) <= 1e-9);
        } else if (chi > 1.0) {
            REQUIRE(eqs.size() == 3);
            int stable = 0;
            for (const auto& e : eqs)
                if (e.stable) {
                    ++stable;
                    CHECK(std::abs(e.state.p_z) ==
                          doctest::Approx(std::sqrt(chi - 1.0)).epsilon(1e-8));
                }
            CHECK(stable == 2);
        }
    }
}

TEST_CASE("sweep_diagram: branches come in sign pairs at zero field") {
    const DynamicsConfig cfg = sp_cfg(2.0, 1.0, 1.0, 0.0);
    const BifurcationDiagram d =
        sweep_diagram(ControlParam::Chi, 1.5, 3.0, 7, cfg, FieldVector{});
    for (const auto& eqs : d.branches) {
        for (const auto& e : eqs) {
            bool has_mirror = false;
            for (const auto& o : eqs)
                if (std::abs(o.state.p_z + e.state.p_z) <= 1e-9) has_mirror = true;
            CHECK(has_mirror);
        }
    }
}

TEST_CASE("sweep_diagram: imperfect pitchfork under transverse field") {
    const DynamicsConfig cfg = sp_cfg(2.0, 1.0, 1.0, 0.5, 1.0);
    FieldVector fixed;
    const BifurcationDiagram d =
        sweep_diagram(ControlParam::By, 0.01, 0.2, 6, cfg, fixed);
    for (size_t k = 0; k < d.branches.size(); ++k) {
        const auto& eqs = d.branches[k];
        REQUIRE(eqs.size() == 3);
        std::vector<double> stable_pz;
        for (const auto& e : eqs)
            if (e.stable) stable_pz.push_back(e.state.p_z);
        REQUIRE(stable_pz.size() == 2);
        CHECK(std::abs(std::abs(stable_pz[0]) - std::abs(stable_pz[1])) > 1e-6);
    }
}

TEST_CASE("sweep_diagram: zero-width range gives one column") {
    const DynamicsConfig cfg = sp_cfg(0.5);
    const BifurcationDiagram d =
        sweep_diagram(ControlParam::Chi, 0.5, 0.5, 11, cfg, FieldVector{});
    CHECK(d.control_values.size() == 1);
}

TEST_CASE("hysteresis: subthreshold traces coincide") {
    const DynamicsConfig cfg = sp_cfg(0.5);
    HysteresisProtocol ramp;
    ramp.axis = 'x';
    ramp.sweep_from = -0.5;
    ramp.sweep_to = 3.0;
    ramp.rate = 2e-4;  // quasi-static: dynamic lag well under the tolerance
    ramp.fixed.b_y = -0.02;
    ramp.samples = 141;
    ramp.settle_time = 30.0;
    IntegratorSettings st;
    st.max_time = 1e9;
    const HysteresisReport rep = hysteresis_scan(ramp, cfg, st);
    REQUIRE(rep.valid);
    CHECK(!rep.bistable);
    double max_abs = 0.0, rms = 0.0;
    const size_t n = rep.forward_trace.size();
    for (size_t i = 0; i < n; ++i) {
        max_abs = std::max(max_abs, std::abs(rep.forward_trace[i].signal));
        const double diff =
            rep.forward_trace[i].signal - rep.backward_trace[n - 1 - i].signal;
        rms += diff * diff;
    }
    rms = std::sqrt(rms / static_cast<double>(n));
    CHECK(rms <= 1e-3 * max_abs);
}

TEST_CASE("hysteresis: trapped branch inverts the backward trace above threshold") {
    const DynamicsConfig cfg = sp_cfg(2.0);
    HysteresisProtocol ramp;
    ramp.axis = 'x';
    ramp.sweep_from = -0.5;  // inside the bistable window (edge at 1 for chi=2)
    ramp.sweep_to = 6.0;
    ramp.rate = 0.02;
    ramp.fixed.b_y = -0.02;  // seed sign opposes the prepared branch
    ramp.samples = 201;
    ramp.settle_time = 25.0;
    ramp.prepared_p_z = 0.5;
    IntegratorSettings st;
    st.max_time = 1e9;
    const HysteresisReport rep = hysteresis_scan(ramp, cfg, st);
    REQUIRE(rep.valid);
    CHECK(rep.bistable);
    CHECK(rep.loop_area > 0.05);
    // Inside the window the two legs sit on opposite branches.
    const size_t n = rep.forward_trace.size();
    int inverted = 0;
    for (size_t i = 0; i < n; ++i) {
        const auto& f = rep.forward_trace[i];
        if (f.field.b_x < 0.15 || f.field.b_x > 0.85) continue;
        const auto& b = rep.backward_trace[n - 1 - i];
        if (f.signal > 0.05 && b.signal < -0.05) ++inverted;
    }
    CHECK(inverted >= 10);
}

TEST_CASE("hysteresis: loop area is zero below threshold, positive above") {
    HysteresisProtocol ramp;
    ramp.axis = 'x';
    ramp.sweep_from = -0.5;
    ramp.sweep_to = 4.0;
    ramp.rate = 0.01;
    ramp.fixed.b_y = -0.02;
    ramp.samples = 121;
    ramp.settle_time = 25.0;
    ramp.prepared_p_z = 0.5;
    IntegratorSettings st;
    st.max_time = 1e9;
    const HysteresisReport below = hysteresis_scan(ramp, sp_cfg(0.6), st);
    const HysteresisReport above = hysteresis_scan(ramp, sp_cfg(2.0), st);
    REQUIRE(below.valid);
    REQUIRE(above.valid);
    CHECK(below.loop_area < 0.05 * above.loop_area);
    CHECK(above.loop_area > 0.05);
}

TEST_CASE("hysteresis: memory holds the trapped sign for 100 relaxation times") {
    const DynamicsConfig cfg = sp_cfg(2.0);
    // Settle onto the + branch against a tiny opposing seed, then hold.
    SpinState state;
    state.p_z = 0.5;
    const Omega w = omega_from_field(FieldVector{0.0, -0.02, 0.0}, cfg.rates);
    IntegratorSettings st;
    st.max_time = 25.0;
    st.convergence_eps = 1e-30;
    Trajectory traj = integrate(state, w, cfg, st);
    REQUIRE(!traj.failed);
    REQUIRE(traj.final_state().p_z > 0.5);

    st.max_time = 100.0 / cfg.rates.gamma1;
    traj = integrate(traj.final_state(), w, cfg, st);
    REQUIRE(!traj.failed);
    CHECK(traj.final_state().p_z > 0.5);
}

TEST_CASE("slow-ramp switch point approaches the continuation fold") {
    // Stronger seeding so the post-fold branch clears the switch deadband.
    DynamicsConfig cfg = sp_cfg(2.0, 1.0, 1.0, 0.5, 1.0);
    const double b_y = -0.5;

    // Fold location from the natural continuation: the largest B_x still
    // carrying three equilibria.
    FieldVector fixed;
    fixed.b_y = b_y;
    const BifurcationDiagram d =
        sweep_diagram(ControlParam::Bx, 0.0, 1.2, 121, cfg, fixed);
    double fold = 0.0;
    for (size_t k = 0; k < d.control_values.size(); ++k)
        if (d.branches[k].size() == 3) fold = std::max(fold, d.control_values[k]);
    REQUIRE(fold > 0.1);

    HysteresisProtocol ramp;
    ramp.axis = 'x';
    ramp.sweep_from = 0.0;
    ramp.sweep_to = 1.5;
    ramp.rate = 0.003;
    ramp.fixed.b_y = b_y;
    ramp.samples = 301;
    ramp.settle_time = 30.0;
    ramp.prepared_p_z = 1.0;
    IntegratorSettings st;
    st.max_time = 1e9;
    const HysteresisReport rep = hysteresis_scan(ramp, cfg, st);
    REQUIRE(rep.valid);
    REQUIRE(!rep.switch_points.empty());
    CHECK(rep.switch_points.front() >= fold - 0.05);
    CHECK(rep.switch_points.front() <= fold + 0.3);
}
