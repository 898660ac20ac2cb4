#include <doctest.h>

#include <cmath>

#include "hanle/analysis.hpp"
#include "hanle/scan.hpp"

using namespace hanle;

namespace {

ScanModel unit_model(double gamma2 = 1.0) {
    ScanModel m;
    m.modified.base.gamma_gyro = 1.0;
    m.modified.base.gamma2 = gamma2;
    m.dynamics.rates = m.modified.base;
    return m;
}

ScanModel ode_model(double gamma1, double gamma2, double chi, double eta, double alpha,
                    double xi = 0.7) {
    ScanModel m;
    m.modified.base.gamma_gyro = 1.0;
    m.modified.base.gamma2 = gamma2;
    m.dynamics.rates = m.modified.base;
    m.dynamics.rates.gamma1 = gamma1;
    m.dynamics.rates.chi = chi;
    m.dynamics.rates.eta = eta;
    m.dynamics.rates.alpha = alpha;
    m.dynamics.rates.xi = xi;
    m.dynamics.rates.a_x = 1.0;
    m.dynamics.rates.pump_rate = gamma2;
    m.integ.max_time = 1e12;
    return m;
}

}  // namespace

TEST_CASE("closed-form line scan along B_x at B_y = 0 is identically zero") {
    ScanProtocol p;
    p.kind = ScanKind::LineX;
    p.sweep_min = -3.0;
    p.sweep_max = 3.0;
    p.samples = 101;
    const ScanTrace t = run_line_scan(p, unit_model());
    REQUIRE(t.samples.size() == 101);
    for (const auto& s : t.samples) CHECK(s.s_b == 0.0);
}

TEST_CASE("line scan fields are strictly monotone in sweep order") {
    ScanProtocol p;
    p.kind = ScanKind::LineY;
    p.sweep_min = -1.0;
    p.sweep_max = 1.0;
    p.samples = 21;
    SUBCASE("forward") {
        const ScanTrace t = run_line_scan(p, unit_model());
        for (size_t i = 1; i < t.samples.size(); ++i)
            CHECK(t.samples[i].field.b_y > t.samples[i - 1].field.b_y);
    }
    SUBCASE("backward") {
        p.backward = true;
        const ScanTrace t = run_line_scan(p, unit_model());
        for (size_t i = 1; i < t.samples.size(); ++i)
            CHECK(t.samples[i].field.b_y < t.samples[i - 1].field.b_y);
    }
}

TEST_CASE("closed-form engine is direction and rate independent") {
    ScanProtocol p;
    p.kind = ScanKind::LineX;
    p.fixed.b_y = 0.4;
    p.sweep_min = -2.0;
    p.sweep_max = 2.0;
    p.samples = 41;
    p.sweep_rate = 1.0;
    const ScanTrace fwd = run_line_scan(p, unit_model());
    p.backward = true;
    p.sweep_rate = 123.0;
    const ScanTrace bwd = run_line_scan(p, unit_model());
    REQUIRE(fwd.samples.size() == bwd.samples.size());
    const size_t n = fwd.samples.size();
    for (size_t i = 0; i < n; ++i) {
        CHECK(fwd.samples[i].field.b_x == bwd.samples[n - 1 - i].field.b_x);
        CHECK(fwd.samples[i].s_b == bwd.samples[n - 1 - i].s_b);
        CHECK(fwd.samples[i].s_t == bwd.samples[n - 1 - i].s_t);
    }
}

TEST_CASE("ODE trace matches the quasi-static composite in the linear regime") {
    ScanModel m = ode_model(1.0, 10.0, 0.3, 0.0, 0.5);
    ScanProtocol p;
    p.kind = ScanKind::LineX;
    p.engine = Engine::Ode;
    p.fixed.b_y = 0.4;
    p.sweep_min = -5.0;
    p.sweep_max = 5.0;
    p.samples = 101;
    p.sweep_rate = 0.005;
    p.settle_time = 25.0;
    const ScanTrace t = run_line_scan(p, m);
    REQUIRE(!t.truncated);
    REQUIRE(t.samples.size() == 101);
    double rms = 0.0, scale = 0.0;
    for (const auto& s : t.samples) {
        const Omega w = omega_from_field(s.field, m.dynamics.rates);
        const SpinState target = steady_state_linear(w, m.dynamics);
        const double expected = detected_signal(target, m.dynamics.rates);
        rms += (s.s_b - expected) * (s.s_b - expected);
        scale = std::max(scale, std::abs(expected));
    }
    rms = std::sqrt(rms / static_cast<double>(t.samples.size()));
    CHECK(rms <= 0.02 * scale);
}

TEST_CASE("grid map: classic four-petal symmetry under point reflection") {
    ScanProtocol p;
    p.kind = ScanKind::GridXY;
    p.grid_bx_min = -2.0;
    p.grid_bx_max = 2.0;
    p.grid_bx_steps = 41;
    p.grid_by_min = -2.0;
    p.grid_by_max = 2.0;
    p.grid_by_steps = 41;
    const SignalMap map = run_grid_map(p, unit_model());
    REQUIRE(map.complete());
    const size_t nx = map.nx(), ny = map.ny();
    for (size_t j = 0; j < ny; ++j)
        for (size_t i = 0; i < nx; ++i)
            CHECK(map.sb_at(i, j) ==
                  doctest::Approx(map.sb_at(nx - 1 - i, ny - 1 - j)).epsilon(1e-12));
    // Quadrant signs: -sign(bx * by) near the origin.
    CHECK(map.sb_at(nx / 2 + 3, ny / 2 + 3) < 0.0);
    CHECK(map.sb_at(nx / 2 - 3, ny / 2 + 3) > 0.0);
}

TEST_CASE("grid map: 1x1 grid is a single evaluation") {
    ScanProtocol p;
    p.kind = ScanKind::GridXY;
    p.grid_bx_min = 0.7;
    p.grid_bx_max = 0.7;
    p.grid_bx_steps = 1;
    p.grid_by_min = -0.3;
    p.grid_by_max = -0.3;
    p.grid_by_steps = 1;
    const ScanModel m = unit_model();
    const SignalMap map = run_grid_map(p, m);
    REQUIRE(map.nx() == 1);
    REQUIRE(map.ny() == 1);
    CHECK(map.sb_at(0, 0) == s_b_modified(FieldVector{0.7, -0.3, 0.0}, m.modified));
}

TEST_CASE("grid map: k = 3 shrinks extrema positions along B_y threefold") {
    ScanProtocol p;
    p.kind = ScanKind::GridXY;
    p.grid_bx_min = 0.5;
    p.grid_bx_max = 0.5;
    p.grid_bx_steps = 1;
    p.grid_by_min = -6.0;
    p.grid_by_max = 6.0;
    p.grid_by_steps = 2401;
    ScanModel classic = unit_model();
    ScanModel scaled = unit_model();
    scaled.modified.k_aniso = 3.0;
    const SignalMap map_classic = run_grid_map(p, classic);
    const SignalMap map_scaled = run_grid_map(p, scaled);

    // Extract the B_y column traces and compare extrema positions.
    auto column = [](const SignalMap& map) {
        std::vector<double> y(map.ny());
        for (size_t j = 0; j < map.ny(); ++j) y[j] = map.sb_at(0, j);
        return y;
    };
    const auto ext_classic = find_extrema(map_classic.by_values, column(map_classic));
    const auto ext_scaled = find_extrema(map_scaled.by_values, column(map_scaled));
    REQUIRE(!ext_classic.empty());
    REQUIRE(ext_classic.size() == ext_scaled.size());
    for (size_t k = 0; k < ext_classic.size(); ++k)
        CHECK(ext_scaled[k].position ==
              doctest::Approx(ext_classic[k].position / 3.0).epsilon(1e-3));
}

TEST_CASE("radial map: ray counts follow the angular step") {
    ScanProtocol p;
    p.kind = ScanKind::Radial;
    p.radius = 42.5;
    p.angle_step_deg = 5.0;
    p.samples = 11;
    SUBCASE("full circle") {
        const auto rays = run_radial_map(p, unit_model());
        CHECK(rays.size() == 72);
        CHECK(rays.front().samples.front().field.b_x == doctest::Approx(42.5));
        // Rays end at the center.
        CHECK(std::abs(rays.front().samples.back().field.b_x) <= 1e-12);
    }
    SUBCASE("through-center semicircle") {
        p.through_center = true;
        const auto rays = run_radial_map(p, unit_model());
        CHECK(rays.size() == 36);
        // Rays end at the opposite edge.
        CHECK(rays.front().samples.back().field.b_x == doctest::Approx(-42.5));
    }
}

TEST_CASE("radial map: opposite rays have sign-flipped s_b in the classic model") {
    ScanProtocol p;
    p.kind = ScanKind::Radial;
    p.radius = 3.0;
    p.angle_step_deg = 30.0;
    p.samples = 21;
    const auto rays = run_radial_map(p, unit_model());
    REQUIRE(rays.size() == 12);
    for (size_t k = 0; k < 6; ++k) {
        const auto& a = rays[k];
        const auto& b = rays[k + 6];
        for (size_t i = 0; i < a.samples.size(); ++i) {
            CHECK(a.samples[i].s_b == doctest::Approx(-b.samples[i].s_b).epsilon(1e-12));
            CHECK(a.samples[i].s_t == doctest::Approx(b.samples[i].s_t).epsilon(1e-12));
        }
    }
}

TEST_CASE("through-center rays above threshold keep the trapped branch past the center") {
    ScanModel m = ode_model(1.0, 10.0, 2.0, 1.0, 0.1);
    ScanProtocol p;
    p.kind = ScanKind::Radial;
    p.engine = Engine::Ode;
    p.radius = 2.0;
    p.angle_step_deg = 30.0;
    p.samples = 81;
    p.through_center = true;
    p.sweep_rate = 0.02;
    p.settle_time = 20.0;
    const auto rays = run_radial_map(p, m);
    REQUIRE(rays.size() == 6);
    // A ray at a small angle to the x axis crosses B_y = 0 mid-scan; the
    // self-sustained orientation holds its sign through the crossing.
    const auto& ray = rays[1];  // 30 degrees
    REQUIRE(!ray.truncated);
    const size_t mid = ray.samples.size() / 2;
    const double before = ray.samples[mid > 5 ? mid - 5 : 0].state.p_z;
    const double after = ray.samples[mid + 5].state.p_z;
    CHECK(before > 0.1);
    CHECK(after > 0.1);
}

TEST_CASE("ODE grid rows reset with a B_y-signed seed") {
    ScanModel m = ode_model(1.0, 10.0, 2.0, 1.0, 0.1);
    ScanProtocol p;
    p.kind = ScanKind::GridXY;
    p.engine = Engine::Ode;
    p.grid_bx_min = -1.5;
    p.grid_bx_max = 1.5;
    p.grid_bx_steps = 61;
    p.grid_by_min = -0.3;
    p.grid_by_max = 0.3;
    p.grid_by_steps = 3;
    p.sweep_rate = 0.05;
    p.settle_time = 30.0;
    const SignalMap map = run_grid_map(p, m);
    REQUIRE(map.complete());
    // Rows at opposite B_y seed opposite orientation branches, so the signal
    // near B_x ~ 0.5 carries opposite signs.
    size_t ix = 0;
    for (size_t i = 0; i < map.nx(); ++i)
        if (std::abs(map.bx_values[i] - 0.5) < std::abs(map.bx_values[ix] - 0.5)) ix = i;
    CHECK(map.sb_at(ix, 0) * map.sb_at(ix, 2) < 0.0);
}

TEST_CASE("row smoothing is a centered moving average") {
    SignalMap map;
    map.bx_values = {0, 1, 2, 3, 4};
    map.by_values = {0};
    map.s_b = {1, 2, 3, 4, 5};
    smooth_rows(map, 3);
    CHECK(map.s_b[1] == doctest::Approx(2.0));
    CHECK(map.s_b[2] == doctest::Approx(3.0));
    // Edge windows shrink.
    CHECK(map.s_b[0] == doctest::Approx(1.5));
    CHECK_THROWS_AS(smooth_rows(map, 4), invalid_parameter);
}

TEST_CASE("protocol validation") {
    ScanProtocol p;
    p.kind = ScanKind::LineX;
    p.sweep_min = 1.0;
    p.sweep_max = 1.0;
    CHECK_THROWS_AS(p.validate(), invalid_parameter);
    p = ScanProtocol{};
    p.kind = ScanKind::Radial;
    p.angle_step_deg = 7.0;  // does not divide 360
    CHECK_THROWS_AS(p.validate(), invalid_parameter);
    p = ScanProtocol{};
    p.engine = Engine::Ode;
    p.sweep_rate = 0.0;
    CHECK_THROWS_AS(p.validate(), invalid_parameter);
}
