#include <doctest.h>

#include <cmath>
#include <random>

#include "hanle/reference_model.hpp"
#include "oracles.hpp"

using namespace hanle;

TEST_CASE("s_b_classic spot values") {
    CHECK(s_b_classic(0, 0, 0, 1.0) == 0.0);
    // Hand evaluation: -(1*1*(1+4-2)) / ((1+1+1)(1+4+4)) = -3/27
    CHECK(s_b_classic(1, 1, 0, 1.0) == doctest::Approx(-3.0 / 27.0).epsilon(1e-15));
    CHECK(s_b_classic(-1, 1, 0, 1.0) == doctest::Approx(+3.0 / 27.0).epsilon(1e-15));
}

TEST_CASE("s_t_classic spot values") {
    // All omega terms vanish: G^2 / G^4
    CHECK(s_t_classic(0, 0, 0, 2.0) == doctest::Approx(0.25).epsilon(1e-15));
    // (1 + 4 + 0 + 5) / ((1+1)(1+4)) = 1
    CHECK(s_t_classic(1, 0, 0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    // Depends on w_y, w_z only through w_y^2 + w_z^2.
    CHECK(s_t_classic(0, 3, 4, 1.0) == s_t_classic(0, 5, 0, 1.0));
}

TEST_CASE("classic signals reject gamma <= 0") {
    CHECK_THROWS_AS(s_b_classic(1, 1, 0, 0.0), invalid_parameter);
    CHECK_THROWS_AS(s_t_classic(1, 1, 0, -1.0), invalid_parameter);
}

TEST_CASE("classic signals match the extended-precision reference") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> w(-8.0, 8.0);
    std::uniform_real_distribution<double> g(0.3, 6.0);
    for (int k = 0; k < 20000; ++k) {
        const double wx = w(rng), wy = w(rng), wz = w(rng), gamma = g(rng);
        const long double sb_ref = oracles::s_b_reference(wx, wy, wz, gamma);
        const long double st_ref = oracles::s_t_reference(wx, wy, wz, gamma);
        const double sb = s_b_classic(wx, wy, wz, gamma);
        const double st = s_t_classic(wx, wy, wz, gamma);
        // The rotation numerator cancels at isolated points; the absolute
        // term bounds double rounding of the individual numerator terms.
        CHECK(std::abs(sb - static_cast<double>(sb_ref)) <=
              1e-12 * std::abs(static_cast<double>(sb_ref)) + 3e-14);
        CHECK(std::abs(st - static_cast<double>(st_ref)) <=
              1e-12 * std::abs(static_cast<double>(st_ref)));
    }
}

TEST_CASE("s_b oddness and s_t evenness over random samples") {
    std::mt19937 rng(43);
    std::uniform_real_distribution<double> w(-8.0, 8.0);
    std::uniform_real_distribution<double> g(0.3, 6.0);
    for (int k = 0; k < 5000; ++k) {
        const double wx = w(rng), wy = w(rng), gamma = g(rng);
        // At w_z = 0, s_b is odd in w_x and in w_y separately.
        CHECK(s_b_classic(-wx, wy, 0, gamma) == -s_b_classic(wx, wy, 0, gamma));
        CHECK(s_b_classic(wx, -wy, 0, gamma) == -s_b_classic(wx, wy, 0, gamma));
        const double wz = w(rng);
        // s_t is even in each component.
        const double st = s_t_classic(wx, wy, wz, gamma);
        CHECK(s_t_classic(-wx, wy, wz, gamma) == st);
        CHECK(s_t_classic(wx, -wy, wz, gamma) == st);
        CHECK(s_t_classic(wx, wy, -wz, gamma) == st);
    }
}

TEST_CASE("quadrant sign pattern near the origin is -sign(wx wy)") {
    const double eps = 1e-3;
    for (double sx : {-1.0, 1.0}) {
        for (double sy : {-1.0, 1.0}) {
            const double v = s_b_classic(sx * eps, sy * eps, 0, 1.0);
            CHECK(v * (sx * sy) < 0.0);
        }
    }
}

TEST_CASE("effective_b_y branches") {
    ModifiedModelParams p;
    SUBCASE("degenerate zero") {
        p.b_y0 = 0.0;
        CHECK(effective_b_y(0.0, p) == 0.0);
    }
    SUBCASE("paper magnitude at b_y = b_y0 = 23") {
        p.b_y0 = 23.0;
        CHECK(effective_b_y(23.0, p) == doctest::Approx(23.0 * std::sqrt(2.0)).epsilon(1e-15));
    }
    SUBCASE("negative branch") {
        p.b_y0 = 23.0;
        CHECK(effective_b_y(-10.0, p) ==
              doctest::Approx(-std::sqrt(100.0 + 529.0)).epsilon(1e-15));
    }
    SUBCASE("sign at zero follows branch_sign") {
        p.b_y0 = 5.0;
        p.branch_sign = +1;
        CHECK(effective_b_y(0.0, p) == 5.0);
        p.branch_sign = -1;
        CHECK(effective_b_y(0.0, p) == -5.0);
    }
}

TEST_CASE("effective_b_y is odd and dominated from below by b_y0") {
    ModifiedModelParams p;
    p.b_y0 = 3.0;
    std::mt19937 rng(44);
    std::uniform_real_distribution<double> b(-50.0, 50.0);
    for (int k = 0; k < 2000; ++k) {
        const double by = b(rng);
        if (by == 0.0) continue;
        CHECK(effective_b_y(-by, p) == -effective_b_y(by, p));
        CHECK(std::abs(effective_b_y(by, p)) >= p.b_y0);
    }
}

TEST_CASE("modified signals reduce to classic in the identity configuration") {
    ModifiedModelParams p;
    p.base.gamma_gyro = 1.0;
    p.base.gamma2 = 1.3;
    std::mt19937 rng(45);
    std::uniform_real_distribution<double> b(-5.0, 5.0);
    for (int k = 0; k < 2000; ++k) {
        const FieldVector f{b(rng), b(rng), b(rng)};
        const Omega w = omega_from_field(f, p.base);
        CHECK(s_b_modified(f, p) == s_b_classic(w, p.base.gamma2));
        CHECK(s_t_modified(f, p) == s_t_classic(w, p.base.gamma2));
    }
}

TEST_CASE("region mask zeroes the signal outside") {
    ModifiedModelParams p;
    p.base.gamma_gyro = 1.0;
    // Active only where b_x >= 0.
    p.active_region.half_planes.push_back(HalfPlane{1.0, 0.0, 0.0});
    CHECK(s_b_modified(FieldVector{-1.0, 1.0, 0}, p) == 0.0);
    CHECK(s_t_modified(FieldVector{-1.0, 1.0, 0}, p) == 0.0);
    CHECK(s_b_modified(FieldVector{+1.0, 1.0, 0}, p) != 0.0);
}

TEST_CASE("angular sector containment") {
    ActiveRegion region;
    region.sectors.push_back(AngularSector{-30.0, 30.0, 0.0, 10.0});
    CHECK(region.contains(5.0, 0.0));
    CHECK(region.contains(5.0, 2.0));
    CHECK(region.contains(5.0, -2.0));     // wrap across 0 degrees
    CHECK(!region.contains(-5.0, 0.0));    // opposite side
    CHECK(!region.contains(20.0, 0.0));    // outside r_max
}

TEST_CASE("decay envelope clamps at zero") {
    ModifiedModelParams p;
    p.base.gamma_gyro = 1.0;
    p.decay_coeff = 0.1;
    // |B_xy| = 5 -> envelope 0.5
    const FieldVector f{3.0, 4.0, 0.0};
    const Omega w = omega_from_field(f, p.base);
    CHECK(s_b_modified(f, p) ==
          doctest::Approx(0.5 * s_b_classic(w, p.base.gamma2)).epsilon(1e-15));
    // Far field: envelope clamps to exactly zero.
    CHECK(s_b_modified(FieldVector{30.0, 0.0, 0.0}, p) == 0.0);
}

TEST_CASE("k_aniso compresses the map along B_y") {
    ModifiedModelParams classic;
    classic.base.gamma_gyro = 1.0;
    ModifiedModelParams scaled = classic;
    scaled.k_aniso = 2.0;
    // Pointwise: scaled model at b_y equals classic at 2 b_y.
    std::mt19937 rng(46);
    std::uniform_real_distribution<double> b(-5.0, 5.0);
    for (int k = 0; k < 1000; ++k) {
        const double bx = b(rng), by = b(rng);
        CHECK(s_b_modified(FieldVector{bx, by, 0}, scaled) ==
              doctest::Approx(s_b_modified(FieldVector{bx, 2.0 * by, 0}, classic))
                  .epsilon(1e-14));
    }
}

TEST_CASE("b_y0 > 0 lowers the transmission peak at zero field") {
    ModifiedModelParams p;
    p.base.gamma_gyro = 1.0;
    const double peak = s_t_modified(FieldVector{0, 0, 0}, p);
    CHECK(peak == doctest::Approx(1.0).epsilon(1e-15));  // gamma2 = 1
    p.b_y0 = 0.5;
    CHECK(s_t_modified(FieldVector{0, 0, 0}, p) < peak);
}
