// Test-only reference evaluations, kept independent of the library
// implementation paths they check.

#ifndef HANLE_TESTS_ORACLES_HPP
#define HANLE_TESTS_ORACLES_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <vector>

namespace oracles {

// Transliterations of the closed-form rotation/transmission signals in
// extended precision, with a different operation grouping than the library.
inline long double s_b_reference(long double wx, long double wy, long double wz,
                                 long double g) {
    const long double g2 = g * g;
    const long double wyz2 = wy * wy + wz * wz;
    const long double common = g2 + 4.0L * wx * wx;
    const long double num = g * wz * (common + wyz2) - wx * wy * (common - 2.0L * wyz2);
    const long double den = (g2 + wx * wx + wyz2) * (common + 4.0L * wyz2);
    return num / den;
}

inline long double s_t_reference(long double wx, long double wy, long double wz,
                                 long double g) {
    const long double g2 = g * g;
    const long double wx2 = wx * wx;
    const long double wyz2 = wy * wy + wz * wz;
    const long double q = wyz2 - 2.0L * wx2;
    const long double num = g2 + q * q / g2 + 2.0L * wyz2 + 5.0L * wx2;
    const long double den = (g2 + wx2 + wyz2) * (g2 + 4.0L * wx2 + 4.0L * wyz2);
    return num / den;
}

// Stretched-state populations from the rotation operator itself: build J_y
// for the given 2F, exponentiate exp(-i (pi/2) J_y) by eigendecomposition,
// and read off |<m| R |F,F>|^2. Independent of any binomial identity.
inline std::vector<double> wigner_populations(int twice_f) {
    using Complex = std::complex<double>;
    const int dim = twice_f + 1;
    const double f = 0.5 * twice_f;
    Eigen::MatrixXcd jy = Eigen::MatrixXcd::Zero(dim, dim);
    for (int k = 0; k + 1 < dim; ++k) {
        // <m+1| J_+ |m> = sqrt(F(F+1) - m(m+1)) with m = -F + k.
        const double m = -f + k;
        const double c = std::sqrt(f * (f + 1.0) - m * (m + 1.0));
        // J_y = (J_+ - J_-) / (2i)
        jy(k + 1, k) += Complex(0.0, -0.5) * c;
        jy(k, k + 1) += Complex(0.0, +0.5) * c;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(jy);
    const Eigen::VectorXd evals = es.eigenvalues();
    const Eigen::MatrixXcd v = es.eigenvectors();
    Eigen::VectorXcd phases(dim);
    for (int k = 0; k < dim; ++k) {
        const double angle = -0.5 * M_PI * evals(k);
        phases(k) = Complex(std::cos(angle), std::sin(angle));
    }
    // Column for the stretched state m = +F (last basis vector).
    Eigen::VectorXcd stretched = Eigen::VectorXcd::Zero(dim);
    stretched(dim - 1) = 1.0;
    const Eigen::VectorXcd rotated = v * (phases.asDiagonal() * (v.adjoint() * stretched));
    std::vector<double> populations(static_cast<size_t>(dim));
    for (int k = 0; k < dim; ++k) populations[static_cast<size_t>(k)] = std::norm(rotated(k));
    return populations;
}

}  // namespace oracles

#endif
