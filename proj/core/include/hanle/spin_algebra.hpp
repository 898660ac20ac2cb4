// Angular-momentum bookkeeping for stretched states: sublevel populations
// under a pi/2 basis rotation, second moments, and the quasi-alignment
// projection ratio. F is passed as twice_f (2F) so half-integer spins stay
// exact.

#ifndef HANLE_SPIN_ALGEBRA_HPP
#define HANLE_SPIN_ALGEBRA_HPP

#include <vector>

#include "hanle/types.hpp"

namespace hanle {

struct SublevelDistribution {
    int twice_f = 0;
    std::vector<double> populations;  // index k corresponds to m = -F + k

    double f() const { return 0.5 * twice_f; }
    int size() const { return twice_f + 1; }
};

// Binomial populations C(2F, F+m) / 2^(2F) of a state stretched along one
// axis, expanded along an orthogonal axis. Exact integer binomials are used
// up to 2F = 64, log-space evaluation beyond.
SublevelDistribution stretched_state_populations(int twice_f);

// <F_x^2> = F/2 for the stretched state.
double second_moment_x(int twice_f);

// Quasi-alignment moment 3<F_x^2> - F(F+1) = -F(2F-1)/2.
double quasi_alignment_moment(int twice_f);

// Alignment-per-orientation ratio -(2F-1)/(2(F+1)) with alignment normalized
// to F(F+1) and orientation to F. Equals -0.7 for F = 4.
double normalized_projection_ratio(int twice_f);

}  // namespace hanle

#endif
