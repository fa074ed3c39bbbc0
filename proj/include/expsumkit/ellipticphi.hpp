#pragma once

#include "expsumkit/linalg.hpp"
#include "expsumkit/numcore.hpp"

#include <utility>

namespace esk {

struct PhiSeries {
    EllipticBundle bundle;
    int N0 = 0, N1 = 0;
    Vec coeffs_T; // q^(n^2), n = 1..N0
    Vec coeffs_V; // q^(2n^2+2n), n = 0..N1
    Real sqrt_r;
    Real dscale; // k r^(3/4) sqrt(q) (2K(k)/pi)^(3/2)
    int bits = 0;
    int eval_bits = 0; // the alternating sums near u = -1 cancel about log2(1/r) bits
};

// Smallest N0, N1 whose truncation bounds are <= 2^-target_bits. The target may be
// below the 64-bit floor of PrecisionContext.
std::pair<int, int> truncation_lengths(const EllipticBundle& b, int target_bits);
std::pair<int, int> truncation_lengths(const EllipticBundle& b, const PrecisionContext& ctx);

PhiSeries make_phi_series(const EllipticBundle& b, const PrecisionContext& ctx);
PhiSeries make_phi_series(const Real& r, const PrecisionContext& ctx);

// 1 + 2 sum q^(n^2) T_n(u)
Real theta_sum(const PhiSeries& s, const Real& u);
Real phi_eval(const PhiSeries& s, const Real& u);
Real phi_deriv(const PhiSeries& s, const Real& u);

} // namespace esk
