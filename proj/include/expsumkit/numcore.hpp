#pragma once

#include "expsumkit/real.hpp"

#include <functional>
#include <optional>
#include <utility>

namespace esk {

struct PrecisionContext {
    int bits;
    Real eps;         // 2^-bits
    Real default_tol; // 2^(-bits+16)

    explicit PrecisionContext(int bits);
};

struct EllipticBundle {
    Real r, k, q;
    Real Kk; // K(k)
    Real Kr; // K(r)
    Real Ek; // E(k)
    int bits = 0;
};

// Arithmetic-geometric mean of (a0, g0) stopped at |a_n - g_n| <= g_n 2^(-bits+1).
Real agm(const Real& a0, const Real& g0, int bits);

EllipticBundle agm_bundle(const Real& r, const PrecisionContext& ctx);
Real elliptic_e(const EllipticBundle& b, const PrecisionContext& ctx);
// same sum, but driven by an explicit complementary modulus; elliptic_e(b) == elliptic_e_of(b.r)
Real elliptic_e_of(const Real& kprime, const PrecisionContext& ctx);
// K(k) from the complementary modulus k' = sqrt(1-k^2)
Real elliptic_k_of(const Real& kprime, const PrecisionContext& ctx);

struct NewtonOptions {
    Real tol;
    Real scale = 1;
    int max_iter = 200;
    std::optional<std::pair<Real, Real>> bracket;
};

// Safeguarded Newton: bisection fallback whenever a step leaves the supplied bracket.
Real newton_root(const std::function<Real(const Real&)>& f, const std::function<Real(const Real&)>& df, Real x0,
                 const NewtonOptions& opt);

// Golden-section search for a maximum of a unimodal g on [lo, hi], stopped when the
// bracket is narrower than rel_width times its midpoint. Returns (x, g(x)).
std::pair<Real, Real> golden_max(const std::function<Real(const Real&)>& g, Real lo, Real hi, const Real& rel_width);

// W0(e^-1), the root of w e^w = e^-1
Real lambert_w0_inv_e(const PrecisionContext& ctx);

} // namespace esk
