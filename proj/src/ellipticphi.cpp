#include "expsumkit/ellipticphi.hpp"

#include <algorithm>
#include <cmath>

namespace esk {

namespace {
constexpr int kGuard = 16;

void check_u(const Real& u)
{
    if (!(u >= -1) || !(u <= 1)) throw DomainError("Phi: u must lie in [-1,1]");
}

// sum_{n=0}^{N} c_n V_n(x), V_n Chebyshev polynomials of the third kind
Real clenshaw_v(const Vec& c, const Real& x)
{
    Real b1 = 0, b2 = 0;
    const Real x2 = 2 * x;
    for (std::size_t k = c.size() - 1; k >= 1; --k) {
        Real b0 = c[k] + x2 * b1 - b2;
        b2 = std::move(b1);
        b1 = std::move(b0);
    }
    return c[0] + b1 * (x2 - 1) - b2;
}
} // namespace

std::pair<int, int> truncation_lengths(const EllipticBundle& b, int target_bits)
{
    PrecisionScope ps(64);
    const Real pi = const_pi();
    const Real lq = log(b.q);           // < 0
    const Real llq = log(-lq);          // log log(1/q)
    const Real target = -target_bits * const_log2();
    const Real base0 = -ldexp(log(2 * b.r * b.Kk / pi), -1) - llq;
    int n0 = 1;
    while (n0 * Real(n0) * lq - log(Real(n0)) + base0 > target) ++n0;
    const Real base1 = const_log2() - log(b.k) - ldexp(log(b.r), -2) - Real(1.5) * log(2 * b.Kk / pi) - llq;
    int n1 = 1;
    auto bound1 = [&](int n) {
        Real h = Real(n) + 0.5;
        return log(Real(2 * n + 3) / Real(2 * n + 1)) + 2 * sqr(h) * lq + base1;
    };
    while (bound1(n1) > target) ++n1;
    return {n0, n1};
}

std::pair<int, int> truncation_lengths(const EllipticBundle& b, const PrecisionContext& ctx)
{
    return truncation_lengths(b, ctx.bits);
}

PhiSeries make_phi_series(const EllipticBundle& b, const PrecisionContext& ctx)
{
    PhiSeries s;
    s.bundle = b;
    s.bits = ctx.bits;
    std::tie(s.N0, s.N1) = truncation_lengths(b, ctx.bits + kGuard);
    s.eval_bits = ctx.bits + 2 * kGuard + static_cast<int>(std::ceil(-static_cast<double>(log2(b.r))));
    PrecisionScope ps(s.eval_bits);
    for (int n = 1; n <= s.N0; ++n) s.coeffs_T.push_back(pow(b.q, static_cast<long>(n) * n));
    for (int n = 0; n <= s.N1; ++n) s.coeffs_V.push_back(pow(b.q, 2L * n * n + 2L * n));
    s.sqrt_r = sqrt(b.r);
    const Real kk = 2 * b.Kk / const_pi();
    s.dscale = b.k * pow(b.r, Real(0.75)) * sqrt(b.q) * kk * sqrt(kk);
    return s;
}

PhiSeries make_phi_series(const Real& r, const PrecisionContext& ctx)
{
    return make_phi_series(agm_bundle(r, ctx), ctx);
}

Real theta_sum(const PhiSeries& s, const Real& u)
{
    // coefficients c_0 = 1, c_n = 2 q^(n^2)
    Real b1 = 0, b2 = 0;
    const Real u2 = 2 * u;
    for (std::size_t k = s.coeffs_T.size(); k >= 1; --k) {
        Real b0 = 2 * s.coeffs_T[k - 1] + u2 * b1 - b2;
        b2 = std::move(b1);
        b1 = std::move(b0);
    }
    return 1 + u * b1 - b2;
}

Real phi_eval(const PhiSeries& s, const Real& u)
{
    check_u(u);
    Real v;
    {
        PrecisionScope ps(std::max(s.eval_bits, working_bits() + kGuard));
        v = s.sqrt_r * theta_sum(s, u) / theta_sum(s, -u);
    }
    return v + 0;
}

Real phi_deriv(const PhiSeries& s, const Real& u)
{
    check_u(u);
    Real v;
    {
        PrecisionScope ps(std::max(s.eval_bits, working_bits() + kGuard));
        Real den = theta_sum(s, -u);
        v = s.dscale * clenshaw_v(s.coeffs_V, 1 - 2 * sqr(u)) / sqr(den);
    }
    return v + 0;
}

} // namespace esk
