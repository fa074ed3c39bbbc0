#include "expsumkit/numcore.hpp"

#include <string>

namespace esk {

namespace {
constexpr int kGuard = 32;

struct AgmTrace {
    Real limit;
    Real log_prod;  // sum_{n>=1} 3 2^-n log(g_n/a_n)
    Real companion; // sum_{n>=1} 2^(n-1) c_n^2
};

AgmTrace agm_trace(const Real& a0, const Real& g0, int bits)
{
    Real a = a0, g = g0;
    AgmTrace t{Real(0), Real(0), Real(0)};
    for (int n = 1; n < 10000; ++n) {
        if (abs(a - g) <= ldexp(g, -bits + 1)) {
            t.limit = a;
            return t;
        }
        Real c = ldexp(a - g, -1);
        Real an = ldexp(a + g, -1);
        Real gn = sqrt(a * g);
        a = std::move(an);
        g = std::move(gn);
        t.log_prod += ldexp(3 * log(g / a), -n);
        t.companion += ldexp(sqr(c), n - 1);
    }
    throw NumericalError("agm: no convergence");
}
} // namespace

PrecisionContext::PrecisionContext(int b) : bits(b)
{
    if (b < 64) throw ArgumentError("precision must be at least 64 bits, got " + std::to_string(b));
    PrecisionScope ps(b + 8);
    eps = ldexp(Real(1), -b);
    default_tol = ldexp(Real(1), -b + 16);
}

Real agm(const Real& a0, const Real& g0, int bits) { return agm_trace(a0, g0, bits).limit; }

EllipticBundle agm_bundle(const Real& r, const PrecisionContext& ctx)
{
    if (!(r > 0) || !(r < 1)) throw DomainError("agm_bundle: r must lie in (0,1)");
    const int wb = ctx.bits + kGuard;
    PrecisionScope ps(wb);
    EllipticBundle b;
    b.bits = ctx.bits;
    b.r = r;
    Real one = 1;
    b.k = sqrt(1 - sqr(b.r));
    const Real pi = const_pi();

    AgmTrace tr = agm_trace(one, b.r, wb);
    b.Kk = pi / (2 * tr.limit);
    b.Kr = pi / (2 * agm(one, b.k, wb));
    b.q = exp(log((1 - sqr(b.r)) / (16 * b.r)) + tr.log_prod);
    b.Ek = b.Kk * (1 - ldexp(sqr(b.k), -1) - tr.companion);

    Real q_exp = exp(-pi * b.Kr / b.Kk);
    if (abs(q_exp - b.q) > ldexp(b.q, -ctx.bits + 8))
        throw NumericalError("agm_bundle: nome product and exponential forms disagree");
    return b;
}

Real elliptic_e(const EllipticBundle& b, const PrecisionContext& ctx)
{
    PrecisionScope ps(ctx.bits + kGuard);
    return b.Ek;
}

Real elliptic_e_of(const Real& kprime, const PrecisionContext& ctx)
{
    const int wb = ctx.bits + kGuard;
    PrecisionScope ps(wb);
    if (kprime.is_zero()) return Real(1);
    Real k2 = 1 - sqr(kprime);
    AgmTrace tr = agm_trace(Real(1), kprime, wb);
    Real K = const_pi() / (2 * tr.limit);
    return K * (1 - ldexp(k2, -1) - tr.companion);
}

Real elliptic_k_of(const Real& kprime, const PrecisionContext& ctx)
{
    const int wb = ctx.bits + kGuard;
    PrecisionScope ps(wb);
    if (!(kprime > 0)) throw DomainError("elliptic_k_of: K diverges at k = 1");
    return const_pi() / (2 * agm(Real(1), kprime, wb));
}

Real newton_root(const std::function<Real(const Real&)>& f, const std::function<Real(const Real&)>& df, Real x0,
                 const NewtonOptions& opt)
{
    const Real thresh = opt.tol * opt.scale;
    std::optional<Real> lo, hi;
    int slo = 0;
    if (opt.bracket) {
        lo = opt.bracket->first;
        hi = opt.bracket->second;
        Real flo = f(*lo);
        if (abs(flo) <= thresh) return *lo;
        Real fhi = f(*hi);
        if (abs(fhi) <= thresh) return *hi;
        slo = flo.sign();
        if (slo == fhi.sign()) throw ArgumentError("newton_root: bracket does not enclose a sign change");
        if (!(x0 > *lo && x0 < *hi)) x0 = ldexp(*lo + *hi, -1);
    }
    Real x = std::move(x0);
    const Real step_floor = ldexp(Real(1), -working_bits() + 4);
    for (int it = 0; it < opt.max_iter; ++it) {
        Real fx = f(x);
        if (abs(fx) <= thresh) return x;
        if (lo) {
            if (fx.sign() == slo)
                lo = x;
            else
                hi = x;
        }
        Real d = df(x);
        Real xn;
        bool ok = !d.is_zero() && d.is_finite();
        if (ok) {
            xn = x - fx / d;
            if (lo && !(xn > *lo && xn < *hi)) ok = false;
        }
        if (!ok) {
            if (!lo) throw NumericalError("newton_root: zero derivative without bracket");
            xn = ldexp(*lo + *hi, -1);
        }
        if (abs(xn - x) <= step_floor * max(abs(x), Real(1)) && ok) return xn;
        if (lo && abs(*hi - *lo) <= step_floor * max(abs(x), Real(1))) return xn;
        x = std::move(xn);
    }
    throw NumericalError("newton_root: no convergence after " + std::to_string(opt.max_iter) +
                         " iterations, last x = " + x.str(20));
}

std::pair<Real, Real> golden_max(const std::function<Real(const Real&)>& g, Real lo, Real hi, const Real& rel_width)
{
    const Real invphi = (sqrt(Real(5)) - 1) / 2;
    Real x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
    Real g1 = g(x1), g2 = g(x2);
    for (int it = 0; it < 100000; ++it) {
        if (hi - lo <= rel_width * abs(ldexp(lo + hi, -1))) break;
        if (g1 >= g2) {
            hi = std::move(x2);
            x2 = x1;
            g2 = g1;
            x1 = hi - invphi * (hi - lo);
            g1 = g(x1);
        } else {
            lo = std::move(x1);
            x1 = x2;
            g1 = g2;
            x2 = lo + invphi * (hi - lo);
            g2 = g(x2);
        }
    }
    if (g1 >= g2) return {x1, g1};
    return {x2, g2};
}

Real lambert_w0_inv_e(const PrecisionContext& ctx)
{
    PrecisionScope ps(ctx.bits + kGuard);
    const Real c = exp(Real(-1));
    NewtonOptions opt{ldexp(Real(1), -ctx.bits - 8), Real(1), 200, std::nullopt};
    opt.bracket = std::make_pair(Real(0), Real(1));
    return newton_root([&](const Real& w) { return w * exp(w) - c; },
                       [&](const Real& w) { return (1 + w) * exp(w); }, Real(0.3), opt);
}

} // namespace esk
