#include "expsumkit/real.hpp"

#include <cstdlib>
#include <memory>

namespace esk {

namespace {
thread_local int tl_bits = 128;
}

int working_bits() { return tl_bits; }

PrecisionScope::PrecisionScope(int bits) : saved_(tl_bits)
{
    if (bits < MPFR_PREC_MIN || bits > 1 << 20) throw ArgumentError("precision out of range: " + std::to_string(bits));
    tl_bits = bits;
    // exponent range is thread-local in MPFR; e^-x for x ~ 2^30 needs the full range
    mpfr_set_emin(mpfr_get_emin_min());
    mpfr_set_emax(mpfr_get_emax_max());
}

PrecisionScope::~PrecisionScope() { tl_bits = saved_; }

Real::Real(const char* s)
{
    mpfr_init2(v_, working_bits());
    if (mpfr_set_str(v_, s, 10, MPFR_RNDN) != 0) {
        mpfr_clear(v_);
        throw ArgumentError(std::string("not a number: ") + s);
    }
}

Real Real::with_bits(int bits)
{
    PrecisionScope ps(bits);
    return Real();
}

std::string Real::str(int digits) const
{
    if (digits < 1) digits = 1;
    if (mpfr_nan_p(v_)) return "nan";
    if (mpfr_inf_p(v_)) return mpfr_sgn(v_) < 0 ? "-inf" : "inf";
    std::string fmt = "%." + std::to_string(digits - 1) + "Re";
    char* buf = nullptr;
    mpfr_asprintf(&buf, fmt.c_str(), v_);
    std::string out(buf);
    mpfr_free_str(buf);
    return out;
}

std::string Real::exact_str() const
{
    // mpfr_get_str with n = 0 yields enough digits to round-trip at this precision
    mpfr_exp_t e;
    char* s = mpfr_get_str(nullptr, &e, 10, 0, v_, MPFR_RNDN);
    std::string m(s);
    mpfr_free_str(s);
    if (!mpfr_number_p(v_)) return m;
    if (mpfr_zero_p(v_)) return mpfr_signbit(v_) ? "-0" : "0";
    bool neg = m[0] == '-';
    if (neg) m.erase(0, 1);
    std::string out = neg ? "-" : "";
    out += m.substr(0, 1);
    if (m.size() > 1) out += "." + m.substr(1);
    out += "e" + std::to_string(static_cast<long>(e) - 1);
    return out;
}

#define ESK_UNARY(NAME, FN)                      \
    Real NAME(const Real& x)                     \
    {                                            \
        Real r;                                  \
        FN(r.get(), x.get(), MPFR_RNDN);         \
        return r;                                \
    }

ESK_UNARY(exp, mpfr_exp)
ESK_UNARY(expm1, mpfr_expm1)
ESK_UNARY(log, mpfr_log)
ESK_UNARY(log1p, mpfr_log1p)
ESK_UNARY(log2, mpfr_log2)
ESK_UNARY(sqrt, mpfr_sqrt)
ESK_UNARY(cos, mpfr_cos)
ESK_UNARY(sin, mpfr_sin)
ESK_UNARY(acos, mpfr_acos)
ESK_UNARY(atan, mpfr_atan)
ESK_UNARY(cosh, mpfr_cosh)
ESK_UNARY(gamma, mpfr_gamma)
ESK_UNARY(sqr, mpfr_sqr)

#undef ESK_UNARY

Real floor(const Real& x)
{
    Real r;
    mpfr_floor(r.get(), x.get());
    return r;
}

Real pow(const Real& x, const Real& y)
{
    Real r;
    mpfr_pow(r.get(), x.get(), y.get(), MPFR_RNDN);
    return r;
}

Real pow(const Real& x, long n)
{
    Real r;
    mpfr_pow_si(r.get(), x.get(), n, MPFR_RNDN);
    return r;
}

Real abs(Real x)
{
    mpfr_abs(x.get(), x.get(), MPFR_RNDN);
    return x;
}

Real ldexp(const Real& x, long e)
{
    Real r;
    mpfr_mul_2si(r.get(), x.get(), e, MPFR_RNDN);
    return r;
}

Real const_pi()
{
    Real r;
    mpfr_const_pi(r.get(), MPFR_RNDN);
    return r;
}

Real const_log2()
{
    Real r;
    mpfr_const_log2(r.get(), MPFR_RNDN);
    return r;
}

Real min(const Real& a, const Real& b) { return a < b ? a : b; }
Real max(const Real& a, const Real& b) { return a < b ? b : a; }

Real from_double(double x) { return Real(x); }

long exponent(const Real& x)
{
    if (mpfr_zero_p(x.get())) return -(1L << 30);
    return static_cast<long>(mpfr_get_exp(x.get()));
}

} // namespace esk
