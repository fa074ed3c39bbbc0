#pragma once

#include <mpfr.h>

#include <compare>
#include <concepts>
#include <stdexcept>
#include <string>
#include <utility>

namespace esk {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// precision too low for the requested construction
struct PrecisionError : NumericalError {
    using NumericalError::NumericalError;
};
struct RankError : NumericalError {
    using NumericalError::NumericalError;
};

// Working precision is per thread. Every Real created without an explicit
// precision, and every arithmetic result, uses it.
int working_bits();

class PrecisionScope {
public:
    explicit PrecisionScope(int bits);
    ~PrecisionScope();
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    int saved_;
};

class Real {
public:
    Real() { mpfr_init2(v_, working_bits()); mpfr_set_zero(v_, 1); }
    template <std::integral T>
    Real(T x) { mpfr_init2(v_, working_bits()); mpfr_set_si(v_, static_cast<long>(x), MPFR_RNDN); }
    template <std::floating_point T>
    Real(T x) { mpfr_init2(v_, working_bits()); mpfr_set_d(v_, static_cast<double>(x), MPFR_RNDN); }
    explicit Real(const char* s);
    explicit Real(const std::string& s) : Real(s.c_str()) {}

    Real(const Real& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
    Real(Real&& o) noexcept
    {
        *v_ = *o.v_;
        o.v_->_mpfr_d = nullptr;
    }
    Real& operator=(const Real& o)
    {
        if (this != &o) {
            if (!v_->_mpfr_d)
                mpfr_init2(v_, mpfr_get_prec(o.v_));
            else if (mpfr_get_prec(v_) != mpfr_get_prec(o.v_))
                mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    Real& operator=(Real&& o) noexcept
    {
        std::swap(*v_, *o.v_);
        return *this;
    }
    ~Real()
    {
        if (v_->_mpfr_d) mpfr_clear(v_);
    }

    // fresh zero carrying an explicit precision
    static Real with_bits(int bits);

    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }
    int bits() const { return static_cast<int>(mpfr_get_prec(v_)); }

    Real& operator+=(const Real& o) { mpfr_add(v_, v_, o.v_, MPFR_RNDN); return *this; }
    Real& operator-=(const Real& o) { mpfr_sub(v_, v_, o.v_, MPFR_RNDN); return *this; }
    Real& operator*=(const Real& o) { mpfr_mul(v_, v_, o.v_, MPFR_RNDN); return *this; }
    Real& operator/=(const Real& o) { mpfr_div(v_, v_, o.v_, MPFR_RNDN); return *this; }
    template <std::integral T>
    Real& operator+=(T o) { mpfr_add_si(v_, v_, static_cast<long>(o), MPFR_RNDN); return *this; }
    template <std::integral T>
    Real& operator-=(T o) { mpfr_sub_si(v_, v_, static_cast<long>(o), MPFR_RNDN); return *this; }
    template <std::integral T>
    Real& operator*=(T o) { mpfr_mul_si(v_, v_, static_cast<long>(o), MPFR_RNDN); return *this; }
    template <std::integral T>
    Real& operator/=(T o) { mpfr_div_si(v_, v_, static_cast<long>(o), MPFR_RNDN); return *this; }

    Real operator-() const&
    {
        Real r;
        mpfr_neg(r.v_, v_, MPFR_RNDN);
        return r;
    }
    Real operator-() &&
    {
        mpfr_neg(v_, v_, MPFR_RNDN);
        return std::move(*this);
    }

    explicit operator double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    long to_long() const { return mpfr_get_si(v_, MPFR_RNDN); }
    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    bool is_finite() const { return mpfr_number_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }

    // scientific notation, `digits` significant digits
    std::string str(int digits) const;
    // shortest decimal string that reads back bit-for-bit at this precision
    std::string exact_str() const;

private:
    mpfr_t v_;
};

namespace detail {
inline bool reusable(const Real& x) { return x.bits() == working_bits(); }
}

#define ESK_REAL_BINOP(OP, FN, FN_SI, SI_FN, FN_D, D_FN)                                          \
    inline Real operator OP(const Real& a, const Real& b)                                         \
    {                                                                                              \
        Real r;                                                                                    \
        FN(r.get(), a.get(), b.get(), MPFR_RNDN);                                                  \
        return r;                                                                                  \
    }                                                                                              \
    inline Real operator OP(Real&& a, const Real& b)                                               \
    {                                                                                              \
        if (!detail::reusable(a)) return static_cast<const Real&>(a) OP b;                         \
        FN(a.get(), a.get(), b.get(), MPFR_RNDN);                                                  \
        return std::move(a);                                                                       \
    }                                                                                              \
    inline Real operator OP(const Real& a, Real&& b)                                               \
    {                                                                                              \
        if (!detail::reusable(b)) return a OP static_cast<const Real&>(b);                         \
        FN(b.get(), a.get(), b.get(), MPFR_RNDN);                                                  \
        return std::move(b);                                                                       \
    }                                                                                              \
    inline Real operator OP(Real&& a, Real&& b) { return std::move(a) OP static_cast<const Real&>(b); } \
    template <std::integral T>                                                                     \
    inline Real operator OP(const Real& a, T b)                                                    \
    {                                                                                              \
        Real r;                                                                                    \
        FN_SI(r.get(), a.get(), static_cast<long>(b), MPFR_RNDN);                                  \
        return r;                                                                                  \
    }                                                                                              \
    template <std::integral T>                                                                     \
    inline Real operator OP(Real&& a, T b)                                                         \
    {                                                                                              \
        if (!detail::reusable(a)) return static_cast<const Real&>(a) OP b;                         \
        FN_SI(a.get(), a.get(), static_cast<long>(b), MPFR_RNDN);                                  \
        return std::move(a);                                                                       \
    }                                                                                              \
    template <std::integral T>                                                                     \
    inline Real operator OP(T a, const Real& b)                                                    \
    {                                                                                              \
        Real r;                                                                                    \
        SI_FN(r.get(), static_cast<long>(a), b.get(), MPFR_RNDN);                                  \
        return r;                                                                                  \
    }                                                                                              \
    template <std::integral T>                                                                     \
    inline Real operator OP(T a, Real&& b)                                                         \
    {                                                                                              \
        if (!detail::reusable(b)) return a OP static_cast<const Real&>(b);                         \
        SI_FN(b.get(), static_cast<long>(a), b.get(), MPFR_RNDN);                                  \
        return std::move(b);                                                                       \
    }                                                                                              \
    template <std::floating_point T>                                                               \
    inline Real operator OP(const Real& a, T b)                                                    \
    {                                                                                              \
        Real r;                                                                                    \
        FN_D(r.get(), a.get(), static_cast<double>(b), MPFR_RNDN);                                 \
        return r;                                                                                  \
    }                                                                                              \
    template <std::floating_point T>                                                               \
    inline Real operator OP(T a, const Real& b)                                                    \
    {                                                                                              \
        Real r;                                                                                    \
        D_FN(r.get(), static_cast<double>(a), b.get(), MPFR_RNDN);                                 \
        return r;                                                                                  \
    }                                                                                              \
    template <std::floating_point T>                                                               \
    inline Real operator OP(Real&& a, T b) { return static_cast<const Real&>(a) OP b; }            \
    template <std::floating_point T>                                                               \
    inline Real operator OP(T a, Real&& b) { return a OP static_cast<const Real&>(b); }

namespace detail {
inline int add_si_rev(mpfr_ptr r, long a, mpfr_srcptr b, mpfr_rnd_t m) { return mpfr_add_si(r, b, a, m); }
inline int mul_si_rev(mpfr_ptr r, long a, mpfr_srcptr b, mpfr_rnd_t m) { return mpfr_mul_si(r, b, a, m); }
inline int add_d_rev(mpfr_ptr r, double a, mpfr_srcptr b, mpfr_rnd_t m) { return mpfr_add_d(r, b, a, m); }
inline int mul_d_rev(mpfr_ptr r, double a, mpfr_srcptr b, mpfr_rnd_t m) { return mpfr_mul_d(r, b, a, m); }
}

ESK_REAL_BINOP(+, mpfr_add, mpfr_add_si, detail::add_si_rev, mpfr_add_d, detail::add_d_rev)
ESK_REAL_BINOP(-, mpfr_sub, mpfr_sub_si, mpfr_si_sub, mpfr_sub_d, mpfr_d_sub)
ESK_REAL_BINOP(*, mpfr_mul, mpfr_mul_si, detail::mul_si_rev, mpfr_mul_d, detail::mul_d_rev)
ESK_REAL_BINOP(/, mpfr_div, mpfr_div_si, mpfr_si_div, mpfr_div_d, mpfr_d_div)

#undef ESK_REAL_BINOP

inline std::partial_ordering operator<=>(const Real& a, const Real& b)
{
    if (mpfr_unordered_p(a.get(), b.get())) return std::partial_ordering::unordered;
    int c = mpfr_cmp(a.get(), b.get());
    return c < 0 ? std::partial_ordering::less : c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent;
}
inline bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.get(), b.get()) != 0; }
template <std::integral T>
inline std::partial_ordering operator<=>(const Real& a, T b)
{
    if (mpfr_nan_p(a.get())) return std::partial_ordering::unordered;
    int c = mpfr_cmp_si(a.get(), static_cast<long>(b));
    return c < 0 ? std::partial_ordering::less : c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent;
}
template <std::integral T>
inline bool operator==(const Real& a, T b) { return !mpfr_nan_p(a.get()) && mpfr_cmp_si(a.get(), static_cast<long>(b)) == 0; }
template <std::floating_point T>
inline std::partial_ordering operator<=>(const Real& a, T b)
{
    if (mpfr_nan_p(a.get()) || b != b) return std::partial_ordering::unordered;
    int c = mpfr_cmp_d(a.get(), static_cast<double>(b));
    return c < 0 ? std::partial_ordering::less : c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent;
}
template <std::floating_point T>
inline bool operator==(const Real& a, T b) { return !mpfr_nan_p(a.get()) && mpfr_cmp_d(a.get(), static_cast<double>(b)) == 0; }

Real exp(const Real& x);
Real expm1(const Real& x);
Real log(const Real& x);
Real log1p(const Real& x);
Real log2(const Real& x);
Real sqrt(const Real& x);
Real pow(const Real& x, const Real& y);
Real pow(const Real& x, long n);
Real cos(const Real& x);
Real sin(const Real& x);
Real acos(const Real& x);
Real atan(const Real& x);
Real cosh(const Real& x);
Real abs(Real x);
Real gamma(const Real& x);
Real floor(const Real& x);
Real ldexp(const Real& x, long e);
Real sqr(const Real& x);
Real const_pi();
Real const_log2();
Real min(const Real& a, const Real& b);
Real max(const Real& a, const Real& b);
// nearest double rounded to working precision; handy for grids built in double
Real from_double(double x);
// exponent e with 2^(e-1) <= |x| < 2^e, or a large negative value for 0
long exponent(const Real& x);

inline double to_double(const Real& x) { return static_cast<double>(x); }

} // namespace esk
