#pragma once

#include "expsumkit/numcore.hpp"

#include <vector>

namespace esk {

// f(x) = int_a^b e^(-xt) t^(eta-1)/Gamma(eta) dt
struct PowerKernel {
    Real eta, a, b;

    PowerKernel(Real eta, Real a, Real b);
    Real ratio() const { return a / b; }
};

Real gamma_eta(const Real& eta);
Real density(const PowerKernel& k, const Real& t, const PrecisionContext& ctx);
// W'(t) without the range check, for nodes that may round a hair outside [a,b]
Real density_unchecked(const PowerKernel& k, const Real& t);

// Reference path: closed form at x = 0, otherwise Gauss-Legendre with order doubling on
// dyadic panels of [a,b] (truncated where e^(-x(t-a)) is below working precision).
Real f_derivative(const PowerKernel& k, int n, const Real& x, const PrecisionContext& ctx);
Real f_at_zero(const PowerKernel& k, int n, const PrecisionContext& ctx);

// Fast evaluator for hot loops. Power series around 0 for small bx, incomplete gamma
// differences beyond (closed form for integer and half-integer eta). Other eta fall back
// to f_derivative.
class KernelEvaluator {
public:
    KernelEvaluator(const PowerKernel& k, int max_deriv, const PrecisionContext& ctx);

    const PowerKernel& kernel() const { return k_; }
    int bits() const { return bits_; }
    int max_deriv() const { return max_deriv_; }
    Real operator()(const Real& x) const { return eval(0, x); }
    Real eval(int n, const Real& x) const;
    // f, f', ..., f^(max_deriv) at x
    std::vector<Real> eval_all(const Real& x) const;
    const Real& f0() const { return f0_; }

private:
    enum class Family { Integer, HalfInteger, Other };
    Real upper_gamma(int n, const Real& y) const; // Gamma(n + eta, y)
    Real series(int n, const Real& x) const;

    PowerKernel k_;
    int max_deriv_;
    int bits_;
    int work_bits_;
    Family fam_;
    long eta_int_ = 0; // eta or eta - 1/2
    Real gamma_eta_;
    Real series_limit_; // use the power series while b x <= this
    std::vector<Real> mom_; // (b^(j+eta) - a^(j+eta)) / ((j+eta) Gamma(eta) j!)
    Real f0_;
};

} // namespace esk
