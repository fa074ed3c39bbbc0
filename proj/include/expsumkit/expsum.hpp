#pragma once

#include "expsumkit/basis.hpp"
#include "expsumkit/kernel.hpp"
#include "expsumkit/parallel.hpp"
#include "expsumkit/quadrature.hpp"
#include "expsumkit/transforms.hpp"

#include <memory>

namespace esk {

// sum_v c_v e^(-t_v x), exponents ascending
struct ExpSum {
    Vec t;
    Vec c;
    std::size_t size() const { return t.size(); }
};

// Gaussian rule (u_v, c_v) of dW(b psi(u)) on [-1,1]; psi must be built at r = a/b.
QuadratureRule gauss_rule(const PowerKernel& k, const Transform& psi, int M, int mds, const PrecisionContext& ctx);
ExpSum gauss_expsum(const PowerKernel& k, const Transform& psi, int M, int mds, const PrecisionContext& ctx);

Real eval_expsum(const ExpSum& es, const Real& x);
// derivative of order n of the sum
Real eval_expsum_deriv(const ExpSum& es, int n, const Real& x);
Real eval_error(const ExpSum& es, const KernelEvaluator& f, const Real& x);
Real eval_error(const ExpSum& es, const PowerKernel& k, const Real& x, const PrecisionContext& ctx);
Real coeff_sum(const ExpSum& es);

// (16/pi) rho_hat^(-2M) f(0)
Real stenger_bound(const PowerKernel& k, const Transform& psi, int M, const PrecisionContext& ctx);

struct ScanResult {
    Real x_at_max;
    Real max_abs;
};

// Log grid on [2^-20/b, 2^20/a] at 512 points per decade; every grid peak within a factor
// 2 of the largest is refined by golden section to relative width 2^(-bits/2).
ScanResult max_error_scan(const ExpSum& es, const KernelEvaluator& f, const PrecisionContext& ctx,
                          Exec e = Exec::Parallel);
Vec error_grid(const ExpSum& es, const KernelEvaluator& f, const Vec& xs, Exec e = Exec::Parallel);
Vec log_grid(const Real& lo, const Real& hi, int per_decade);

struct ErrorExpansion {
    int M = 0;
    int N = 0;
    Vec eps;    // eps_{M,n}, n = 0..N; entries below 2M are the discretization residue
    Vec sigma;  // int T_n dW(b psi), n = 0..N
    Real b;
    Real f0;
    Real rho_hat;
    std::shared_ptr<const BasisEvaluator> basis;

    const Real& at(int n) const { return eps[n]; }
    // 2 sum_{n=2M}^{N} eps_n chi_n(b x)
    Real partial_sum(const Real& x) const;
    // 4 f(0) rho_hat^(-N-1) / (1 - 1/rho_hat)
    Real envelope() const;
};

inline int default_expansion_terms(int M) { return 2 * M + 8; }

ErrorExpansion epsilon_coeffs(const PowerKernel& k, const Transform& psi, int M, int N, int mds,
                              const PrecisionContext& ctx);

// max relative deviation over exponents and coefficients; `fine` is the reference
Real mre(const ExpSum& coarse, const ExpSum& fine);

} // namespace esk
