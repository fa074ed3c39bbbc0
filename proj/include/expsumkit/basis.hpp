#pragma once

#include "expsumkit/linalg.hpp"
#include "expsumkit/transforms.hpp"

#include <vector>

namespace esk {

// Smallest Gauss-Chebyshev size M with M >= (n+1)/2 and
// (16/pi) ((rho^n + rho^-n)/2) rho^(-2M) < tol rho^(-n).
int basis_points(int n, const Real& rho_hat, const Real& tol);

inline Real default_basis_tol() { return Real(1e-10); }

// chi_0..chi_{n_max} of one transform, sharing the exponentials between orders.
class BasisEvaluator {
public:
    BasisEvaluator(const Transform& psi, int n_max, const Real& tol, const PrecisionContext& ctx);

    const Transform& transform() const { return psi_; }
    int n_max() const { return n_max_; }
    int points() const { return M_; }

    Real eval(int n, const Real& x) const { return deriv(n, 0, x); }
    Real deriv(int n, int m, const Real& x) const;
    // chi_n^(m)(x) for n = 0..n_max
    Vec eval_all(const Real& x, int m = 0) const;

private:
    Transform psi_;
    int n_max_;
    int M_;
    int bits_;
    Vec psi_nodes_;           // psi(cos theta_nu)
    std::vector<Vec> cos_nt_; // cos(n theta_nu) / M
};

// D_r chi_n - (n pi / K(k))^2 chi_n
Real operator_residual(const EllipticBundle& b, const BasisEvaluator& ev, int n, const Real& x);

// int_0^inf chi_m chi_n dx / x for 1 <= m, n <= n_max, on composite Gauss-Legendre panels
Matrix orthogonality_matrix(const Transform& phi, int n_max, const PrecisionContext& ctx);
Real orthogonality_integral(const Transform& phi, int m, int n, const PrecisionContext& ctx);

std::vector<Real> basis_zeros(const BasisEvaluator& ev, int n, const PrecisionContext& ctx);

// arccos(-psi^-1(tau)) / pi
Real w0_eval(const Transform& psi, const Real& tau, const PrecisionContext& ctx);

Real v_transform(const Transform& psi, const PrecisionContext& ctx);

} // namespace esk
