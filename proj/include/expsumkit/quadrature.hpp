#pragma once

#include "expsumkit/linalg.hpp"
#include "expsumkit/numcore.hpp"

#include <memory>

namespace esk {

struct PowerKernel;
class Transform;

struct DiscreteMeasure {
    Vec nodes;   // strictly increasing
    Vec weights; // positive
};

struct RecurrenceCoeffs {
    Vec alpha;
    Vec beta; // beta[0] = total mass
};

struct QuadratureRule {
    Vec nodes; // ascending
    Vec weights;
};

// Nodes by Newton on the Legendre recurrence from asymptotic starting values, refined with
// precision doubling. Cached per (M, bits); the returned rule is shared and immutable.
std::shared_ptr<const QuadratureRule> gauss_legendre_cached(int M, const PrecisionContext& ctx);
QuadratureRule gauss_legendre(int M, const PrecisionContext& ctx);
QuadratureRule gauss_chebyshev(int M, const PrecisionContext& ctx);

RecurrenceCoeffs legendre_coeffs(int M, const PrecisionContext& ctx);
RecurrenceCoeffs stieltjes_coeffs(const DiscreteMeasure& mu, int M, const PrecisionContext& ctx);
// Implicit-shift QL on the Jacobi matrix, tracking first eigenvector components only.
QuadratureRule golub_welsch(const RecurrenceCoeffs& rc, int M, const PrecisionContext& ctx);

// Gauss-Legendre discretization of dW(b psi(u)) on [-1,1]; psi built at r = a/b.
DiscreteMeasure transformed_measure(const PowerKernel& k, const Transform& psi, int mds, const PrecisionContext& ctx);

// max over both vectors of |coarse - fine| / |fine|; infinite on a zero denominator
Real mre(const QuadratureRule& coarse, const QuadratureRule& fine);

int default_mds(const Real& r);

// sum_j c_j T_j(u) needs T_j; T_0..T_n at u
Vec chebyshev_t(int n, const Real& u);

} // namespace esk
