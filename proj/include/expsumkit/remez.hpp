#pragma once

#include "expsumkit/expsum.hpp"

#include <vector>

namespace esk {

// Root of (1-r) e^-h + e^-(1-r)h - r on (0, inf).
Real solve_hr(const Real& r, const PrecisionContext& ctx);

struct HrRow {
    Real r;
    Real h;         // h_r
    Real rho;       // r e^((1-r) h_r), at most 2 - r
    Real prefactor; // (sqrt(rho) + 1)^2
    Real ratio;     // ((sqrt(rho) + 1) / (sqrt(rho) - 1))^2
};
HrRow hr_row(const Real& r, const PrecisionContext& ctx);

// Bits needed to resolve the worst-case E_{M,h} bound plus 30 decimal digits of headroom.
int precision_policy(const PowerKernel& k, int M);

// Upper bound of (f(0) - sum c_{h,v}) / f(0); largest at h = h_{a/b} / b.
Real eh_bound(const Real& a, const Real& b, int M, const Real& h);

inline int default_remez_mds(const Real& r) { return r >= 0.0625 ? 96 : 192; }

// Gaussian rule of (1 + y) dW_h(y), y = e^(-ht), discretized through psi and mapped back to
// exponents t_{h,v} = -log(y)/h and coefficients d/(1+y).
ExpSum init_exchange(const PowerKernel& k, int M, const Real& h, int mds, const PrecisionContext& ctx,
                     TransformKind kind = TransformKind::P2);

struct HankelDiag {
    int M = 0;
    Real h;
    Matrix H; // (M+1) x (M+1), f((i+j)h)
    Matrix G; // M x M, f((i+j)h) + 2 f((i+j+1)h) + f((i+j+2)h)
};
HankelDiag hankel_diag(const KernelEvaluator& f, int M, const Real& h);

enum class EmhRoute { Gauss, Det, Inverse };
std::string to_string(EmhRoute r);

// E_{M,h} = f(0) - sum c_{h,v}; mds = 0 picks default_remez_mds
Real emh(const PowerKernel& k, int M, const Real& h, EmhRoute route, const PrecisionContext& ctx, int mds = 0);

struct RemezConfig {
    double eps_stop = 1e-10;
    int newton_polish_iters = 5;
    int mds = 0;  // 0: default_remez_mds
    int bits = 0; // 0: precision_policy
    int max_iter = 100;
};

struct RemezResult {
    ExpSum expsum;
    Vec alternation_x; // x_0 = 0 < ... < x_{2M}
    Vec alternation_e; // E_M(x_i)
    Real level;        // |E_M(0)|
    int iterations = 0;
    int bits = 0;
    int mds = 0;
    std::vector<double> spread_history; // max|E(x_i)| / min|E(x_i)| - 1 after each exchange
    double spread() const;
};

RemezResult remez(const PowerKernel& k, int M, const RemezConfig& cfg = {});

} // namespace esk
