#include "expsumkit/basis.hpp"

#include "expsumkit/parallel.hpp"
#include "expsumkit/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace esk {

namespace {
constexpr int kGuard = 16;
}

int basis_points(int n, const Real& rho_hat, const Real& tol)
{
    if (n < 0) throw ArgumentError("basis_points: n must be nonnegative");
    if (!(rho_hat > 1)) throw DomainError("basis_points: rho_hat must exceed 1");
    if (!(tol > 0)) throw ArgumentError("basis_points: tol must be positive");
    PrecisionScope ps(std::max(rho_hat.bits(), 64));
    const Real L = log(rho_hat);
    // log of (16/pi) cosh(nL) rho^n / tol, kept in log form so large n cannot overflow
    Real nl = n * L;
    Real lhs = log(Real(16) / const_pi()) + nl + log1p(exp(-2 * nl)) - const_log2() + nl - log(tol);
    long M = std::max<long>(0, floor(lhs / (2 * L)).to_long() + 1);
    while (M > 0 && lhs - 2 * (M - 1) * L < 0) --M;
    while (lhs - 2 * M * L >= 0) ++M;
    return static_cast<int>(std::max<long>(M, (n + 2) / 2));
}

BasisEvaluator::BasisEvaluator(const Transform& psi, int n_max, const Real& tol, const PrecisionContext& ctx)
    : psi_(psi), n_max_(n_max), bits_(ctx.bits)
{
    if (n_max < 0) throw ArgumentError("BasisEvaluator: n_max must be nonnegative");
    const int wb = ctx.bits + kGuard;
    PrecisionScope ps(wb);
    M_ = basis_points(n_max, psi.rho_hat(), tol);
    const Real pi = const_pi();
    psi_nodes_.resize(M_);
    cos_nt_.assign(n_max + 1, Vec(M_));
    parallel_for(M_, [&](int v) {
        PrecisionScope inner(wb);
        Real theta = (2 * v + 1) * pi / (2 * M_);
        psi_nodes_[v] = psi_.eval(cos(theta));
        for (int n = 0; n <= n_max_; ++n) cos_nt_[n][v] = cos(n * theta) / M_;
    });
}

Real BasisEvaluator::deriv(int n, int m, const Real& x) const
{
    if (n < 0 || n > n_max_) throw ArgumentError("BasisEvaluator: order outside [0, n_max]");
    if (m < 0) throw ArgumentError("BasisEvaluator: derivative order must be nonnegative");
    if (x < 0) throw DomainError("BasisEvaluator: x must be nonnegative");
    if (m == 0 && x.is_zero()) return Real(n == 0 ? 1 : 0);
    const int outer = working_bits();
    Real s;
    {
        PrecisionScope ps(std::max(bits_ + kGuard, outer + kGuard));
        for (int v = 0; v < M_; ++v) {
            Real term = exp(-x * psi_nodes_[v]) * cos_nt_[n][v];
            if (m) term *= pow(-psi_nodes_[v], m);
            s += term;
        }
    }
    return s + 0;
}

Vec BasisEvaluator::eval_all(const Real& x, int m) const
{
    if (x < 0) throw DomainError("BasisEvaluator: x must be nonnegative");
    Vec out(n_max_ + 1);
    if (m == 0 && x.is_zero()) {
        out[0] = 1;
        return out;
    }
    const int outer = working_bits();
    {
        PrecisionScope ps(std::max(bits_ + kGuard, outer + kGuard));
        Vec acc(n_max_ + 1, Real(0));
        for (int v = 0; v < M_; ++v) {
            Real e = exp(-x * psi_nodes_[v]);
            if (m) e *= pow(-psi_nodes_[v], m);
            for (int n = 0; n <= n_max_; ++n) acc[n] += e * cos_nt_[n][v];
        }
        for (int n = 0; n <= n_max_; ++n) out[n] = std::move(acc[n]);
    }
    for (auto& v : out) v = v + 0;
    return out;
}

Real operator_residual(const EllipticBundle& b, const BasisEvaluator& ev, int n, const Real& x)
{
    if (ev.transform().kind() != TransformKind::Phi) throw ArgumentError("operator_residual: needs the Phi basis");
    if (!(x > 0)) throw DomainError("operator_residual: x must be positive");
    Real d[5];
    for (int m = 0; m <= 4; ++m) d[m] = ev.deriv(n, m, x);
    const Real r2 = sqr(b.r);
    const Real x2 = sqr(x);
    Real lhs = x2 * d[4] + 2 * x * d[3] - (1 + r2) * x2 * d[2] - (1 + r2) * x * d[1] + r2 * x2 * d[0];
    Real lambda = sqr(n * const_pi() / b.Kk);
    return lhs - lambda * d[0];
}

Matrix orthogonality_matrix(const Transform& phi, int n_max, const PrecisionContext& ctx)
{
    if (n_max < 1) throw ArgumentError("orthogonality: need n >= 1");
    if (phi.kind() != TransformKind::Phi) throw ArgumentError("orthogonality: needs the Phi basis");
    const int wb = ctx.bits + kGuard;
    PrecisionScope ps(wb);
    const Real tol = ldexp(Real(1), -ctx.bits + 16);
    BasisEvaluator ev(phi, n_max, tol, ctx);
    const Real& r = phi.r();
    const Real q = phi.phi()->bundle.q;

    // dyadic panels [2^-40, 4], then width-4 panels until the tail bound for the
    // weakest pair (m = n = 1) drops below tol
    std::vector<Real> edges;
    for (int j = -40; j <= 2; ++j) edges.push_back(ldexp(Real(1), j));
    const Real env = sqr(q) / (2 * r);
    while (exp(-2 * r * edges.back()) * env >= tol) edges.push_back(edges.back() + 4);

    constexpr int kOrder = 32;
    auto gl = gauss_legendre_cached(kOrder, ctx);
    const int panels = static_cast<int>(edges.size()) - 1;
    const int npts = panels * kOrder;
    auto partials = panel_products(npts, n_max, [&](int idx) {
        int p = idx / kOrder, i = idx % kOrder;
        Real half = ldexp(edges[p + 1] - edges[p], -1);
        Real x = ldexp(edges[p + 1] + edges[p], -1) + half * gl->nodes[i];
        Vec chi = ev.eval_all(x);
        Real w = gl->weights[i] * half / x;
        return std::make_pair(std::move(chi), std::move(w));
    });

    Matrix G(n_max, n_max);
    for (int m = 1; m <= n_max; ++m)
        for (int n = 1; n <= n_max; ++n) G(m - 1, n - 1) = partials[(m - 1) * n_max + (n - 1)] + 0;
    return G;
}

Real orthogonality_integral(const Transform& phi, int m, int n, const PrecisionContext& ctx)
{
    if (m < 1 || n < 1) throw ArgumentError("orthogonality: need m, n >= 1");
    Matrix G = orthogonality_matrix(phi, std::max(m, n), ctx);
    return G(m - 1, n - 1);
}

std::vector<Real> basis_zeros(const BasisEvaluator& ev, int n, const PrecisionContext& ctx)
{
    if (ev.transform().kind() != TransformKind::Phi) throw ArgumentError("basis_zeros: needs the Phi basis");
    if (n < 1 || n > ev.n_max()) throw ArgumentError("basis_zeros: n outside [1, n_max]");
    PrecisionScope ps(ctx.bits + kGuard);
    const Real& r = ev.transform().r();
    const double lo = std::ldexp(1.0, -20);
    const double hi = (ctx.bits / 2.0) * std::log(2.0) / static_cast<double>(r);
    const int count = static_cast<int>(std::ceil(64 * std::log10(hi / lo)));
    std::vector<Real> xs(count + 1), ys(count + 1);
    parallel_for(count + 1, [&](int i) {
        PrecisionScope inner(ctx.bits + kGuard);
        xs[i] = from_double(lo * std::pow(hi / lo, static_cast<double>(i) / count));
        ys[i] = ev.eval(n, xs[i]);
    });
    std::vector<Real> zeros;
    for (int i = 0; i < count; ++i) {
        if (ys[i].sign() == 0) {
            zeros.push_back(xs[i]);
            continue;
        }
        if (ys[i].sign() * ys[i + 1].sign() >= 0) continue;
        Real a = xs[i], b = xs[i + 1];
        const int sa = ys[i].sign();
        const Real width = ldexp(xs[i], -ctx.bits / 2);
        while (b - a > width) {
            Real mid = ldexp(a + b, -1);
            int sm = ev.eval(n, mid).sign();
            if (sm == 0) {
                a = mid;
                b = mid;
                break;
            }
            (sm == sa ? a : b) = mid;
        }
        zeros.push_back(ldexp(a + b, -1));
    }
    if (static_cast<int>(zeros.size()) != n - 1)
        throw NumericalError("basis_zeros: found " + std::to_string(zeros.size()) + " sign changes of chi_" +
                             std::to_string(n) + ", expected " + std::to_string(n - 1));
    return zeros;
}

Real w0_eval(const Transform& psi, const Real& tau, const PrecisionContext& ctx)
{
    PrecisionScope ps(ctx.bits + kGuard);
    const Real& r = psi.r();
    if (tau < r || tau > 1) throw DomainError("w0_eval: tau outside [r,1]");
    if (tau == r) return Real(0);
    if (tau == 1) return Real(1);
    Real lo = -1, hi = 1;
    for (int it = 0; it < ctx.bits + kGuard; ++it) {
        Real mid = ldexp(lo + hi, -1);
        (psi.eval(mid) < tau ? lo : hi) = mid;
    }
    Real u = ldexp(lo + hi, -1);
    return acos(-u) / const_pi();
}

Real v_transform(const Transform& psi, const PrecisionContext& ctx)
{
    PrecisionScope ps(ctx.bits + kGuard);
    BasisEvaluator ev(psi, 0, ldexp(Real(1), -ctx.bits - 8), ctx);
    Real d1 = ev.deriv(0, 1, Real(0));
    Real d2 = ev.deriv(0, 2, Real(0));
    return d2 - sqr(d1);
}

} // namespace esk
