#include "expsumkit/expsum.hpp"

#include <algorithm>
#include <cmath>

namespace esk {

namespace {
constexpr int kGuard = 16;

void check_ratio(const PowerKernel& k, const Transform& psi, const PrecisionContext& ctx)
{
    PrecisionScope ps(ctx.bits + kGuard);
    Real r = k.a / k.b;
    if (abs(psi.r() - r) > ldexp(r, -ctx.bits + 8))
        throw ArgumentError("transform must be built at r = a/b");
}

Real round_to(const Real& x, int bits)
{
    PrecisionScope ps(bits);
    return x + 0;
}
} // namespace

QuadratureRule gauss_rule(const PowerKernel& k, const Transform& psi, int M, int mds, const PrecisionContext& ctx)
{
    if (M < 1) throw ArgumentError("gauss_expsum: M must be positive");
    check_ratio(k, psi, ctx);
    DiscreteMeasure mu = transformed_measure(k, psi, mds, ctx);
    RecurrenceCoeffs rc = stieltjes_coeffs(mu, M, ctx);
    return golub_welsch(rc, M, ctx);
}

ExpSum gauss_expsum(const PowerKernel& k, const Transform& psi, int M, int mds, const PrecisionContext& ctx)
{
    QuadratureRule rule = gauss_rule(k, psi, M, mds, ctx);
    ExpSum es;
    {
        PrecisionScope ps(ctx.bits + kGuard);
        for (int v = 0; v < M; ++v) {
            es.t.push_back(round_to(k.b * psi.eval(rule.nodes[v]), ctx.bits));
            es.c.push_back(round_to(rule.weights[v], ctx.bits));
        }
    }
    for (int v = 0; v < M; ++v) {
        if (!(es.c[v] > 0)) throw PrecisionError("gauss_expsum: nonpositive weight; increase precision");
        if (!(es.t[v] > k.a) || !(es.t[v] < k.b) || (v && !(es.t[v] > es.t[v - 1])))
            throw PrecisionError("gauss_expsum: exponents not strictly inside (a,b); increase precision or M_DS");
    }
    return es;
}

Real eval_expsum(const ExpSum& es, const Real& x) { return eval_expsum_deriv(es, 0, x); }

Real eval_expsum_deriv(const ExpSum& es, int n, const Real& x)
{
    Real s = 0;
    for (std::size_t v = 0; v < es.size(); ++v) {
        Real term = es.c[v] * exp(-es.t[v] * x);
        if (n) term *= pow(-es.t[v], n);
        s += term;
    }
    return s;
}

Real eval_error(const ExpSum& es, const KernelEvaluator& f, const Real& x) { return f(x) - eval_expsum(es, x); }

Real eval_error(const ExpSum& es, const PowerKernel& k, const Real& x, const PrecisionContext& ctx)
{
    PrecisionScope ps(ctx.bits);
    return f_derivative(k, 0, x, ctx) - eval_expsum(es, x);
}

Real coeff_sum(const ExpSum& es)
{
    Real s = 0;
    for (const auto& c : es.c) s += c;
    return s;
}

Real stenger_bound(const PowerKernel& k, const Transform& psi, int M, const PrecisionContext& ctx)
{
    if (M < 1) throw ArgumentError("stenger_bound: M must be positive");
    PrecisionScope ps(ctx.bits);
    return 16 / const_pi() * pow(psi.rho_hat(), -2L * M) * f_at_zero(k, 0, ctx);
}

Vec log_grid(const Real& lo, const Real& hi, int per_decade)
{
    if (!(lo > 0) || !(hi > lo) || per_decade < 1) throw ArgumentError("log_grid: need 0 < lo < hi");
    const Real span = log(hi / lo);
    const int count = static_cast<int>(std::ceil(per_decade * static_cast<double>(span) / std::log(10.0)));
    Vec xs(count + 1);
    for (int i = 0; i <= count; ++i) xs[i] = lo * exp(span * i / count);
    xs[count] = hi;
    return xs;
}

Vec error_grid(const ExpSum& es, const KernelEvaluator& f, const Vec& xs, Exec e)
{
    Vec out(xs.size());
    parallel_for(static_cast<int>(xs.size()), [&](int i) { out[i] = eval_error(es, f, xs[i]); }, e);
    return out;
}

ScanResult max_error_scan(const ExpSum& es, const KernelEvaluator& f, const PrecisionContext& ctx, Exec e)
{
    PrecisionScope ps(ctx.bits);
    const PowerKernel& k = f.kernel();
    Vec xs = log_grid(ldexp(1 / k.b, -20), ldexp(1 / k.a, 20), 512);
    Vec err = error_grid(es, f, xs, e);
    const int n = static_cast<int>(xs.size());
    Real gmax = 0;
    for (const auto& v : err) gmax = max(gmax, abs(v));

    const Real width = ldexp(Real(1), -ctx.bits / 2);
    ScanResult best{Real(0), Real(0)};
    for (int i = 0; i < n; ++i) {
        Real ai = abs(err[i]);
        if (ai < ldexp(gmax, -1)) continue;
        if (i > 0 && abs(err[i - 1]) > ai) continue;
        if (i + 1 < n && abs(err[i + 1]) > ai) continue;
        Real lo = xs[std::max(i - 1, 0)], hi = xs[std::min(i + 1, n - 1)];
        auto [x, v] = golden_max([&](const Real& x) { return abs(eval_error(es, f, x)); }, lo, hi, width);
        if (ai > v) {
            x = xs[i];
            v = ai;
        }
        if (v > best.max_abs) best = {x, v};
    }
    return best;
}

Real ErrorExpansion::partial_sum(const Real& x) const
{
    Vec chi = basis->eval_all(b * x);
    Real s = 0;
    for (int n = 2 * M; n <= N; ++n) s += eps[n] * chi[n];
    return 2 * s;
}

Real ErrorExpansion::envelope() const
{
    return 4 * f0 * pow(rho_hat, -static_cast<long>(N) - 1) / (1 - 1 / rho_hat);
}

ErrorExpansion epsilon_coeffs(const PowerKernel& k, const Transform& psi, int M, int N, int mds,
                              const PrecisionContext& ctx)
{
    if (N < 2 * M) throw ArgumentError("epsilon_coeffs: need N >= 2M");
    QuadratureRule rule = gauss_rule(k, psi, M, mds, ctx);
    const int wb = ctx.bits + kGuard;
    PrecisionScope ps(wb);
    ErrorExpansion ex;
    ex.M = M;
    ex.N = N;
    ex.b = k.b;
    ex.f0 = f_at_zero(k, 0, ctx);
    ex.rho_hat = psi.rho_hat();

    auto sigma_at = [&](int order) {
        auto gl = gauss_legendre_cached(order, ctx);
        std::vector<Vec> rows(order);
        parallel_for(order, [&](int i) {
            const Real& u = gl->nodes[i];
            Real w = gl->weights[i] * k.b * psi.deriv(u) * density_unchecked(k, k.b * psi.eval(u));
            rows[i] = chebyshev_t(N, u);
            for (auto& v : rows[i]) v *= w;
        });
        Vec s(N + 1, Real(0));
        for (int i = 0; i < order; ++i)
            for (int n = 0; n <= N; ++n) s[n] += rows[i][n];
        return s;
    };
    const Real tol = ex.f0 * ldexp(Real(1), -ctx.bits + 16);
    int order = std::max(64, 2 * mds);
    Vec prev = sigma_at(order);
    bool converged = false;
    for (order *= 2; order <= 16384; order *= 2) {
        Vec cur = sigma_at(order);
        Real diff = 0;
        for (int n = 0; n <= N; ++n) diff = max(diff, abs(cur[n] - prev[n]));
        prev = std::move(cur);
        if (diff <= tol) {
            converged = true;
            break;
        }
    }
    if (!converged) throw NumericalError("epsilon_coeffs: order doubling did not converge");
    ex.sigma = std::move(prev);

    ex.eps.assign(N + 1, Real(0));
    for (int v = 0; v < M; ++v) {
        Vec tv = chebyshev_t(N, rule.nodes[v]);
        for (int n = 0; n <= N; ++n) ex.eps[n] += rule.weights[v] * tv[n];
    }
    for (int n = 0; n <= N; ++n) ex.eps[n] = ex.sigma[n] - ex.eps[n];
    ex.basis = std::make_shared<const BasisEvaluator>(psi, N, ldexp(Real(1), -ctx.bits / 2), ctx);
    return ex;
}

Real mre(const ExpSum& coarse, const ExpSum& fine)
{
    return mre(QuadratureRule{coarse.t, coarse.c}, QuadratureRule{fine.t, fine.c});
}

} // namespace esk
