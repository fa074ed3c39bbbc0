#include "expsumkit/remez.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace esk {

namespace {
constexpr int kGuard = 16;

struct SignPatternLost : NumericalError {
    using NumericalError::NumericalError;
};

Real max_norm(const Vec& v)
{
    Real m = 0;
    for (const auto& x : v) m = max(m, abs(x));
    return m;
}

class RemezState {
public:
    RemezState(const KernelEvaluator& f, int M, const PrecisionContext& ctx) : f_(f), M_(M), ctx_(ctx) {}

    Vec t, c, x;

    // E, E', E''
    std::array<Real, 3> err(const Real& xx) const
    {
        auto fv = f_.eval_all(xx);
        std::array<Real, 3> out{fv[0], fv[1], fv[2]};
        for (int v = 0; v < M_; ++v) {
            Real e = c[v] * exp(-t[v] * xx);
            out[0] -= e;
            e *= t[v];
            out[1] += e;
            e *= t[v];
            out[2] -= e;
        }
        return out;
    }
    Real err0(const Real& xx) const
    {
        Real s = f_(xx);
        for (int v = 0; v < M_; ++v) s -= c[v] * exp(-t[v] * xx);
        return s;
    }

    // E(x_i) = (-1)^i L at fixed x. For fixed t the equations are linear in (c, L),
    // so those are eliminated by least squares and Gauss-Newton runs on t alone.
    struct Projection {
        QR qr;
        Vec beta, r;
        Real rn;
    };
    Projection project(const Vec& tt, const Vec& fx) const
    {
        const int m = 2 * M_ + 1;
        Matrix A(m, M_ + 1);
        for (int i = 0; i < m; ++i) {
            for (int v = 0; v < M_; ++v) A(i, v) = exp(-tt[v] * x[i]);
            A(i, M_) = i % 2 ? -1 : 1;
        }
        Projection p;
        try {
            p.qr = qr_factor(std::move(A));
        } catch (const NumericalError&) {
            throw SignPatternLost("remez: exponents merged in the (t,c) solve");
        }
        p.beta = qr_solve(p.qr, fx);
        p.r = qr_residual(p.qr, fx);
        p.rn = 0;
        for (const auto& v : p.r) p.rn += sqr(v);
        return p;
    }

    void solve_tc()
    {
        const int m = 2 * M_ + 1;
        Vec fx(m);
        for (int i = 0; i < m; ++i) fx[i] = f_(x[i]);
        Projection p = project(t, fx);
        const Real step_tol = ldexp(Real(1), -ctx_.bits / 2 - 8);
        for (int it = 0; it < 60; ++it) {
            // dr/dt_v, dropping the term that vanishes with the residual
            Matrix J(m, M_);
            for (int v = 0; v < M_; ++v) {
                Vec col(m);
                for (int i = 0; i < m; ++i) col[i] = x[i] * exp(-t[v] * x[i]);
                col = qr_residual(p.qr, std::move(col));
                for (int i = 0; i < m; ++i) J(i, v) = col[i] * p.beta[v];
            }
            Vec d;
            try {
                d = qr_solve(qr_factor(std::move(J)), p.r);
            } catch (const NumericalError&) {
                throw SignPatternLost("remez: singular Jacobian in the (t,c) solve");
            }
            Real lambda = 1;
            bool accepted = false;
            Vec tn(M_);
            for (int half = 0; half < 40; ++half) {
                bool ok = true;
                for (int v = 0; v < M_ && ok; ++v) {
                    tn[v] = t[v] - lambda * d[v];
                    ok = tn[v] > 0;
                }
                if (ok) {
                    Projection pn = project(tn, fx);
                    if (pn.rn < p.rn || pn.rn.is_zero()) {
                        accepted = true;
                        p = std::move(pn);
                        break;
                    }
                }
                lambda = ldexp(lambda, -1);
            }
            Real rel = 0;
            for (int v = 0; v < M_; ++v) rel = max(rel, abs(lambda * d[v] / t[v]));
            if (!accepted) {
                // residual at the rounding floor
                if (rel <= ldexp(Real(1), -ctx_.bits / 2)) break;
                throw SignPatternLost("remez: damped Gauss-Newton stalled in the (t,c) solve");
            }
            t = tn;
            if (rel <= step_tol) break;
            if (it == 59) throw SignPatternLost("remez: (t,c) solve did not converge");
        }
        std::vector<int> order(M_);
        for (int v = 0; v < M_; ++v) order[v] = v;
        std::sort(order.begin(), order.end(), [&](int u, int v) { return t[u] < t[v]; });
        Vec ts(M_), cs(M_);
        for (int v = 0; v < M_; ++v) {
            ts[v] = t[order[v]];
            cs[v] = p.beta[order[v]];
        }
        t = std::move(ts);
        c = std::move(cs);
    }

    // move every x_i to the local extremum of E between its neighbours
    void exchange()
    {
        const int n = 2 * M_;
        Vec old = x;
        Vec nx = x;
        const Real width = ldexp(Real(1), -ctx_.bits / 2);
        for (int i = 1; i <= n; ++i) {
            const Real lo = old[i - 1];
            const Real hi = i < n ? old[i + 1] : 4 * old[n];
            const int s = err0(old[i]).sign();
            if (s == 0) throw SignPatternLost("remez: E vanishes at an alternation point");
            auto g = [&](const Real& xx) { return s * err0(xx); };
            constexpr int K = 32;
            Vec pts(K + 1), gv(K + 1);
            int best = -1;
            for (int j = 1; j < K; ++j) {
                pts[j] = lo + (hi - lo) * j / K;
                gv[j] = g(pts[j]);
                if (best < 0 || gv[j] > gv[best]) best = j;
            }
            pts[0] = lo;
            pts[K] = hi;
            Real gi = g(old[i]);
            Real blo, bhi;
            if (gi >= gv[best]) {
                // current point beats the samples; bracket it by its neighbouring samples
                int j = 1;
                while (j < K && pts[j] < old[i]) ++j;
                blo = pts[j - 1];
                bhi = pts[j];
            } else {
                blo = pts[best - 1];
                bhi = pts[best + 1];
            }
            auto [xm, gm] = golden_max(g, blo, bhi, Real(1e-6));
            Real xx = xm;
            for (int it = 0; it < 40; ++it) {
                auto e = err(xx);
                if (e[2].is_zero()) break;
                Real step = e[1] / e[2];
                Real xn = xx - step;
                if (!(xn > blo && xn < bhi)) break;
                xx = std::move(xn);
                if (abs(step) <= width * xx) break;
            }
            if (g(xx) < gm) xx = xm;
            nx[i] = std::move(xx);
        }
        for (int i = 1; i <= n; ++i)
            if (!(nx[i] > nx[i - 1])) throw SignPatternLost("remez: alternation points collided");
        x = std::move(nx);
    }

    // relative equation residual and stationarity, and the level spread
    void criteria(Real& c1, Real& c2, double& spread) const
    {
        const int n = 2 * M_;
        std::vector<std::array<Real, 3>> e(n + 1);
        for (int i = 0; i <= n; ++i) e[i] = err(x[i]);
        c1 = 0;
        c2 = 0;
        Real mx = abs(e[0][0]), mn = abs(e[0][0]);
        for (int i = 1; i <= n; ++i) {
            if (e[i][0].is_zero()) throw SignPatternLost("remez: E vanishes at an alternation point");
            c1 = max(c1, abs((e[i - 1][0] + e[i][0]) / e[i][0]));
            c2 = max(c2, abs(x[i] * e[i][1] / e[i][0]));
            mx = max(mx, abs(e[i][0]));
            mn = min(mn, abs(e[i][0]));
        }
        spread = static_cast<double>(mx / mn - 1);
    }

    // Newton on E'(x_i) = 0 and E(x_{i-1}) + E(x_i) = 0 in (t, c, x_1..x_2M)
    void polish(int iters)
    {
        const int n = 2 * M_;
        const int N = 4 * M_;
        auto system = [&](const Vec& tt, const Vec& cc, const Vec& xx, Vec& F, Matrix* J) {
            std::vector<std::array<Real, 3>> e(n + 1);
            for (int i = 0; i <= n; ++i) {
                auto fv = f_.eval_all(xx[i]);
                e[i] = {fv[0], fv[1], fv[2]};
                for (int v = 0; v < M_; ++v) {
                    Real ex = cc[v] * exp(-tt[v] * xx[i]);
                    e[i][0] -= ex;
                    ex *= tt[v];
                    e[i][1] += ex;
                    ex *= tt[v];
                    e[i][2] -= ex;
                }
            }
            F.assign(N, Real(0));
            for (int i = 1; i <= n; ++i) {
                F[i - 1] = e[i][1];
                F[n + i - 1] = e[i - 1][0] + e[i][0];
            }
            if (!J) return;
            *J = Matrix(N, N);
            for (int i = 1; i <= n; ++i) {
                for (int v = 0; v < M_; ++v) {
                    Real ei = exp(-tt[v] * xx[i]);
                    Real ep = exp(-tt[v] * xx[i - 1]);
                    // E'(x) = f'(x) + sum c t e^(-tx)
                    (*J)(i - 1, v) = cc[v] * (1 - tt[v] * xx[i]) * ei;
                    (*J)(i - 1, M_ + v) = tt[v] * ei;
                    (*J)(n + i - 1, v) = cc[v] * (xx[i - 1] * ep + xx[i] * ei);
                    (*J)(n + i - 1, M_ + v) = -(ep + ei);
                }
                (*J)(i - 1, 2 * M_ + i - 1) = e[i][2];
                (*J)(n + i - 1, 2 * M_ + i - 1) = e[i][1];
                if (i > 1) (*J)(n + i - 1, 2 * M_ + i - 2) = e[i - 1][1];
            }
        };
        Vec F;
        Matrix J;
        for (int it = 0; it < iters; ++it) {
            system(t, c, x, F, &J);
            Real Fn = max_norm(F);
            Vec d;
            try {
                d = lu_solve(lu_factor(J), F);
            } catch (const NumericalError&) {
                return;
            }
            Real lambda = 1;
            for (int half = 0; half < 20; ++half) {
                Vec tn(M_), cn(M_), xn = x;
                bool ok = true;
                for (int v = 0; v < M_; ++v) {
                    tn[v] = t[v] - lambda * d[v];
                    cn[v] = c[v] - lambda * d[M_ + v];
                    ok = ok && tn[v] > 0 && cn[v] > 0;
                }
                for (int i = 1; i <= n; ++i) {
                    xn[i] = x[i] - lambda * d[2 * M_ + i - 1];
                    ok = ok && xn[i] > xn[i - 1];
                }
                if (ok) {
                    Vec Fnew;
                    system(tn, cn, xn, Fnew, nullptr);
                    if (max_norm(Fnew) < Fn) {
                        t = std::move(tn);
                        c = std::move(cn);
                        x = std::move(xn);
                        break;
                    }
                }
                lambda = ldexp(lambda, -1);
            }
        }
    }

private:
    const KernelEvaluator& f_;
    int M_;
    const PrecisionContext& ctx_;
};

RemezResult remez_run(const PowerKernel& k, int M, const RemezConfig& cfg, int bits, int mds)
{
    PrecisionContext ctx(bits);
    PrecisionScope ps(bits);
    KernelEvaluator f(k, 2, ctx);
    const Real r = k.a / k.b;
    const Real h = solve_hr(r, ctx) / k.b;
    ExpSum init = init_exchange(k, M, h, mds, ctx);

    RemezState st(f, M, ctx);
    st.t = init.t;
    st.c = init.c;
    st.x.resize(2 * M + 1);
    for (int i = 0; i <= 2 * M; ++i) st.x[i] = i * h;

    RemezResult res;
    res.bits = bits;
    res.mds = mds;
    const Real eps(cfg.eps_stop);
    bool converged = false;
    for (int it = 1; it <= cfg.max_iter; ++it) {
        const Vec x0 = st.x, t0 = st.t, c0 = st.c;
        st.exchange();
        {
            Real c1, c2;
            double spread;
            st.criteria(c1, c2, spread);
            res.spread_history.push_back(spread);
        }
        // (t, c) solve the previous x exactly, so moving x only part of the way
        // keeps Newton inside its basin when the full exchange step is too far
        const Vec target = st.x;
        Real theta = 1;
        for (int cut = 0;; ++cut) {
            try {
                st.solve_tc();
                break;
            } catch (const SignPatternLost&) {
                if (cut == 12) throw;
            }
            theta = ldexp(theta, -1);
            st.t = t0;
            st.c = c0;
            for (int i = 1; i <= 2 * M; ++i) st.x[i] = x0[i] + theta * (target[i] - x0[i]);
        }
        res.iterations = it;
        Real c1, c2;
        double spread;
        st.criteria(c1, c2, spread);
        if (st.err0(Real(0)).sign() <= 0) throw SignPatternLost("remez: E(0) lost its sign");
        if (c1 <= eps && c2 <= eps) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw NumericalError("remez: no convergence after " + std::to_string(cfg.max_iter) + " exchange steps");
    st.polish(cfg.newton_polish_iters);

    for (int v = 0; v < M; ++v) {
        if (!(st.c[v] > 0) || !(st.t[v] > k.a) || !(st.t[v] < k.b) || (v && !(st.t[v] > st.t[v - 1])))
            throw NumericalError("remez: final exponents or coefficients violate a < t_1 < ... < t_M < b, c > 0");
    }
    res.expsum.t = st.t;
    res.expsum.c = st.c;
    res.alternation_x = st.x;
    for (int i = 0; i <= 2 * M; ++i) res.alternation_e.push_back(st.err0(st.x[i]));
    for (int i = 1; i <= 2 * M; ++i)
        if (res.alternation_e[i].sign() * res.alternation_e[i - 1].sign() >= 0)
            throw NumericalError("remez: final error curve does not alternate");
    res.level = abs(res.alternation_e[0]);
    return res;
}
} // namespace

Real solve_hr(const Real& r, const PrecisionContext& ctx)
{
    if (!(r > 0) || !(r < 1)) throw DomainError("solve_hr: r must lie in (0,1)");
    PrecisionScope ps(ctx.bits + kGuard);
    const Real s = 1 - r;
    const Real L = log((2 - r) / r) / s;
    NewtonOptions opt{ldexp(Real(1), -ctx.bits - 8), r, 200, std::nullopt};
    opt.bracket = std::make_pair(Real(0), 2 * L + 1);
    Real h = newton_root([&](const Real& h) { return s * exp(-h) + exp(-s * h) - r; },
                         [&](const Real& h) { return -s * exp(-h) - s * exp(-s * h); }, (1 - r / 2) * L, opt);
    return h;
}

HrRow hr_row(const Real& r, const PrecisionContext& ctx)
{
    HrRow row;
    row.r = r;
    row.h = solve_hr(r, ctx);
    PrecisionScope ps(ctx.bits + kGuard);
    row.rho = r * exp((1 - r) * row.h);
    Real s = sqrt(row.rho);
    row.prefactor = sqr(s + 1);
    row.ratio = sqr((s + 1) / (s - 1));
    return row;
}

int precision_policy(const PowerKernel& k, int M)
{
    if (M < 1) throw ArgumentError("precision_policy: M must be positive");
    PrecisionContext ctx(128);
    PrecisionScope ps(160);
    HrRow row = hr_row(k.a / k.b, ctx);
    Real lb = log2(row.prefactor) - M * log2(row.ratio);
    Real bits = -lb + 30 * log2(Real(10));
    Real c = floor(bits);
    return static_cast<int>(c.to_long()) + (c == bits ? 0 : 1);
}

Real eh_bound(const Real& a, const Real& b, int M, const Real& h)
{
    if (!(a > 0) || !(b > a)) throw DomainError("eh_bound: need 0 < a < b");
    if (M < 1) throw ArgumentError("eh_bound: M must be positive");
    if (!(h > 0)) throw DomainError("eh_bound: h must be positive");
    Real rho = (1 + exp(-a * h)) / (1 + exp(-b * h));
    Real s = sqrt(rho);
    return sqr(s + 1) * pow((s + 1) / (s - 1), -2L * M);
}

ExpSum init_exchange(const PowerKernel& k, int M, const Real& h, int mds, const PrecisionContext& ctx,
                     TransformKind kind)
{
    if (M < 1) throw ArgumentError("init_exchange: M must be positive");
    if (!(h > 0)) throw DomainError("init_exchange: h must be positive");
    const int wb = ctx.bits + kGuard;
    PrecisionScope ps(wb);
    if (mds <= 0) mds = default_remez_mds(k.a / k.b);
    Transform psi(kind, k.a / k.b, ctx);
    auto gl = gauss_legendre_cached(mds, ctx);
    DiscreteMeasure mu;
    mu.nodes.resize(mds);
    mu.weights.resize(mds);
    parallel_for(mds, [&](int i) {
        const Real& u = gl->nodes[i];
        Real bt = k.b * psi.eval(u);
        Real y = exp(-h * bt);
        // y decreases with u; store ascending
        mu.nodes[mds - 1 - i] = y;
        mu.weights[mds - 1 - i] = gl->weights[i] * (1 + y) * k.b * psi.deriv(u) * density_unchecked(k, bt);
    });
    QuadratureRule rule;
    try {
        rule = golub_welsch(stieltjes_coeffs(mu, M, ctx), M, ctx);
    } catch (const PrecisionError& e) {
        throw PrecisionError(std::string(e.what()) + " (init_exchange at " + std::to_string(ctx.bits) +
                             " bits; increase bits)");
    }
    ExpSum es;
    for (int v = 0; v < M; ++v) {
        const Real& y = rule.nodes[M - 1 - v];
        const Real& d = rule.weights[M - 1 - v];
        Real t = -log(y) / h;
        Real c = d / (1 + y);
        {
            PrecisionScope pr(ctx.bits);
            es.t.push_back(t + 0);
            es.c.push_back(c + 0);
        }
    }
    for (int v = 0; v < M; ++v) {
        if (!(es.c[v] > 0) || !(es.t[v] > k.a) || !(es.t[v] < k.b) || (v && !(es.t[v] > es.t[v - 1])))
            throw PrecisionError("init_exchange: breakdown (exponents or weights out of range); increase bits");
    }
    return es;
}

HankelDiag hankel_diag(const KernelEvaluator& f, int M, const Real& h)
{
    if (M < 1) throw ArgumentError("hankel_diag: M must be positive");
    HankelDiag hd;
    hd.M = M;
    hd.h = h;
    Vec fv(2 * M + 1);
    parallel_for(2 * M + 1, [&](int j) { fv[j] = f(j * h); });
    hd.H = Matrix(M + 1, M + 1);
    for (int i = 0; i <= M; ++i)
        for (int j = 0; j <= M; ++j) hd.H(i, j) = fv[i + j];
    hd.G = Matrix(M, M);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) hd.G(i, j) = fv[i + j] + 2 * fv[i + j + 1] + fv[i + j + 2];
    return hd;
}

std::string to_string(EmhRoute r)
{
    switch (r) {
    case EmhRoute::Gauss: return "gauss";
    case EmhRoute::Det: return "det";
    case EmhRoute::Inverse: return "inverse";
    }
    return "?";
}

Real emh(const PowerKernel& k, int M, const Real& h, EmhRoute route, const PrecisionContext& ctx, int mds)
{
    PrecisionScope ps(ctx.bits);
    if (route == EmhRoute::Gauss) {
        ExpSum es = init_exchange(k, M, h, mds, ctx);
        return f_at_zero(k, 0, ctx) - coeff_sum(es);
    }
    KernelEvaluator f(k, 0, ctx);
    HankelDiag hd = hankel_diag(f, M, h);
    if (route == EmhRoute::Det) {
        Real dg = determinant(hd.G);
        if (!(dg > 0)) throw PrecisionError("emh: G not positive definite at this precision; increase bits");
        return determinant(hd.H) / dg;
    }
    Matrix L = hd.H;
    try {
        cholesky(L);
    } catch (const NumericalError&) {
        throw PrecisionError("emh: Cholesky of H failed; increase bits");
    }
    Vec u(M + 1);
    for (int i = 0; i <= M; ++i) u[i] = i % 2 ? -1 : 1;
    Vec z = cholesky_solve(L, u);
    Real q = 0;
    for (int i = 0; i <= M; ++i) q += u[i] * z[i];
    return 1 / q;
}

double RemezResult::spread() const
{
    if (alternation_e.empty()) return 0;
    Real mx = abs(alternation_e[0]), mn = mx;
    for (const auto& e : alternation_e) {
        mx = max(mx, abs(e));
        mn = min(mn, abs(e));
    }
    return static_cast<double>(mx / mn - 1);
}

RemezResult remez(const PowerKernel& k, int M, const RemezConfig& cfg)
{
    if (M < 1) throw ArgumentError("remez: M must be positive");
    if (!(cfg.eps_stop > 0)) throw ArgumentError("remez: eps_stop must be positive");
    const int bits = cfg.bits ? cfg.bits : precision_policy(k, M);
    int mds = cfg.mds ? cfg.mds : default_remez_mds(k.a / k.b);
    for (int attempt = 0;; ++attempt) {
        try {
            return remez_run(k, M, cfg, bits, mds);
        } catch (const SignPatternLost& e) {
            if (attempt == 2) throw NumericalError(std::string(e.what()) + " (after doubling M_DS twice)");
            mds *= 2;
        }
    }
}

} // namespace esk
