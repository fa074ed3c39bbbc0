#include "expsumkit/quadrature.hpp"

#include "expsumkit/kernel.hpp"
#include "expsumkit/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace esk {

namespace {
constexpr int kGuard = 16;

// P_M(x) and P_{M-1}(x) by the three-term recurrence
void legendre_pair(int M, const Real& x, Real& pm, Real& pm1)
{
    Real p0 = 1, p1 = x;
    for (int j = 1; j < M; ++j) {
        Real p2 = (2 * j + 1) * x * p1;
        p2 -= j * p0;
        p2 /= j + 1;
        p0 = std::move(p1);
        p1 = std::move(p2);
    }
    pm = std::move(p1);
    pm1 = std::move(p0);
}

double legendre_newton_double(int M, double x)
{
    for (int it = 0; it < 100; ++it) {
        double p0 = 1, p1 = x;
        for (int j = 1; j < M; ++j) {
            double p2 = ((2 * j + 1) * x * p1 - j * p0) / (j + 1);
            p0 = p1;
            p1 = p2;
        }
        double dp = M * (x * p1 - p0) / (x * x - 1);
        double dx = p1 / dp;
        x -= dx;
        if (std::fabs(dx) < 1e-16) break;
    }
    return x;
}

QuadratureRule build_gauss_legendre(int M, int bits)
{
    QuadratureRule q;
    q.nodes.resize(M);
    q.weights.resize(M);
    const int half = (M + 1) / 2;
    // node index i counts from the right end: x_i ~ cos(pi (i + 0.75) / (M + 0.5))
    #pragma omp parallel for schedule(dynamic, 4)
    for (int i = 0; i < half; ++i) {
        PrecisionScope ps(bits);
        Real x;
        if (M % 2 == 1 && i == half - 1) {
            x = 0;
        } else {
            double x0 = std::cos(M_PI * (i + 0.75) / (M + 0.5));
            double xd = legendre_newton_double(M, x0);
            int p = 53;
            {
                PrecisionScope pd(p);
                x = Real(xd);
            }
            while (true) {
                int next = std::min(2 * p, bits);
                PrecisionScope pn(next);
                Real xx = x + 0;
                Real pm, pm1;
                legendre_pair(M, xx, pm, pm1);
                Real dp = M * (xx * pm - pm1) / (sqr(xx) - 1);
                xx -= pm / dp;
                x = std::move(xx);
                if (next == bits) {
                    if (p == bits) break;
                    p = bits;
                } else {
                    p = next;
                }
            }
        }
        Real pm, pm1;
        legendre_pair(M, x, pm, pm1);
        Real w;
        if (x.is_zero()) {
            // P'_M(0) = M P_{M-1}(0)
            w = 2 / sqr(M * pm1);
        } else {
            Real dp = M * (x * pm - pm1) / (sqr(x) - 1);
            w = 2 / ((1 - sqr(x)) * sqr(dp));
        }
        q.nodes[M - 1 - i] = x;
        q.weights[M - 1 - i] = w;
        q.nodes[i] = -x;
        q.weights[i] = w;
    }
    return q;
}
} // namespace

std::shared_ptr<const QuadratureRule> gauss_legendre_cached(int M, const PrecisionContext& ctx)
{
    if (M < 1) throw ArgumentError("gauss_legendre: M must be positive");
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::shared_ptr<const QuadratureRule>> cache;
    auto key = std::make_pair(M, ctx.bits);
    {
        std::lock_guard<std::mutex> lk(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto rule = std::make_shared<const QuadratureRule>(build_gauss_legendre(M, ctx.bits + kGuard));
    std::lock_guard<std::mutex> lk(mu);
    return cache.emplace(key, std::move(rule)).first->second;
}

QuadratureRule gauss_legendre(int M, const PrecisionContext& ctx) { return *gauss_legendre_cached(M, ctx); }

QuadratureRule gauss_chebyshev(int M, const PrecisionContext& ctx)
{
    if (M < 1) throw ArgumentError("gauss_chebyshev: M must be positive");
    PrecisionScope ps(ctx.bits + kGuard);
    QuadratureRule q;
    const Real pi = const_pi();
    for (int nu = M; nu >= 1; --nu) {
        q.nodes.push_back(cos((2 * nu - 1) * pi / (2 * M)));
        q.weights.push_back(Real(1) / M);
    }
    if (M % 2 == 1) q.nodes[M / 2] = 0;
    return q;
}

RecurrenceCoeffs legendre_coeffs(int M, const PrecisionContext& ctx)
{
    PrecisionScope ps(ctx.bits + kGuard);
    RecurrenceCoeffs rc;
    for (int j = 0; j < M; ++j) {
        rc.alpha.push_back(Real(0));
        rc.beta.push_back(j == 0 ? Real(2) : Real(j * j) / (4 * j * j - 1));
    }
    return rc;
}

RecurrenceCoeffs stieltjes_coeffs(const DiscreteMeasure& mu, int M, const PrecisionContext& ctx)
{
    const std::size_t N = mu.nodes.size();
    if (M < 1) throw ArgumentError("stieltjes: M must be positive");
    if (N < static_cast<std::size_t>(M) || mu.weights.size() != N)
        throw RankError("stieltjes: measure has " + std::to_string(N) + " support points, need " + std::to_string(M));
    PrecisionScope ps(ctx.bits + kGuard);
    RecurrenceCoeffs rc;
    Vec prev(N, Real(0)), cur(N, Real(1));
    Real norm_prev = 1;
    for (int k = 0; k < M; ++k) {
        Real nrm = 0, mom = 0;
        for (std::size_t i = 0; i < N; ++i) {
            Real w = mu.weights[i] * sqr(cur[i]);
            mom += w * mu.nodes[i];
            nrm += w;
        }
        if (!(nrm > 0)) throw PrecisionError("stieltjes: nonpositive norm at degree " + std::to_string(k) + "; increase precision");
        Real alpha = mom / nrm;
        Real beta = k == 0 ? nrm : nrm / norm_prev;
        if (!(beta > 0)) throw PrecisionError("stieltjes: nonpositive beta; increase precision");
        if (k + 1 < M) {
            for (std::size_t i = 0; i < N; ++i) {
                Real nx = (mu.nodes[i] - alpha) * cur[i];
                if (k > 0) nx -= beta * prev[i];
                prev[i] = std::move(cur[i]);
                cur[i] = std::move(nx);
            }
        }
        rc.alpha.push_back(std::move(alpha));
        rc.beta.push_back(std::move(beta));
        norm_prev = std::move(nrm);
    }
    return rc;
}

QuadratureRule golub_welsch(const RecurrenceCoeffs& rc, int M, const PrecisionContext& ctx)
{
    if (M < 1 || static_cast<std::size_t>(M) > rc.alpha.size() || rc.beta.size() < rc.alpha.size())
        throw ArgumentError("golub_welsch: M exceeds available coefficients");
    PrecisionScope ps(ctx.bits + kGuard);
    const int n = M;
    Vec d(n), e(n), z(n);
    for (int i = 0; i < n; ++i) {
        d[i] = rc.alpha[i] + 0;
        e[i] = i + 1 < n ? sqrt(rc.beta[i + 1]) : Real(0);
        z[i] = i == 0 ? 1 : 0;
    }
    const Real eps = ldexp(Real(1), -(ctx.bits + kGuard));
    auto hypot_ = [](const Real& a, const Real& b) { return sqrt(sqr(a) + sqr(b)); };
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                Real dd = abs(d[m]) + abs(d[m + 1]);
                if (abs(e[m]) <= eps * dd) break;
            }
            if (m != l) {
                if (++iter > 100) throw NumericalError("golub_welsch: QL iteration did not converge");
                Real g = (d[l + 1] - d[l]) / (2 * e[l]);
                Real r = hypot_(g, Real(1));
                g = d[m] - d[l] + e[l] / (g + (g.sign() < 0 ? -r : r));
                Real s = 1, c = 1, p = 0;
                int i;
                bool underflow = false;
                for (i = m - 1; i >= l; --i) {
                    Real f = s * e[i];
                    Real b = c * e[i];
                    r = hypot_(f, g);
                    e[i + 1] = r;
                    if (r.is_zero()) {
                        d[i + 1] -= p;
                        e[m] = 0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    Real zf = z[i + 1];
                    z[i + 1] = s * z[i] + c * zf;
                    z[i] = c * z[i] - s * zf;
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0;
            }
        } while (m != l);
    }
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return d[a] < d[b]; });
    QuadratureRule q;
    for (int i : idx) {
        q.nodes.push_back(d[i]);
        q.weights.push_back(rc.beta[0] * sqr(z[i]));
    }
    return q;
}

DiscreteMeasure transformed_measure(const PowerKernel& k, const Transform& psi, int mds, const PrecisionContext& ctx)
{
    if (mds < 1) throw ArgumentError("transformed_measure: M_DS must be positive");
    auto gl = gauss_legendre_cached(mds, ctx);
    DiscreteMeasure mu;
    mu.nodes.resize(mds);
    mu.weights.resize(mds);
    const int wb = ctx.bits + kGuard;
    #pragma omp parallel for schedule(static)
    for (int i = 0; i < mds; ++i) {
        PrecisionScope ps(wb);
        const Real& u = gl->nodes[i];
        Real t = k.b * psi.eval(u);
        mu.nodes[i] = u;
        mu.weights[i] = gl->weights[i] * k.b * psi.deriv(u) * density_unchecked(k, t);
    }
    return mu;
}

Real mre(const QuadratureRule& coarse, const QuadratureRule& fine)
{
    if (coarse.nodes.size() != fine.nodes.size()) throw ArgumentError("mre: rules differ in size");
    Real m = 0;
    auto upd = [&](const Vec& x, const Vec& y) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (y[i].is_zero()) {
                if (!(x[i] == y[i])) {
                    mpfr_set_inf(m.get(), 1);
                    return;
                }
                continue;
            }
            Real e = abs((x[i] - y[i]) / y[i]);
            if (e > m) m = std::move(e);
        }
    };
    upd(coarse.nodes, fine.nodes);
    if (m.is_finite()) upd(coarse.weights, fine.weights);
    return m;
}

int default_mds(const Real& r) { return r >= 0.0625 ? 96 : 1536; }

Vec chebyshev_t(int n, const Real& u)
{
    Vec t;
    t.reserve(n + 1);
    t.push_back(Real(1));
    if (n >= 1) t.push_back(u + 0);
    for (int j = 2; j <= n; ++j) t.push_back(2 * u * t[j - 1] - t[j - 2]);
    return t;
}

} // namespace esk
