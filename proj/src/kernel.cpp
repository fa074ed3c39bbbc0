#include "expsumkit/kernel.hpp"

#include "expsumkit/quadrature.hpp"

#include <cmath>

namespace esk {

namespace {
constexpr int kGuard = 32;

bool is_int(const Real& x) { return floor(x) == x; }
} // namespace

PowerKernel::PowerKernel(Real eta_, Real a_, Real b_) : eta(std::move(eta_)), a(std::move(a_)), b(std::move(b_))
{
    if (!(eta > 0)) throw DomainError("kernel: eta must be positive");
    if (!(a > 0) || !(b > a)) throw DomainError("kernel: need 0 < a < b");
}

Real gamma_eta(const Real& eta)
{
    if (eta == 0.5) return sqrt(const_pi());
    if (eta == 1 || eta == 2) return Real(1);
    return gamma(eta);
}

Real density_unchecked(const PowerKernel& k, const Real& t)
{
    if (k.eta == 1) return Real(1);
    if (k.eta == 2) return Real(t) + 0;
    return pow(t, k.eta - 1) / gamma_eta(k.eta);
}

Real density(const PowerKernel& k, const Real& t, const PrecisionContext& ctx)
{
    PrecisionScope ps(ctx.bits);
    Real slack = ldexp(Real(1), -ctx.bits + 8);
    if (t < k.a * (1 - slack) || t > k.b * (1 + slack)) throw DomainError("density: t outside [a,b]");
    return density_unchecked(k, t);
}

Real f_at_zero(const PowerKernel& k, int n, const PrecisionContext& ctx)
{
    PrecisionScope ps(ctx.bits + kGuard);
    Real s = k.eta + n;
    Real v = pow(k.a, s) * expm1(s * log(k.b / k.a)) / (s * gamma_eta(k.eta));
    return n % 2 ? -v : v;
}

Real f_derivative(const PowerKernel& k, int n, const Real& x, const PrecisionContext& ctx)
{
    if (n < 0) throw ArgumentError("f_derivative: n must be nonnegative");
    if (x < 0) throw DomainError("f_derivative: x must be nonnegative");
    if (x.is_zero()) return f_at_zero(k, n, ctx);
    const int wb = ctx.bits + kGuard;
    PrecisionScope ps(wb);
    const Real p = k.eta + (n - 1);
    // beyond t_max the integrand is below 2^-wb relative to its value at t = a
    Real L = wb * const_log2() + abs(p) * log(k.b / k.a) + 16;
    Real tmax = min(k.b, k.a + L / x);
    std::vector<Real> edges{k.a};
    const Real step = 8 / x;
    while (edges.back() < tmax) edges.push_back(min(tmax, min(2 * edges.back(), edges.back() + step)));

    auto composite = [&](int order) {
        PrecisionContext c(ctx.bits + kGuard);
        auto rule = gauss_legendre_cached(order, c);
        Real sum = 0;
        for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
            Real half = ldexp(edges[j + 1] - edges[j], -1);
            Real mid = ldexp(edges[j + 1] + edges[j], -1);
            Real part = 0;
            for (int i = 0; i < order; ++i) {
                Real t = mid + half * rule->nodes[i];
                part += rule->weights[i] * exp(p * log(t) - x * t);
            }
            sum += half * part;
        }
        return sum / gamma_eta(k.eta);
    };
    const Real tol = ldexp(Real(1), -ctx.bits + 16);
    Real prev = composite(16);
    for (int order = 32; order <= 4096; order *= 2) {
        Real cur = composite(order);
        if (abs(cur - prev) <= tol * abs(cur)) return n % 2 ? -cur : cur;
        prev = std::move(cur);
    }
    throw NumericalError("f_derivative: order doubling did not converge");
}

KernelEvaluator::KernelEvaluator(const PowerKernel& k, int max_deriv, const PrecisionContext& ctx)
    : k_(k), max_deriv_(max_deriv), bits_(ctx.bits), work_bits_(ctx.bits + kGuard)
{
    PrecisionScope ps(work_bits_);
    k_ = PowerKernel(Real(k.eta) + 0, Real(k.a) + 0, Real(k.b) + 0);
    gamma_eta_ = gamma_eta(k_.eta);
    if (is_int(k_.eta)) {
        fam_ = Family::Integer;
        eta_int_ = k_.eta.to_long();
    } else if (is_int(k_.eta - 0.5)) {
        fam_ = Family::HalfInteger;
        eta_int_ = (k_.eta - 0.5).to_long();
    } else {
        fam_ = Family::Other;
    }
    series_limit_ = 2;
    // terms until X^K/K! < 2^-work e^-X at X = series_limit
    double X = 2.0, lt = 0.0;
    int K = 0;
    const double target = -work_bits_ * std::log(2.0) - X;
    while (lt > target) {
        ++K;
        lt += std::log(X / K);
    }
    mom_.reserve(K + max_deriv + 2);
    const Real lba = log(k_.b / k_.a);
    for (int j = 0; j <= K + max_deriv + 1; ++j) {
        Real s = k_.eta + j;
        mom_.push_back(pow(k_.a, s) * expm1(s * lba) / (s * gamma_eta_));
    }
    f0_ = mom_[0];
}

Real KernelEvaluator::series(int n, const Real& x) const
{
    const long K = static_cast<long>(mom_.size()) - max_deriv_ - 2;
    Real mx = -x;
    Real acc = mom_[n + K];
    for (long kk = K; kk >= 1; --kk) {
        acc *= mx;
        acc /= kk;
        acc += mom_[n + kk - 1];
    }
    return n % 2 ? -acc : acc;
}

Real KernelEvaluator::upper_gamma(int n, const Real& y) const
{
    // Gamma(s+1, y) = s Gamma(s, y) + y^s e^-y, started at s = 1 or s = 1/2
    Real s, g, term;
    const Real ey = exp(-y);
    if (fam_ == Family::Integer) {
        s = 1;
        g = ey;
        term = y * ey;
    } else {
        s = 0.5;
        Real sy = sqrt(y);
        g = Real(0);
        mpfr_erfc(g.get(), sy.get(), MPFR_RNDN);
        g *= sqrt(const_pi());
        term = sy * ey;
    }
    const long steps = eta_int_ + n - (fam_ == Family::Integer ? 1 : 0);
    for (long i = 0; i < steps; ++i) {
        g = s * g + term;
        term *= y;
        s += 1;
    }
    return g;
}

Real KernelEvaluator::eval(int n, const Real& x) const
{
    if (n < 0 || n > max_deriv_) throw ArgumentError("KernelEvaluator: derivative order out of range");
    if (x < 0) throw DomainError("KernelEvaluator: x must be nonnegative");
    const int outer = working_bits();
    Real v;
    {
        PrecisionScope ps(std::max(work_bits_, outer + kGuard));
        if (fam_ == Family::Other) {
            v = f_derivative(k_, n, x, PrecisionContext(std::max(bits_, outer)));
        } else if (x * k_.b <= series_limit_) {
            v = series(n, x);
        } else {
            Real s = k_.eta + n;
            Real d = upper_gamma(n, k_.a * x) - upper_gamma(n, k_.b * x);
            v = d * exp(-s * log(x)) / gamma_eta_;
            if (n % 2) v = -v;
        }
    }
    return v + 0;
}

std::vector<Real> KernelEvaluator::eval_all(const Real& x) const
{
    std::vector<Real> out;
    out.reserve(max_deriv_ + 1);
    if (fam_ == Family::Other || x * k_.b <= series_limit_) {
        for (int n = 0; n <= max_deriv_; ++n) out.push_back(eval(n, x));
        return out;
    }
    if (x < 0) throw DomainError("KernelEvaluator: x must be nonnegative");
    const int outer = working_bits();
    {
        PrecisionScope ps(std::max(work_bits_, outer + kGuard));
        // ladder both incomplete gammas once
        auto ladder = [&](const Real& y) {
            std::vector<Real> gs;
            Real s, g, term;
            const Real ey = exp(-y);
            if (fam_ == Family::Integer) {
                s = 1;
                g = ey;
                term = y * ey;
            } else {
                s = 0.5;
                Real sy = sqrt(y);
                mpfr_erfc(g.get(), sy.get(), MPFR_RNDN);
                g *= sqrt(const_pi());
                term = sy * ey;
            }
            const long start = eta_int_ - (fam_ == Family::Integer ? 1 : 0);
            for (long i = 0; i < start + max_deriv_; ++i) {
                if (i >= start) gs.push_back(g);
                g = s * g + term;
                term *= y;
                s += 1;
            }
            gs.push_back(g);
            return gs;
        };
        auto ga = ladder(k_.a * x);
        auto gb = ladder(k_.b * x);
        const Real lx = log(x);
        Real xs = exp(-k_.eta * lx) / gamma_eta_;
        const Real inv = 1 / x;
        for (int n = 0; n <= max_deriv_; ++n) {
            Real v = (ga[n] - gb[n]) * xs;
            out.push_back(n % 2 ? -v : v);
            xs *= inv;
        }
    }
    for (auto& v : out) v = v + 0;
    return out;
}

} // namespace esk
