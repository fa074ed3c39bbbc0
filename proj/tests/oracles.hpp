#pragma once

#include "expsumkit/real.hpp"


#include <cmath>
#include <functional>
#include <string>

namespace esk::oracle {

// |a - b| <= tol |b|
inline bool rel_close(const Real& a, const Real& b, const Real& tol) { return abs(a - b) <= tol * abs(b); }

// agreement to `digits` significant decimal digits after rounding both to that many digits
inline bool same_digits(double a, double b, int digits)
{
    char x[64], y[64];
    std::snprintf(x, sizeof x, "%.*e", digits - 1, a);
    std::snprintf(y, sizeof y, "%.*e", digits - 1, b);
    if (std::string(x) == y) return true;
    // allow a one-unit difference in the last digit from double rounding of the reference
    return std::fabs(a - b) <= 1.0001 * std::pow(10.0, std::floor(std::log10(std::fabs(b))) - digits + 1);
}

// I_n(z) by its ascending series
inline Real bessel_i(int n, const Real& z)
{
    Real half = z / 2;
    Real term = 1;
    for (int j = 1; j <= n; ++j) term = term * half / j;
    Real sum = term;
    const Real h2 = sqr(half);
    for (int k = 1; k < 100000; ++k) {
        term = term * h2 / (k * (k + n));
        sum += term;
        if (term < ldexp(sum, -working_bits() - 8)) break;
    }
    return sum;
}

// Golden-section minimum of a unimodal double function on [lo, hi].
inline double golden_min(const std::function<double(double)>& g, double lo, double hi, double tol)
{
    const double ip = (std::sqrt(5.0) - 1) / 2;
    double x1 = hi - ip * (hi - lo), x2 = lo + ip * (hi - lo);
    double g1 = g(x1), g2 = g(x2);
    while (hi - lo > tol * (std::fabs(lo) + std::fabs(hi))) {
        if (g1 <= g2) {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - ip * (hi - lo);
            g1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + ip * (hi - lo);
            g2 = g(x2);
        }
    }
    return g1 <= g2 ? x1 : x2;
}

// Minimax level of a single exponential c e^(-tx) against f(x) = (e^(-x/2) - e^(-x))/x in double
// precision: outer search over t, inner over c (max of affine functions, so convex), innermost a
// dense max scan in x refined around each peak.
inline double brute_force_level_m1()
{
    auto f = [](double x) { return x == 0 ? 0.5 : (std::exp(-0.5 * x) - std::exp(-x)) / x; };
    auto maxerr = [&](double t, double c) {
        auto e = [&](double x) { return std::fabs(f(x) - c * std::exp(-t * x)); };
        double best = e(0);
        const int n = 3000;
        double prev2 = 0, prev1 = e(1e-4);
        double xp2 = 0, xp1 = 1e-4;
        for (int i = 1; i <= n; ++i) {
            double x = 1e-4 * std::pow(1e7, static_cast<double>(i) / n);
            double v = e(x);
            if (prev1 >= prev2 && prev1 >= v) {
                double xm = golden_min([&](double y) { return -e(y); }, xp2, x, 1e-13);
                best = std::max(best, std::max(prev1, e(xm)));
            }
            prev2 = prev1;
            prev1 = v;
            xp2 = xp1;
            xp1 = x;
        }
        return best;
    };
    auto level_t = [&](double t) {
        double c = golden_min([&](double c) { return maxerr(t, c); }, 0.4, 0.6, 1e-13);
        return maxerr(t, c);
    };
    double t = golden_min(level_t, 0.5, 1.0, 1e-10);
    return level_t(t);
}

} // namespace esk::oracle
