#include "expsumkit/linalg.hpp"

#include <utility>

namespace esk {

void cholesky(Matrix& a)
{
    const std::size_t n = a.rows();
    for (std::size_t j = 0; j < n; ++j) {
        Real d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= sqr(a(j, k));
        if (!(d > 0)) throw NumericalError("cholesky: matrix not positive definite at pivot " + std::to_string(j));
        a(j, j) = sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            Real s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / a(j, j);
        }
        for (std::size_t i = 0; i < j; ++i) a(i, j) = 0;
    }
}

Vec cholesky_solve(const Matrix& l, Vec b)
{
    const std::size_t n = l.rows();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) b[i] -= l(i, k) * b[k];
        b[i] /= l(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) b[i] -= l(k, i) * b[k];
        b[i] /= l(i, i);
    }
    return b;
}

LU lu_factor(Matrix a)
{
    const std::size_t n = a.rows();
    LU f;
    f.perm.resize(n);
    for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        Real best = abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            Real v = abs(a(i, k));
            if (v > best) {
                best = std::move(v);
                p = i;
            }
        }
        if (best.is_zero()) throw NumericalError("lu: singular matrix");
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
            std::swap(f.perm[k], f.perm[p]);
            f.parity = -f.parity;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            a(i, k) /= a(k, k);
            const Real& m = a(i, k);
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= m * a(k, j);
        }
    }
    f.lu = std::move(a);
    return f;
}

Vec lu_solve(const LU& f, Vec b)
{
    const std::size_t n = f.lu.rows();
    Vec x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < i; ++k) x[i] -= f.lu(i, k) * x[k];
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) x[i] -= f.lu(i, k) * x[k];
        x[i] /= f.lu(i, i);
    }
    return x;
}

QR qr_factor(Matrix a)
{
    const std::size_t m = a.rows(), n = a.cols();
    if (m < n) throw ArgumentError("qr: need rows >= cols");
    QR f;
    for (std::size_t k = 0; k < n; ++k) {
        Vec v(m - k);
        Real nrm = 0;
        for (std::size_t i = k; i < m; ++i) {
            v[i - k] = a(i, k);
            nrm += sqr(v[i - k]);
        }
        Real full = nrm;
        for (std::size_t i = 0; i < k; ++i) full += sqr(a(i, k));
        nrm = sqrt(nrm);
        if (nrm <= ldexp(sqrt(full), -working_bits() + 8)) throw NumericalError("qr: rank-deficient matrix");
        Real alpha = v[0].sign() < 0 ? nrm : -nrm;
        v[0] -= alpha;
        Real vv = 0;
        for (const auto& x : v) vv += sqr(x);
        for (std::size_t j = k; j < n; ++j) {
            Real s = 0;
            for (std::size_t i = k; i < m; ++i) s += v[i - k] * a(i, j);
            s = 2 * s / vv;
            for (std::size_t i = k; i < m; ++i) a(i, j) -= s * v[i - k];
        }
        f.v.push_back(std::move(v));
    }
    f.r = std::move(a);
    return f;
}

namespace {
void reflect(const Vec& v, std::size_t k, Vec& b)
{
    Real s = 0, vv = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += v[i] * b[k + i];
        vv += sqr(v[i]);
    }
    s = 2 * s / vv;
    for (std::size_t i = 0; i < v.size(); ++i) b[k + i] -= s * v[i];
}
} // namespace

Vec qr_solve(const QR& f, Vec b)
{
    const std::size_t n = f.v.size();
    for (std::size_t k = 0; k < n; ++k) reflect(f.v[k], k, b);
    Vec x(n);
    for (std::size_t i = n; i-- > 0;) {
        x[i] = b[i];
        for (std::size_t j = i + 1; j < n; ++j) x[i] -= f.r(i, j) * x[j];
        x[i] /= f.r(i, i);
    }
    return x;
}

Vec qr_residual(const QR& f, Vec b)
{
    const std::size_t n = f.v.size();
    for (std::size_t k = 0; k < n; ++k) reflect(f.v[k], k, b);
    for (std::size_t i = 0; i < n; ++i) b[i] = 0;
    for (std::size_t k = n; k-- > 0;) reflect(f.v[k], k, b);
    return b;
}

Real determinant(const Matrix& a)
{
    LU f;
    try {
        f = lu_factor(a);
    } catch (const NumericalError&) {
        return Real(0);
    }
    Real d = f.parity;
    for (std::size_t i = 0; i < a.rows(); ++i) d *= f.lu(i, i);
    return d;
}

Real max_abs(const Vec& v)
{
    Real m = 0;
    for (const auto& x : v) {
        Real ax = abs(x);
        if (ax > m) m = std::move(ax);
    }
    return m;
}

} // namespace esk
