// Serial reference vs OpenMP kernels on the two hot loops: error-curve sampling and the
// orthogonality panel sums. Both paths must agree bit for bit.

#include "expsumkit/basis.hpp"
#include "expsumkit/expsum.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <chrono>
#include <cstdio>

using namespace esk;

namespace {
template <class F>
double time_it(F&& f, int reps)
{
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}
} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"serial vs OpenMP timings of the parallel kernels"};
    int reps = 3;
    app.add_option("--reps", reps, "repetitions; the best time is reported")->check(CLI::Range(1, 1000));
    CLI11_PARSE(app, argc, argv);
    const int bits = 184;
    PrecisionContext ctx(bits);
    PrecisionScope ps(bits);
    std::printf("threads: %d, bits: %d, best of %d\n", omp_get_max_threads(), bits, reps);

    PowerKernel k{Real(1), ldexp(Real(1), -10), Real(1)};
    Transform phi(TransformKind::Phi, k.ratio(), ctx);
    ExpSum es = gauss_expsum(k, phi, 12, default_mds(k.ratio()), ctx);
    KernelEvaluator f(k, 0, ctx);
    Vec xs = log_grid(Real(1e-6), Real(1e9), 512);
    Vec a, b;
    double ts = time_it([&] { a = error_grid(es, f, xs, Exec::Serial); }, reps);
    double tp = time_it([&] { b = error_grid(es, f, xs, Exec::Parallel); }, reps);
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i) same = a[i] == b[i];
    std::printf("error_grid     %6zu points  serial %8.3f s  parallel %8.3f s  speedup %5.2f  identical %s\n",
                xs.size(), ts, tp, ts / tp, same ? "yes" : "NO");

    Transform phi4(TransformKind::Phi, Real(0.0625), ctx);
    BasisEvaluator ev(phi4, 8, ldexp(Real(1), -bits + 16), ctx);
    const int npts = 4096;
    auto sample = [&](int i) {
        Real x = ldexp(Real(1), -20) * exp(Real(i) / 100);
        return std::make_pair(ev.eval_all(x), Real(1) / npts);
    };
    Vec pa, pb;
    ts = time_it([&] { pa = panel_products(npts, 8, sample, Exec::Serial); }, reps);
    tp = time_it([&] { pb = panel_products(npts, 8, sample, Exec::Parallel); }, reps);
    same = pa == pb;
    std::printf("panel_products %6d points  serial %8.3f s  parallel %8.3f s  speedup %5.2f  identical %s\n", npts,
                ts, tp, ts / tp, same ? "yes" : "NO");
    return 0;
}
