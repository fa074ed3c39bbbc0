#include "expsumkit/parallel.hpp"

#include <exception>
#include <mutex>

namespace esk {

void parallel_for(int n, const std::function<void(int)>& fn, Exec e)
{
    const int bits = working_bits();
    if (e == Exec::Serial) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr err;
    std::mutex mu;
    #pragma omp parallel for schedule(dynamic, 8)
    for (int i = 0; i < n; ++i) {
        try {
            PrecisionScope ps(bits);
            fn(i);
        } catch (...) {
            std::lock_guard<std::mutex> lk(mu);
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
}

Vec panel_products(int npts, int n_max, const std::function<std::pair<Vec, Real>(int)>& sample, Exec e)
{
    std::vector<std::pair<Vec, Real>> s(npts);
    parallel_for(npts, [&](int i) { s[i] = sample(i); }, e);
    Vec out(static_cast<std::size_t>(n_max) * n_max, Real(0));
    for (int i = 0; i < npts; ++i) {
        const Vec& chi = s[i].first;
        for (int m = 1; m <= n_max; ++m) {
            Real wm = s[i].second * chi[m];
            for (int n = m; n <= n_max; ++n) out[(m - 1) * n_max + (n - 1)] += wm * chi[n];
        }
    }
    for (int m = 1; m <= n_max; ++m)
        for (int n = 1; n < m; ++n) out[(m - 1) * n_max + (n - 1)] = out[(n - 1) * n_max + (m - 1)];
    return out;
}

} // namespace esk
