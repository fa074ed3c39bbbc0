#pragma once

#include "expsumkit/linalg.hpp"

#include <functional>
#include <utility>

namespace esk {

// Serial is the reference path; Parallel must agree with it bit for bit because every
// reduction happens after the map, in index order.
enum class Exec { Serial, Parallel };

// fn(i) for i in [0, n). Workers inherit the caller's working precision.
void parallel_for(int n, const std::function<void(int)>& fn, Exec e = Exec::Parallel);

// Samples (chi_0..chi_N at x_i, w_i) and returns sum_i w_i chi_m chi_n for m, n = 1..N,
// row-major in an N*N vector.
Vec panel_products(int npts, int n_max, const std::function<std::pair<Vec, Real>(int)>& sample,
                   Exec e = Exec::Parallel);

} // namespace esk
