#pragma once

#include "expsumkit/real.hpp"

#include <cstddef>
#include <vector>

namespace esk {

using Vec = std::vector<Real>;

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    Real& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    const Real& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<Real> a_;
};

// In-place lower Cholesky factor; throws NumericalError when a pivot is not positive.
void cholesky(Matrix& a);
Vec cholesky_solve(const Matrix& l, Vec b);

// LU with partial pivoting. Singular pivot -> NumericalError.
struct LU {
    Matrix lu;
    std::vector<std::size_t> perm;
    int parity = 1;
};
LU lu_factor(Matrix a);
Vec lu_solve(const LU& f, Vec b);
Real determinant(const Matrix& a);

// Householder QR of a tall matrix (rows >= cols). Rank-deficient column -> NumericalError.
struct QR {
    Matrix r;
    std::vector<Vec> v;
};
QR qr_factor(Matrix a);
// least-squares solution of min |A x - b|
Vec qr_solve(const QR& f, Vec b);
// b - A x at the least-squares solution
Vec qr_residual(const QR& f, Vec b);

Real max_abs(const Vec& v);

} // namespace esk
