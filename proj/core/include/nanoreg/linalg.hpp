#pragma once

#include <cstddef>
#include <vector>

namespace nanoreg {

/// Dense row-major matrix of doubles. Sized once, never reshaped implicitly.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row_ptr(std::size_t r) { return data.data() + r * cols; }
    const double* row_ptr(std::size_t r) const { return data.data() + r * cols; }
};

/// Solves A x = b for symmetric positive definite A via Cholesky factorization.
/// Throws std::runtime_error if the factorization breaks down.
std::vector<double> solve_spd(Matrix a, std::vector<double> b);

}  // namespace nanoreg
