#pragma once

#include <cstddef>
#include <vector>

namespace fedat {

/// Dense row-major matrix of 64-bit floats.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }

    bool empty() const { return data.empty(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
    bool all_finite() const;
};

// Kernels. The OpenMP versions parallelize over independent output rows;
// every output element is a sequential sum in ascending index order, so the
// result is bit-identical to the serial reference for any thread count.

/// c = a * b
Matrix matmul(const Matrix& a, const Matrix& b);
/// c = a^T * b (used for weight gradients: x^T * delta)
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// c = a * b^T (used for input gradients: delta * w^T)
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// m[r] += v for every row r
void add_row_vector(Matrix& m, const std::vector<double>& v);
/// column sums (bias gradients)
std::vector<double> col_sums(const Matrix& m);
/// elementwise product, in place: a *= b
void hadamard_inplace(Matrix& a, const Matrix& b);

namespace serial {
// Reference implementations kept for the kernel equivalence tests and the
// benchmark baseline.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
std::vector<double> col_sums(const Matrix& m);
}  // namespace serial

}  // namespace fedat
