#include "fedat/matrix.hpp"

#include <cmath>
#include <string>

#include "fedat/errors.hpp"

namespace fedat {

namespace {

void require(bool ok, const char* what, std::size_t ar, std::size_t ac, std::size_t br,
             std::size_t bc) {
    if (!ok) {
        throw DimensionError(std::string(what) + ": (" + std::to_string(ar) + "x" +
                             std::to_string(ac) + ") vs (" + std::to_string(br) + "x" +
                             std::to_string(bc) + ")");
    }
}

// Parallelizing tiny products costs more than it saves.
constexpr std::size_t kParallelMinWork = 1 << 15;

}  // namespace

bool Matrix::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    require(a.cols == b.rows, "matmul shape mismatch", a.rows, a.cols, b.rows, b.cols);
    Matrix c(a.rows, b.cols);
    const std::size_t n = a.rows, k = a.cols, m = b.cols;
    const bool par = n * k * m >= kParallelMinWork;
#pragma omp parallel for schedule(static) if (par)
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = ai[p];
            const double* bp = b.row(p);
#pragma omp simd
            for (std::size_t j = 0; j < m; ++j) ci[j] += aip * bp[j];
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    require(a.rows == b.rows, "matmul_tn shape mismatch", a.rows, a.cols, b.rows, b.cols);
    Matrix c(a.cols, b.cols);
    const std::size_t n = a.cols, k = a.rows, m = b.cols;
    const bool par = n * k * m >= kParallelMinWork;
#pragma omp parallel for schedule(static) if (par)
    for (std::size_t i = 0; i < n; ++i) {
        double* ci = c.row(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double api = a.at(p, i);
            const double* bp = b.row(p);
#pragma omp simd
            for (std::size_t j = 0; j < m; ++j) ci[j] += api * bp[j];
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    require(a.cols == b.cols, "matmul_nt shape mismatch", a.rows, a.cols, b.rows, b.cols);
    Matrix c(a.rows, b.rows);
    const std::size_t n = a.rows, k = a.cols, m = b.rows;
    const bool par = n * k * m >= kParallelMinWork;
#pragma omp parallel for schedule(static) if (par)
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (std::size_t j = 0; j < m; ++j) {
            const double* bj = b.row(j);
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
            ci[j] = acc;
        }
    }
    return c;
}

void add_row_vector(Matrix& m, const std::vector<double>& v) {
    require(m.cols == v.size(), "add_row_vector shape mismatch", m.rows, m.cols, 1, v.size());
    const bool par = m.rows * m.cols >= kParallelMinWork;
#pragma omp parallel for schedule(static) if (par)
    for (std::size_t i = 0; i < m.rows; ++i) {
        double* mi = m.row(i);
#pragma omp simd
        for (std::size_t j = 0; j < m.cols; ++j) mi[j] += v[j];
    }
}

std::vector<double> col_sums(const Matrix& m) {
    std::vector<double> s(m.cols, 0.0);
    const bool par = m.rows * m.cols >= kParallelMinWork;
#pragma omp parallel for schedule(static) if (par)
    for (std::size_t j = 0; j < m.cols; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m.rows; ++i) acc += m.at(i, j);
        s[j] = acc;
    }
    return s;
}

void hadamard_inplace(Matrix& a, const Matrix& b) {
    require(a.same_shape(b), "hadamard shape mismatch", a.rows, a.cols, b.rows, b.cols);
    const std::size_t n = a.data.size();
    const bool par = n >= kParallelMinWork;
#pragma omp parallel for schedule(static) if (par)
    for (std::size_t i = 0; i < n; ++i) a.data[i] *= b.data[i];
}

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
    require(a.cols == b.rows, "matmul shape mismatch", a.rows, a.cols, b.rows, b.cols);
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t p = 0; p < a.cols; ++p)
            for (std::size_t j = 0; j < b.cols; ++j) c.at(i, j) += a.at(i, p) * b.at(p, j);
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    require(a.rows == b.rows, "matmul_tn shape mismatch", a.rows, a.cols, b.rows, b.cols);
    Matrix c(a.cols, b.cols);
    for (std::size_t i = 0; i < a.cols; ++i)
        for (std::size_t p = 0; p < a.rows; ++p)
            for (std::size_t j = 0; j < b.cols; ++j) c.at(i, j) += a.at(p, i) * b.at(p, j);
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    require(a.cols == b.cols, "matmul_nt shape mismatch", a.rows, a.cols, b.rows, b.cols);
    Matrix c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < b.rows; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < a.cols; ++p) acc += a.at(i, p) * b.at(j, p);
            c.at(i, j) = acc;
        }
    return c;
}

std::vector<double> col_sums(const Matrix& m) {
    std::vector<double> s(m.cols, 0.0);
    for (std::size_t j = 0; j < m.cols; ++j)
        for (std::size_t i = 0; i < m.rows; ++i) s[j] += m.at(i, j);
    return s;
}

}  // namespace serial

}  // namespace fedat
