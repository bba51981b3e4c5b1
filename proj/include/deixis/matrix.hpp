#pragma once

#include <cstddef>
#include <vector>

#include "deixis/errors.hpp"
#include "deixis/rng.hpp"

namespace deixis {

using Vector = std::vector<double>;

/// Dense row-major matrix; just enough linear algebra for the kernels here.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    static Matrix random(std::size_t r, std::size_t c, Rng& rng, double scale) {
        Matrix m(r, c);
        for (auto& v : m.data) v = rng.uniform(-scale, scale);
        return m;
    }
};

inline Vector matvec(const Matrix& m, const Vector& x) {
    if (x.size() != m.cols) throw ShapeMismatch("matvec: size mismatch");
    Vector y(m.rows, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        double acc = 0.0;
        const double* row = m.data.data() + r * m.cols;
        for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
    return y;
}

/// y = m^T x
inline Vector matvec_t(const Matrix& m, const Vector& x) {
    if (x.size() != m.rows) throw ShapeMismatch("matvec_t: size mismatch");
    Vector y(m.cols, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double xr = x[r];
        const double* row = m.data.data() + r * m.cols;
        for (std::size_t c = 0; c < m.cols; ++c) y[c] += row[c] * xr;
    }
    return y;
}

/// m += outer(a, b)
inline void add_outer(Matrix& m, const Vector& a, const Vector& b) {
    for (std::size_t r = 0; r < m.rows; ++r) {
        double* row = m.data.data() + r * m.cols;
        const double ar = a[r];
        for (std::size_t c = 0; c < m.cols; ++c) row[c] += ar * b[c];
    }
}

inline double dot(const Vector& a, const Vector& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline void axpy(Vector& y, double alpha, const Vector& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

} // namespace deixis
