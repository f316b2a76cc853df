#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qattn {

// Dense row-major matrix of doubles. Small enough at desk scale (n <= ~4100)
// that sparse storage is not worth it.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {
        if (r < 0 || c < 0) throw std::invalid_argument("Matrix: negative dimensions");
    }

    double& at(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
    double at(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

    bool square() const { return rows == cols; }

    double max_abs() const {
        double m = 0.0;
        for (double v : data) m = std::max(m, std::abs(v));
        return m;
    }

    bool is_symmetric(double tol = 0.0) const {
        if (!square()) return false;
        for (int i = 0; i < rows; ++i)
            for (int j = i + 1; j < cols; ++j)
                if (std::abs(at(i, j) - at(j, i)) > tol) return false;
        return true;
    }

    // (A + A^T)/2
    Matrix symmetrized() const {
        if (!square()) throw std::invalid_argument("symmetrized: matrix not square");
        Matrix s(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                s.at(i, j) = 0.5 * (at(i, j) + at(j, i));
        return s;
    }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }
};

}  // namespace qattn
