#pragma once

#include <string>
#include <vector>

#include "qattn/matrix.hpp"
#include "qattn/qubo.hpp"

namespace qattn {

// Outer product x x^T of a solved mask: binary, symmetric, rank <= 1, with
// the mask itself on the diagonal.
struct ScoreMatrix {
    int n = 0;
    std::vector<uint8_t> values;  // row-major n x n

    uint8_t at(int a, int b) const { return values[static_cast<size_t>(a) * n + b]; }
};

ScoreMatrix score_matrix(const BinaryMask& x);

// Element-wise gating: positions with x=0 become exactly 0, positions with
// x=1 pass through bit-identically.
std::vector<float> apply_mask(const std::vector<float>& features, const BinaryMask& x);
std::vector<double> apply_mask(const std::vector<double>& features, const BinaryMask& x);

// Raw quadratic form x^T Q x of the solved mask, without penalty terms;
// logged as a per-solve diagnostic.
double attended_energy(const Matrix& q, const BinaryMask& x_opt);

// 8-bit binary PGM (P5), selected=white=255, masked=black=0, row-major.
void render_mask(const BinaryMask& x, int l, int m, const std::string& path);
void render_score_matrix(const BinaryMask& x, const std::string& path);

struct PgmImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;
};

PgmImage read_pgm(const std::string& path);

}  // namespace qattn
