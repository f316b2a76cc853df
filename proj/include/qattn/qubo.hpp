#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qattn/matrix.hpp"

namespace qattn {

// Binary decision vector x in {0,1}^n.
struct BinaryMask {
    std::vector<uint8_t> bits;

    BinaryMask() = default;
    explicit BinaryMask(std::vector<uint8_t> b);
    BinaryMask(std::initializer_list<int> b);

    int size() const { return static_cast<int>(bits.size()); }
    int cardinality() const;
};

// Quadratic binary objective with a target-cardinality penalty and a penalty
// on selecting adjacent positions (1-D chain over the flattened index).
struct QuboProblem {
    int n = 0;
    Matrix q;          // symmetric n x n coefficient matrix
    double lambda1 = 0.0;  // cardinality penalty weight
    double lambda2 = 0.0;  // adjacency penalty weight
    int k = 0;             // target cardinality, k <= n

    QuboProblem() = default;
    QuboProblem(Matrix q_, double lambda1_, double lambda2_, int k_);
};

// Single symmetric matrix plus constant offset such that
// x^T qprime x + offset reproduces the three-term objective for every mask.
struct ExplicitQubo {
    Matrix qprime;
    double offset = 0.0;

    int n() const { return qprime.rows; }
};

// x^T Q x evaluated as sum_i q_ii x_i + sum_{i<j} 2 q_ij x_i x_j.
double energy(const Matrix& q, const BinaryMask& x);

// lambda1 * (sum_a x_a - k)^2
double cardinality_penalty(const BinaryMask& x, int k, double lambda1);

// lambda2 * sum_{a=0}^{n-2} x_a x_{a+1}
double adhesion_penalty(const BinaryMask& x, double lambda2);

// energy + cardinality penalty + adhesion penalty
double attention_objective(const QuboProblem& p, const BinaryMask& x);

// Folds both penalties into one matrix using x_a^2 = x_a:
//   Q'_ii = q_ii + lambda1*(1 - 2k)
//   Q'_ij = q_ij + lambda1              (i != j)
//   Q'_{a,a+1}, Q'_{a+1,a} += lambda2/2
//   offset = lambda1 * k^2
ExplicitQubo to_explicit_qubo(const QuboProblem& p);

// Quadratic form of an explicit QUBO including its offset.
double explicit_energy(const ExplicitQubo& q, const BinaryMask& x);

// Plain-text serialization: first line "n offset", then n lines of n
// space-separated coefficients, 17 significant digits (lossless round trip).
void write_explicit_qubo(std::ostream& os, const ExplicitQubo& q);
ExplicitQubo read_explicit_qubo(std::istream& is);
void save_explicit_qubo(const std::string& path, const ExplicitQubo& q);
ExplicitQubo load_explicit_qubo(const std::string& path);

}  // namespace qattn
