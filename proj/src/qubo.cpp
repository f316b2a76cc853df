#include "qattn/qubo.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qattn {

BinaryMask::BinaryMask(std::vector<uint8_t> b) : bits(std::move(b)) {
    for (uint8_t v : bits)
        if (v > 1) throw std::invalid_argument("BinaryMask: elements must be 0 or 1");
}

BinaryMask::BinaryMask(std::initializer_list<int> b) {
    bits.reserve(b.size());
    for (int v : b) {
        if (v != 0 && v != 1) throw std::invalid_argument("BinaryMask: elements must be 0 or 1");
        bits.push_back(static_cast<uint8_t>(v));
    }
}

int BinaryMask::cardinality() const {
    int c = 0;
    for (uint8_t v : bits) c += v;
    return c;
}

QuboProblem::QuboProblem(Matrix q_, double lambda1_, double lambda2_, int k_)
    : n(q_.rows), q(std::move(q_)), lambda1(lambda1_), lambda2(lambda2_), k(k_) {
    if (!q.square()) throw std::invalid_argument("QuboProblem: q must be square");
    if (n < 1) throw std::invalid_argument("QuboProblem: n must be >= 1");
    if (k < 0 || k > n) throw std::invalid_argument("QuboProblem: require 0 <= k <= n");
    if (lambda1 < 0.0 || lambda2 < 0.0)
        throw std::invalid_argument("QuboProblem: penalty weights must be non-negative");
}

double energy(const Matrix& q, const BinaryMask& x) {
    if (!q.square() || q.rows != x.size())
        throw std::invalid_argument("energy: dimension mismatch between q and mask");
    const int n = q.rows;
    // each unordered pair contributes q_ij + q_ji, which equals 2*q_ij on
    // symmetric input and makes the value invariant under symmetric completion
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
        if (!x.bits[i]) continue;
        e += q.at(i, i);
        for (int j = i + 1; j < n; ++j)
            if (x.bits[j]) e += q.at(i, j) + q.at(j, i);
    }
    return e;
}

double cardinality_penalty(const BinaryMask& x, int k, double lambda1) {
    if (k < 0) throw std::invalid_argument("cardinality_penalty: k must be >= 0");
    const double d = static_cast<double>(x.cardinality()) - static_cast<double>(k);
    return lambda1 * d * d;
}

double adhesion_penalty(const BinaryMask& x, double lambda2) {
    if (x.size() < 1) throw std::invalid_argument("adhesion_penalty: empty mask");
    double pairs = 0.0;
    for (int a = 0; a + 1 < x.size(); ++a)
        if (x.bits[a] && x.bits[a + 1]) pairs += 1.0;
    return lambda2 * pairs;
}

double attention_objective(const QuboProblem& p, const BinaryMask& x) {
    if (x.size() != p.n)
        throw std::invalid_argument("attention_objective: mask length does not match problem size");
    return energy(p.q, x) + cardinality_penalty(x, p.k, p.lambda1) + adhesion_penalty(x, p.lambda2);
}

ExplicitQubo to_explicit_qubo(const QuboProblem& p) {
    ExplicitQubo out;
    out.qprime = p.q;
    const int n = p.n;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j)
                out.qprime.at(i, i) += p.lambda1 * (1.0 - 2.0 * p.k);
            else
                out.qprime.at(i, j) += p.lambda1;
        }
    }
    // adjacency term split across both triangles to keep the matrix symmetric
    for (int a = 0; a + 1 < n; ++a) {
        out.qprime.at(a, a + 1) += p.lambda2 / 2.0;
        out.qprime.at(a + 1, a) += p.lambda2 / 2.0;
    }
    out.offset = p.lambda1 * static_cast<double>(p.k) * static_cast<double>(p.k);
    return out;
}

double explicit_energy(const ExplicitQubo& q, const BinaryMask& x) {
    return energy(q.qprime, x) + q.offset;
}

void write_explicit_qubo(std::ostream& os, const ExplicitQubo& q) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", q.offset);
    os << q.n() << ' ' << buf << '\n';
    for (int i = 0; i < q.n(); ++i) {
        for (int j = 0; j < q.n(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", q.qprime.at(i, j));
            os << buf << (j + 1 == q.n() ? '\n' : ' ');
        }
    }
}

ExplicitQubo read_explicit_qubo(std::istream& is) {
    int n = 0;
    double offset = 0.0;
    if (!(is >> n >> offset)) throw std::runtime_error("explicit qubo: malformed header line");
    if (n < 1) throw std::runtime_error("explicit qubo: n must be >= 1");
    ExplicitQubo q;
    q.offset = offset;
    q.qprime = Matrix(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (!(is >> q.qprime.at(i, j)))
                throw std::runtime_error("explicit qubo: truncated coefficient matrix");
    if (!q.qprime.is_symmetric(0.0))
        throw std::runtime_error("explicit qubo: coefficient matrix is not symmetric");
    return q;
}

void save_explicit_qubo(const std::string& path, const ExplicitQubo& q) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("explicit qubo: cannot open for writing: " + path);
    write_explicit_qubo(f, q);
}

ExplicitQubo load_explicit_qubo(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("explicit qubo: cannot open: " + path);
    return read_explicit_qubo(f);
}

}  // namespace qattn
