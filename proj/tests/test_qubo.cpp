#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "qattn/qubo.hpp"
#include "test_util.hpp"

using namespace qattn;

TEST_CASE("energy: diagonal-only case") {
    const Matrix q = Matrix::identity(2);
    CHECK(energy(q, BinaryMask{1, 1}) == doctest::Approx(2.0));
}

TEST_CASE("energy: zero vector annihilates the quadratic form") {
    auto g = testutil::rng(11);
    const Matrix q = testutil::random_symmetric(5, g);
    CHECK(energy(q, BinaryMask{0, 0, 0, 0, 0}) == 0.0);
}

TEST_CASE("energy: 2x2 hand-evaluated case") {
    Matrix q(2, 2);
    q.at(0, 0) = 1;
    q.at(0, 1) = 2;
    q.at(1, 0) = 2;
    q.at(1, 1) = 3;
    CHECK(energy(q, BinaryMask{1, 1}) == doctest::Approx(8.0));
}

TEST_CASE("energy: dimension mismatch is an error") {
    const Matrix q = Matrix::identity(3);
    CHECK_THROWS_AS(energy(q, BinaryMask{1, 0}), std::invalid_argument);
}

TEST_CASE("energy: summation form equals the matrix product form") {
    auto g = testutil::rng(42);
    std::uniform_int_distribution<int> size(1, 32);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = size(g);
        const Matrix q = testutil::random_symmetric(n, g);
        const BinaryMask x = testutil::random_mask(n, g);
        const double summed = energy(q, x);
        const double product = testutil::quad_form(q, x);
        CHECK(testutil::close_rel(summed, product, 1e-12));
    }
}

TEST_CASE("cardinality penalty") {
    CHECK(cardinality_penalty(BinaryMask{1, 1, 0}, 2, 1.0) == 0.0);
    CHECK(cardinality_penalty(BinaryMask{1, 1, 1}, 1, 1.0) == doctest::Approx(4.0));
    CHECK(cardinality_penalty(BinaryMask{0, 0, 0}, 100, 1.0) == doctest::Approx(10000.0));
    CHECK_THROWS_AS(cardinality_penalty(BinaryMask{1}, -1, 1.0), std::invalid_argument);
}

TEST_CASE("adhesion penalty") {
    CHECK(adhesion_penalty(BinaryMask{1, 0, 1, 0}, 1.0) == 0.0);
    CHECK(adhesion_penalty(BinaryMask{1, 1, 1}, 1.0) == doctest::Approx(2.0));
    CHECK(adhesion_penalty(BinaryMask{1}, 5.0) == 0.0);
}

TEST_CASE("penalties grow monotonically in their weights") {
    auto g = testutil::rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const BinaryMask x = testutil::random_mask(9, g);
        std::uniform_int_distribution<int> kd(0, 9);
        const int k = kd(g);
        double prev_card = -1.0, prev_adh = -1.0;
        for (double w : {0.0, 0.5, 1.0, 2.0, 10.0}) {
            const double c = cardinality_penalty(x, k, w);
            const double a = adhesion_penalty(x, w);
            CHECK(c >= prev_card);
            CHECK(a >= prev_adh);
            prev_card = c;
            prev_adh = a;
        }
    }
}

TEST_CASE("objective: feasible mask on zero matrix costs nothing") {
    QuboProblem p(Matrix(2, 2), 1.0, 1.0, 1);
    CHECK(attention_objective(p, BinaryMask{1, 0}) == 0.0);
}

TEST_CASE("objective reduces to energy when penalties vanish") {
    QuboProblem p(Matrix::identity(2), 0.0, 0.0, 0);
    CHECK(attention_objective(p, BinaryMask{1, 1}) == doctest::Approx(2.0));
}

TEST_CASE("objective equals the sum of its three parts") {
    auto g = testutil::rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix q = testutil::random_symmetric(6, g);
        QuboProblem p(q, 0.7, 1.3, 3);
        const BinaryMask x = testutil::random_mask(6, g);
        const double combined = attention_objective(p, x);
        const double parts =
            energy(q, x) + cardinality_penalty(x, 3, 0.7) + adhesion_penalty(x, 1.3);
        CHECK(combined == doctest::Approx(parts));
    }
}

TEST_CASE("objective rejects mismatched masks") {
    QuboProblem p(Matrix::identity(3), 1.0, 1.0, 1);
    CHECK_THROWS_AS(attention_objective(p, BinaryMask{1, 0}), std::invalid_argument);
}

TEST_CASE("objective is invariant under symmetric completion") {
    auto g = testutil::rng(63);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        Matrix q(7, 7);
        for (double& v : q.data) v = dist(g);
        const Matrix sym = q.symmetrized();
        const BinaryMask x = testutil::random_mask(7, g);
        QuboProblem p1(q, 1.0, 1.0, 3);
        QuboProblem p2(sym, 1.0, 1.0, 3);
        CHECK(attention_objective(p1, x) == doctest::Approx(attention_objective(p2, x)));
    }
}

TEST_CASE("folding without penalties is the identity transform") {
    auto g = testutil::rng(5);
    const Matrix q = testutil::random_symmetric(4, g);
    const ExplicitQubo eq = to_explicit_qubo(QuboProblem(q, 0.0, 0.0, 2));
    CHECK(eq.offset == 0.0);
    for (size_t i = 0; i < q.data.size(); ++i) CHECK(eq.qprime.data[i] == q.data[i]);
}

TEST_CASE("folding preserves the objective over all masks (n=3 exhaustive)") {
    auto g = testutil::rng(12);
    const Matrix q = testutil::random_symmetric(3, g);
    QuboProblem p(q, 0.8, 1.7, 2);
    const ExplicitQubo eq = to_explicit_qubo(p);
    for (int code = 0; code < 8; ++code) {
        BinaryMask x;
        x.bits = {static_cast<uint8_t>((code >> 2) & 1), static_cast<uint8_t>((code >> 1) & 1),
                  static_cast<uint8_t>(code & 1)};
        CHECK(testutil::close_rel(testutil::quad_form(eq.qprime, x) + eq.offset,
                                  attention_objective(p, x), 1e-9));
    }
}

TEST_CASE("folding preserves the objective on random n=10 instances") {
    auto g = testutil::rng(13);
    const Matrix q = testutil::random_symmetric(10, g);
    QuboProblem p(q, 1.0, 1.0, 4);
    const ExplicitQubo eq = to_explicit_qubo(p);
    for (int trial = 0; trial < 100; ++trial) {
        const BinaryMask x = testutil::random_mask(10, g);
        CHECK(testutil::close_rel(testutil::quad_form(eq.qprime, x) + eq.offset,
                                  attention_objective(p, x), 1e-9));
    }
}

TEST_CASE("folding identity holds exhaustively for every n up to 12") {
    auto g = testutil::rng(99);
    std::uniform_real_distribution<double> lam(0.0, 2.0);
    for (int n = 1; n <= 12; ++n) {
        const Matrix q = testutil::random_symmetric(n, g);
        std::uniform_int_distribution<int> kd(0, n);
        QuboProblem p(q, lam(g), lam(g), kd(g));
        const ExplicitQubo eq = to_explicit_qubo(p);
        BinaryMask x;
        x.bits.resize(n);
        for (uint64_t code = 0; code < (1ULL << n); ++code) {
            for (int i = 0; i < n; ++i) x.bits[i] = static_cast<uint8_t>((code >> i) & 1ULL);
            CHECK(testutil::close_rel(testutil::quad_form(eq.qprime, x) + eq.offset,
                                      attention_objective(p, x), 1e-9));
        }
    }
}

TEST_CASE("explicit qubo text format round-trips losslessly") {
    auto g = testutil::rng(21);
    QuboProblem p(testutil::random_symmetric(6, g), 0.3, 0.9, 2);
    const ExplicitQubo eq = to_explicit_qubo(p);

    std::stringstream ss;
    write_explicit_qubo(ss, eq);
    const ExplicitQubo back = read_explicit_qubo(ss);

    CHECK(back.n() == eq.n());
    CHECK(back.offset == eq.offset);
    for (size_t i = 0; i < eq.qprime.data.size(); ++i)
        CHECK(back.qprime.data[i] == eq.qprime.data[i]);
}

TEST_CASE("explicit qubo reader rejects malformed input") {
    std::stringstream bad_header("x y\n");
    CHECK_THROWS(read_explicit_qubo(bad_header));
    std::stringstream truncated("3 0.0\n1 0 0\n0 1 0\n");
    CHECK_THROWS(read_explicit_qubo(truncated));
    std::stringstream asymmetric("2 0\n1 2\n3 1\n");
    CHECK_THROWS(read_explicit_qubo(asymmetric));
}

TEST_CASE("binary mask validates its elements") {
    CHECK_THROWS_AS(BinaryMask(std::vector<uint8_t>{0, 2}), std::invalid_argument);
    CHECK_THROWS_AS(BinaryMask({0, 3}), std::invalid_argument);
    CHECK(BinaryMask{1, 0, 1}.cardinality() == 2);
}

TEST_CASE("qubo problem validates its fields") {
    CHECK_THROWS_AS(QuboProblem(Matrix(3, 2), 1.0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(QuboProblem(Matrix(2, 2), -1.0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(QuboProblem(Matrix(2, 2), 1.0, 1.0, 3), std::invalid_argument);
}
