#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>

#include "qattn/solvers.hpp"
#include "test_util.hpp"

using namespace qattn;

namespace {

ExplicitQubo from_matrix(const Matrix& m, double offset = 0.0) {
    ExplicitQubo q;
    q.qprime = m;
    q.offset = offset;
    return q;
}

ExplicitQubo random_instance(int n, std::mt19937_64& g, double offset = 0.0) {
    return from_matrix(testutil::random_symmetric(n, g), offset);
}

// two-level Schrodinger integration with RK4 at a fine step, independent of
// the split-step path: H(t) = a(t) * (-X) + b(t) * diag(0, e1)
double two_level_ground_probability(double e1, double total_time, int steps) {
    using cd = std::complex<double>;
    const cd I(0.0, 1.0);
    cd psi[2] = {cd(1.0 / std::sqrt(2.0), 0.0), cd(1.0 / std::sqrt(2.0), 0.0)};
    const double dt = total_time / steps;
    auto deriv = [&](double t, const cd* y, cd* out) {
        const double a = 1.0 - t / total_time;
        const double b = t / total_time;
        // H = [[0, -a], [-a, b*e1]]
        out[0] = -I * (-a * y[1]);
        out[1] = -I * (-a * y[0] + b * e1 * y[1]);
    };
    cd k1[2], k2[2], k3[2], k4[2], tmp[2];
    for (int s = 0; s < steps; ++s) {
        const double t = s * dt;
        deriv(t, psi, k1);
        for (int i = 0; i < 2; ++i) tmp[i] = psi[i] + 0.5 * dt * k1[i];
        deriv(t + 0.5 * dt, tmp, k2);
        for (int i = 0; i < 2; ++i) tmp[i] = psi[i] + 0.5 * dt * k2[i];
        deriv(t + 0.5 * dt, tmp, k3);
        for (int i = 0; i < 2; ++i) tmp[i] = psi[i] + dt * k3[i];
        deriv(t + dt, tmp, k4);
        for (int i = 0; i < 2; ++i)
            psi[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return std::norm(psi[0]);
}

}  // namespace

TEST_CASE("exact: nonnegative diagonal selects nothing") {
    const SolveResult r = solve_exact(from_matrix(Matrix::identity(4)));
    CHECK(r.energy == 0.0);
    for (uint8_t b : r.x_opt.bits) CHECK(b == 0);
}

TEST_CASE("exact: all-negative diagonal selects everything") {
    Matrix m(3, 3);
    for (int i = 0; i < 3; ++i) m.at(i, i) = -1.0;
    const SolveResult r = solve_exact(from_matrix(m));
    CHECK(r.energy == doctest::Approx(-3.0));
    for (uint8_t b : r.x_opt.bits) CHECK(b == 1);
}

TEST_CASE("exact matches an independent enumeration on random instances") {
    auto g = testutil::rng(404);
    for (int trial = 0; trial < 20; ++trial) {
        const ExplicitQubo q = random_instance(10, g, 0.25);
        const SolveResult r = solve_exact(q);
        const testutil::EnumResult oracle = testutil::enumerate_minimum(q);
        CHECK(r.energy == oracle.energy);
        CHECK(r.x_opt.bits == oracle.mask.bits);
    }
}

TEST_CASE("exact refuses oversized problems") {
    CHECK_THROWS_AS(solve_exact(from_matrix(Matrix(25, 25))), CapabilityError);
}

TEST_CASE("exact tie-breaking is total: all-zero matrix yields the all-zero mask") {
    const SolveResult r = solve_exact(from_matrix(Matrix(6, 6)));
    CHECK(r.energy == 0.0);
    for (uint8_t b : r.x_opt.bits) CHECK(b == 0);
}

TEST_CASE("sa finds the trivial minimum of the identity") {
    SaConfig cfg;
    cfg.sweeps = 200;
    const SolveResult r = solve_sa(from_matrix(Matrix::identity(8)), cfg, 3);
    CHECK(r.energy == 0.0);
}

TEST_CASE("sa matches the exact minimum on nearly all seeded n=12 instances") {
    auto g = testutil::rng(1212);
    SaConfig cfg;
    cfg.sweeps = 2000;
    cfg.restarts = 4;
    int matched = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const ExplicitQubo q = random_instance(12, g);
        const SolveResult exact = solve_exact(q);
        const SolveResult sa = solve_sa(q, cfg, 1000 + trial);
        CHECK(sa.energy >= exact.energy - 1e-9);  // never better than the true minimum
        if (testutil::close_rel(sa.energy, exact.energy, 1e-9)) ++matched;
    }
    CHECK(matched >= 95);
}

TEST_CASE("sa is deterministic for a fixed seed") {
    auto g = testutil::rng(55);
    const ExplicitQubo q = random_instance(16, g, -1.5);
    SaConfig cfg;
    cfg.sweeps = 500;
    cfg.restarts = 2;
    const SolveResult a = solve_sa(q, cfg, 777);
    const SolveResult b = solve_sa(q, cfg, 777);
    CHECK(a.x_opt.bits == b.x_opt.bits);
    CHECK(a.energy == b.energy);
    CHECK(a.diagnostics == b.diagnostics);
}

TEST_CASE("sa best-ever energy is non-increasing across sweeps") {
    auto g = testutil::rng(56);
    const ExplicitQubo q = random_instance(20, g);
    SaConfig cfg;
    cfg.sweeps = 300;
    cfg.restarts = 3;
    std::vector<double> trace;
    solve_sa(q, cfg, 9, &trace);
    REQUIRE(trace.size() == 900);
    for (size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
}

TEST_CASE("sa validates its configuration") {
    SaConfig bad;
    bad.t_initial = 1.0;
    bad.t_final = 2.0;
    CHECK_THROWS_AS(solve_sa(from_matrix(Matrix::identity(2)), bad, 1), std::invalid_argument);
}

TEST_CASE("qa_sim: single qubit anneals to its ground state") {
    Matrix m(1, 1);
    m.at(0, 0) = 1.0;
    const AnnealSchedule sched = linear_schedule(20.0, 100);
    const QaSimTrace trace = solve_qa_sim_traced(from_matrix(m), sched, 4000, 21);

    CHECK(trace.result.x_opt.bits == std::vector<uint8_t>{0});
    CHECK(trace.result.energy == 0.0);
    const double freq = trace.sample_counts[0] / 4000.0;
    CHECK(freq >= 0.99);

    // independent two-level oracle
    const double p_oracle = two_level_ground_probability(1.0, 20.0, 200000);
    CHECK(std::abs(freq - p_oracle) < 0.03);
    CHECK(std::abs(trace.probabilities[0] - p_oracle) < 0.02);
}

TEST_CASE("qa_sim: instantaneous quench measures the uniform superposition") {
    auto g = testutil::rng(77);
    const ExplicitQubo q = random_instance(2, g);
    AnnealSchedule sched;
    sched.total_time = 1e-12;
    sched.steps = 1;
    const QaSimTrace trace = solve_qa_sim_traced(q, sched, 10000, 5);
    // 3 sigma multinomial band around 2500 per state
    const double sigma = std::sqrt(10000 * 0.25 * 0.75);
    for (uint32_t c : trace.sample_counts) {
        CHECK(c > 2500 - 3 * sigma);
        CHECK(c < 2500 + 3 * sigma);
    }
}

TEST_CASE("qa_sim matches the exact solver on a slow n=4 anneal") {
    auto g = testutil::rng(4040);
    for (int trial = 0; trial < 5; ++trial) {
        const ExplicitQubo q = random_instance(4, g);
        const SolveResult exact = solve_exact(q);
        const SolveResult qa = solve_qa_sim(q, linear_schedule(20.0, 100), 2000, 31 + trial);
        CHECK(qa.energy == doctest::Approx(exact.energy));
    }
}

TEST_CASE("qa_sim keeps the state vector normalized") {
    auto g = testutil::rng(88);
    const ExplicitQubo q = random_instance(6, g);
    const QaSimTrace trace = solve_qa_sim_traced(q, linear_schedule(10.0, 100), 100, 8);
    CHECK(trace.max_norm_drift <= 1e-8);
}

TEST_CASE("qa_sim sampled ground-state probability grows with anneal time") {
    auto g = testutil::rng(4242);
    // pick an instance whose ground state is clearly nondegenerate
    ExplicitQubo q;
    double gap = 0.0;
    do {
        q = random_instance(4, g);
        const testutil::EnumResult truth = testutil::enumerate_minimum(q);
        double second = 1e300;
        for (uint64_t code = 0; code < 16; ++code) {
            BinaryMask x;
            x.bits.resize(4);
            for (int i = 0; i < 4; ++i) x.bits[i] = static_cast<uint8_t>((code >> i) & 1ULL);
            const double e = testutil::quad_form(q.qprime, x) + q.offset;
            if (e > truth.energy + 1e-12) second = std::min(second, e);
        }
        gap = second - truth.energy;
    } while (gap < 0.5);
    const testutil::EnumResult truth = testutil::enumerate_minimum(q);
    size_t gs = 0;
    for (int i = 0; i < 4; ++i)
        if (truth.mask.bits[i]) gs |= size_t{1} << i;

    const int shots = 10000;
    double prev = -1.0, prev_sigma = 0.0;
    for (double total : {1.0, 5.0, 20.0}) {
        const QaSimTrace trace =
            solve_qa_sim_traced(q, linear_schedule(total, 100), shots, 17);
        const double p = static_cast<double>(trace.sample_counts[gs]) / shots;
        const double sigma = std::sqrt(std::max(p * (1 - p), 1e-6) / shots);
        if (prev >= 0.0) CHECK(p >= prev - 2.0 * std::hypot(sigma, prev_sigma));
        prev = p;
        prev_sigma = sigma;
    }
    CHECK(prev >= 0.5);  // the slowest anneal should dominate
}

TEST_CASE("qa_sim refuses oversized problems and bad schedules") {
    CHECK_THROWS_AS(solve_qa_sim(from_matrix(Matrix(17, 17)), linear_schedule(1.0), 10, 1),
                    CapabilityError);
    AnnealSchedule wavy;
    wavy.total_time = 1.0;
    wavy.steps = 50;
    wavy.a_of_t = [](double t) { return std::cos(20.0 * t); };
    wavy.b_of_t = [](double t) { return t; };
    CHECK_THROWS_AS(solve_qa_sim(from_matrix(Matrix::identity(2)), wavy, 10, 1),
                    std::invalid_argument);
}

TEST_CASE("every backend reports an energy consistent with re-evaluation") {
    auto g = testutil::rng(909);
    const ExplicitQubo q = random_instance(8, g, 2.5);
    const ExactSampler exact;
    const SaSampler sa;
    const QaSimSampler qa(linear_schedule(5.0, 100), 500);
    for (const Sampler* s : {static_cast<const Sampler*>(&exact), static_cast<const Sampler*>(&sa),
                             static_cast<const Sampler*>(&qa)}) {
        const SolveResult r = s->solve(q, 99);
        const double recomputed = testutil::quad_form(q.qprime, r.x_opt) + q.offset;
        CHECK(testutil::close_rel(r.energy, recomputed, 1e-9));
    }
}

TEST_CASE("sampler dispatch matches the free functions") {
    auto g = testutil::rng(910);
    const ExplicitQubo q = random_instance(8, g);

    const ExactSampler exact_sampler;
    CHECK(exact_sampler.solve(q, 1).x_opt.bits == solve_exact(q).x_opt.bits);
    CHECK(exact_sampler.name() == "exact");

    SaConfig cfg;
    cfg.sweeps = 300;
    const SaSampler sa_sampler(cfg);
    CHECK(sa_sampler.solve(q, 42).x_opt.bits == solve_sa(q, cfg, 42).x_opt.bits);
    CHECK(sa_sampler.name() == "sa");

    const QaSimSampler qa_sampler(linear_schedule(2.0, 50), 200);
    CHECK(qa_sampler.solve(q, 7).x_opt.bits ==
          solve_qa_sim(q, linear_schedule(2.0, 50), 200, 7).x_opt.bits);
    CHECK(qa_sampler.name() == "qa_sim");
}
