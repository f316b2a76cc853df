#include "qattn/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

namespace qattn {

namespace {

// Canonical quadratic-form evaluation used to report final energies; every
// backend recomputes its answer through this path so reported energies are
// consistent with an independent re-evaluation of x_opt.
double final_energy(const ExplicitQubo& q, const BinaryMask& x) { return explicit_energy(q, x); }

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

AnnealSchedule linear_schedule(double total_time, int steps_per_unit_time) {
    AnnealSchedule s;
    s.total_time = total_time;
    s.steps = std::max(1, static_cast<int>(std::lround(total_time * steps_per_unit_time)));
    return s;
}

SolveResult solve_exact(const ExplicitQubo& q) {
    const int n = q.n();
    if (n < 1) throw std::invalid_argument("solve_exact: empty problem");
    if (n > kExactMaxVars)
        throw CapabilityError("solve_exact: n=" + std::to_string(n) + " exceeds the enumeration limit of " +
                              std::to_string(kExactMaxVars));

    const uint64_t total = 1ULL << n;
    const Matrix& m = q.qprime;

    // codes are scanned in increasing order with x_0 as the most significant
    // bit, so keeping only strict improvements yields the lexicographically
    // smallest minimizer
    double best = 0.0;
    uint64_t best_code = 0;
    bool have = false;
    std::vector<uint8_t> bits(n);
    for (uint64_t code = 0; code < total; ++code) {
        for (int i = 0; i < n; ++i) bits[i] = static_cast<uint8_t>((code >> (n - 1 - i)) & 1ULL);
        double e = 0.0;
        for (int i = 0; i < n; ++i) {
            if (!bits[i]) continue;
            e += m.at(i, i);
            for (int j = i + 1; j < n; ++j)
                if (bits[j]) e += 2.0 * m.at(i, j);
        }
        if (!have || e < best) {
            best = e;
            best_code = code;
            have = true;
        }
    }

    SolveResult r;
    r.x_opt.bits.resize(n);
    for (int i = 0; i < n; ++i)
        r.x_opt.bits[i] = static_cast<uint8_t>((best_code >> (n - 1 - i)) & 1ULL);
    r.energy = final_energy(q, r.x_opt);
    r.solver_name = "exact";
    r.diagnostics["states_enumerated"] = std::to_string(total);
    return r;
}

SolveResult solve_sa(const ExplicitQubo& q, const SaConfig& cfg, uint64_t seed,
                     std::vector<double>* best_energy_trace) {
    const int n = q.n();
    if (n < 1) throw std::invalid_argument("solve_sa: empty problem");
    if (cfg.sweeps < 1 || cfg.restarts < 1)
        throw std::invalid_argument("solve_sa: sweeps and restarts must be positive");

    const Matrix& m = q.qprime;
    double t_init = cfg.t_initial.value_or(m.max_abs());
    if (t_init <= 0.0) t_init = 1.0;
    double t_final = cfg.t_final.value_or(1e-3 * t_init);
    if (!(t_final > 0.0) || !(t_final < t_init))
        throw std::invalid_argument("solve_sa: require 0 < t_final < t_initial");
    const double ratio = t_final / t_init;

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<uint8_t> x(n), best_bits(n, 0);
    std::vector<double> field(n);  // field[i] = sum_{j != i} Q'_ij x_j
    double best_quad = 0.0;
    bool have_best = false;
    uint64_t accepted = 0;

    if (best_energy_trace) {
        best_energy_trace->clear();
        best_energy_trace->reserve(static_cast<size_t>(cfg.sweeps) * cfg.restarts);
    }

    for (int restart = 0; restart < cfg.restarts; ++restart) {
        // greedy init applies to the first restart; extra restarts stay random
        // so they still diversify the search
        if (cfg.init == SaInit::Greedy && restart == 0) {
            std::fill(x.begin(), x.end(), uint8_t{0});
            std::fill(field.begin(), field.end(), 0.0);
            for (;;) {
                int best_i = -1;
                double best_delta = -1e-12;
                for (int i = 0; i < n; ++i) {
                    const double d = (x[i] ? -1.0 : 1.0) * (m.at(i, i) + 2.0 * field[i]);
                    if (d < best_delta) {
                        best_delta = d;
                        best_i = i;
                    }
                }
                if (best_i < 0) break;
                x[best_i] ^= 1u;
                const double c = x[best_i] ? 1.0 : -1.0;
                const double* row = &m.data[static_cast<size_t>(best_i) * n];
                for (int j = 0; j < n; ++j) field[j] += c * row[j];
                field[best_i] -= c * m.at(best_i, best_i);
            }
        } else {
            for (int i = 0; i < n; ++i) x[i] = static_cast<uint8_t>(rng() & 1ULL);
            for (int i = 0; i < n; ++i) {
                double s = 0.0;
                for (int j = 0; j < n; ++j)
                    if (j != i && x[j]) s += m.at(i, j);
                field[i] = s;
            }
        }
        BinaryMask start;
        start.bits = x;
        double cur = energy(m, start);

        if (!have_best || cur < best_quad) {
            best_quad = cur;
            best_bits = x;
            have_best = true;
        }

        for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
            const double frac = cfg.sweeps == 1 ? 0.0 : static_cast<double>(sweep) / (cfg.sweeps - 1);
            const double temp = t_init * std::pow(ratio, frac);
            for (int step = 0; step < n; ++step) {
                const int i = pick(rng);
                const double sign = x[i] ? -1.0 : 1.0;
                const double delta = sign * (m.at(i, i) + 2.0 * field[i]);
                if (delta <= 0.0 || unit(rng) < std::exp(-delta / temp)) {
                    x[i] ^= 1u;
                    cur += delta;
                    const double c = x[i] ? 1.0 : -1.0;
                    const double* row = &m.data[static_cast<size_t>(i) * n];
                    for (int j = 0; j < n; ++j) field[j] += c * row[j];
                    field[i] -= c * m.at(i, i);  // field excludes the diagonal
                    ++accepted;
                    if (cur < best_quad) {
                        best_quad = cur;
                        best_bits = x;
                    }
                }
            }
            if (best_energy_trace) best_energy_trace->push_back(best_quad + q.offset);
        }
    }

    SolveResult r;
    r.x_opt.bits = best_bits;
    r.energy = final_energy(q, r.x_opt);
    r.solver_name = "sa";
    r.seed = seed;
    r.diagnostics["sweeps"] = std::to_string(cfg.sweeps);
    r.diagnostics["restarts"] = std::to_string(cfg.restarts);
    r.diagnostics["t_initial"] = fmt(t_init);
    r.diagnostics["t_final"] = fmt(t_final);
    r.diagnostics["accepted_flips"] = std::to_string(accepted);
    return r;
}

namespace {

struct ScheduleSamples {
    std::vector<double> a, b;
    double dt;
};

ScheduleSamples sample_schedule(const AnnealSchedule& s) {
    if (s.steps < 1) throw std::invalid_argument("anneal schedule: steps must be positive");
    if (!(s.total_time > 0.0)) throw std::invalid_argument("anneal schedule: total_time must be positive");
    const double total = s.total_time;
    auto a_fn = s.a_of_t ? s.a_of_t : [total](double t) { return 1.0 - t / total; };
    auto b_fn = s.b_of_t ? s.b_of_t : [total](double t) { return t / total; };

    ScheduleSamples out;
    out.dt = total / s.steps;
    out.a.resize(s.steps);
    out.b.resize(s.steps);
    for (int k = 0; k < s.steps; ++k) {
        const double t_mid = (k + 0.5) * out.dt;
        out.a[k] = a_fn(t_mid);
        out.b[k] = b_fn(t_mid);
    }
    for (int k = 1; k < s.steps; ++k) {
        if (out.a[k] > out.a[k - 1] + 1e-12 || out.b[k] < out.b[k - 1] - 1e-12)
            throw std::invalid_argument(
                "anneal schedule: a(t) must be non-increasing and b(t) non-decreasing");
    }
    return out;
}

}  // namespace

QaSimTrace solve_qa_sim_traced(const ExplicitQubo& q, const AnnealSchedule& schedule, int shots,
                               uint64_t seed) {
    const int n = q.n();
    if (n < 1) throw std::invalid_argument("solve_qa_sim: empty problem");
    if (n > kQaSimMaxVars)
        throw CapabilityError("solve_qa_sim: n=" + std::to_string(n) +
                              " exceeds the state-vector limit of " + std::to_string(kQaSimMaxVars));
    if (shots < 1) throw std::invalid_argument("solve_qa_sim: shots must be positive");

    const ScheduleSamples sched = sample_schedule(schedule);
    const size_t dim = size_t{1} << n;
    const Matrix& m = q.qprime;

    // diagonal of the problem Hamiltonian in the computational basis,
    // bit i of the index holding variable x_i
    std::vector<double> diag(dim, 0.0);
    for (size_t z = 0; z < dim; ++z) {
        double e = 0.0;
        for (int i = 0; i < n; ++i) {
            if (!((z >> i) & 1u)) continue;
            e += m.at(i, i);
            for (int j = i + 1; j < n; ++j)
                if ((z >> j) & 1u) e += 2.0 * m.at(i, j);
        }
        diag[z] = e;
    }

    // uniform superposition: ground state of -sum_i X_i
    std::vector<std::complex<double>> psi(dim, std::complex<double>(1.0 / std::sqrt(double(dim)), 0.0));

    double max_drift = 0.0;
    for (size_t k = 0; k < sched.b.size(); ++k) {
        // diagonal phase from the problem term
        const double bphase = sched.b[k] * sched.dt;
        for (size_t z = 0; z < dim; ++z) {
            const double ang = -bphase * diag[z];
            psi[z] *= std::complex<double>(std::cos(ang), std::sin(ang));
        }
        // transverse term: exp(-i * a * (-X_i) * dt) = exp(+i * a * dt * X_i) per qubit
        const double theta = sched.a[k] * sched.dt;
        const double c = std::cos(theta);
        const std::complex<double> is(0.0, std::sin(theta));
        for (int qb = 0; qb < n; ++qb) {
            const size_t stride = size_t{1} << qb;
            for (size_t base = 0; base < dim; base += 2 * stride) {
                for (size_t off = 0; off < stride; ++off) {
                    const size_t z0 = base + off;
                    const size_t z1 = z0 + stride;
                    const std::complex<double> p0 = psi[z0];
                    const std::complex<double> p1 = psi[z1];
                    psi[z0] = c * p0 + is * p1;
                    psi[z1] = is * p0 + c * p1;
                }
            }
        }
        double norm2 = 0.0;
        for (const auto& amp : psi) norm2 += std::norm(amp);
        max_drift = std::max(max_drift, std::abs(std::sqrt(norm2) - 1.0));
    }

    // measurement
    std::vector<double> probs(dim);
    double total_p = 0.0;
    for (size_t z = 0; z < dim; ++z) {
        probs[z] = std::norm(psi[z]);
        total_p += probs[z];
    }
    std::vector<double> cdf(dim);
    double acc = 0.0;
    for (size_t z = 0; z < dim; ++z) {
        acc += probs[z] / total_p;
        cdf[z] = acc;
    }
    cdf[dim - 1] = 1.0;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<uint32_t> counts(dim, 0);
    bool have = false;
    size_t best_z = 0;
    for (int s = 0; s < shots; ++s) {
        const double u = unit(rng);
        const size_t z = std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
        ++counts[z];
        if (!have || diag[z] < diag[best_z] || (diag[z] == diag[best_z] && z < best_z)) {
            best_z = z;
            have = true;
        }
    }

    QaSimTrace trace;
    trace.sample_counts = std::move(counts);
    trace.probabilities = std::move(probs);
    trace.max_norm_drift = max_drift;

    SolveResult& r = trace.result;
    r.x_opt.bits.resize(n);
    for (int i = 0; i < n; ++i) r.x_opt.bits[i] = static_cast<uint8_t>((best_z >> i) & 1u);
    r.energy = final_energy(q, r.x_opt);
    r.solver_name = "qa_sim";
    r.seed = seed;
    r.diagnostics["shots"] = std::to_string(shots);
    r.diagnostics["steps"] = std::to_string(schedule.steps);
    r.diagnostics["total_time"] = fmt(schedule.total_time);
    r.diagnostics["max_norm_drift"] = fmt(max_drift);
    r.diagnostics["x_opt_count"] = std::to_string(trace.sample_counts[best_z]);
    return trace;
}

SolveResult solve_qa_sim(const ExplicitQubo& q, const AnnealSchedule& schedule, int shots,
                         uint64_t seed) {
    return solve_qa_sim_traced(q, schedule, shots, seed).result;
}

SolveResult ExactSampler::solve(const ExplicitQubo& q, uint64_t seed) const {
    SolveResult r = solve_exact(q);
    r.seed = seed;
    return r;
}

SolveResult SaSampler::solve(const ExplicitQubo& q, uint64_t seed) const {
    return solve_sa(q, cfg_, seed);
}

SolveResult QaSimSampler::solve(const ExplicitQubo& q, uint64_t seed) const {
    return solve_qa_sim(q, schedule_, shots_, seed);
}

}  // namespace qattn
