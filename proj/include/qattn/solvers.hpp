#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qattn/qubo.hpp"

namespace qattn {

// Thrown when a request exceeds a documented backend limit (distinct from
// input errors so the CLI can map it to its own exit code).
struct CapabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolveResult {
    BinaryMask x_opt;
    double energy = 0.0;  // objective value including the constant offset
    std::string solver_name;
    uint64_t seed = 0;
    std::map<std::string, std::string> diagnostics;
};

// Initial state for each annealing restart: independent random bits, or a
// deterministic greedy descent from the empty state (repeatedly flip the most
// improving bit). Greedy starts suit refinement ladders with a low t_initial;
// they make successive solves of slowly drifting problems land on similar
// minimizers instead of hopping between tie-equivalent subsets.
enum class SaInit { Random, Greedy };

struct SaConfig {
    int sweeps = 1000;
    int restarts = 1;
    // unset: t_initial defaults to max|Q'_ij| (1.0 if the matrix is all zero),
    // t_final to 1e-3 * t_initial; the ladder between them is geometric
    std::optional<double> t_initial;
    std::optional<double> t_final;
    SaInit init = SaInit::Random;
};

struct AnnealSchedule {
    double total_time = 20.0;
    int steps = 2000;
    // sampled at step midpoints; empty means the linear default
    // a(t) = 1 - t/T, b(t) = t/T
    std::function<double(double)> a_of_t;
    std::function<double(double)> b_of_t;
};

AnnealSchedule linear_schedule(double total_time, int steps_per_unit_time = 100);

inline constexpr int kExactMaxVars = 24;
inline constexpr int kQaSimMaxVars = 16;

// Exhaustive enumeration over all 2^n masks. Ties broken by the
// lexicographically smallest bit string (index 0 most significant).
SolveResult solve_exact(const ExplicitQubo& q);

// Single-bit-flip Metropolis over a geometric temperature ladder. Returns the
// best state ever seen across all restarts. If best_energy_trace is given it
// receives the best-so-far energy after every sweep of every restart.
SolveResult solve_sa(const ExplicitQubo& q, const SaConfig& cfg, uint64_t seed,
                     std::vector<double>* best_energy_trace = nullptr);

// Transverse-field annealing on a 2^n state vector: start in the uniform
// superposition, evolve under H(t) = a(t) * (-sum_i X_i) + b(t) * H_problem
// by first-order split steps, then measure `shots` samples and keep the
// lowest-energy bit string.
SolveResult solve_qa_sim(const ExplicitQubo& q, const AnnealSchedule& schedule, int shots,
                         uint64_t seed);

struct QaSimTrace {
    SolveResult result;
    std::vector<uint32_t> sample_counts;  // per basis state, size 2^n
    std::vector<double> probabilities;    // |amplitude|^2 before measurement
    double max_norm_drift = 0.0;          // max ||psi|| deviation from 1 over all steps
};

QaSimTrace solve_qa_sim_traced(const ExplicitQubo& q, const AnnealSchedule& schedule, int shots,
                               uint64_t seed);

// Uniform interface the network depends on; backends are interchangeable.
class Sampler {
public:
    virtual ~Sampler() = default;
    virtual std::string name() const = 0;
    virtual SolveResult solve(const ExplicitQubo& q, uint64_t seed) const = 0;
};

class ExactSampler final : public Sampler {
public:
    std::string name() const override { return "exact"; }
    SolveResult solve(const ExplicitQubo& q, uint64_t seed) const override;
};

class SaSampler final : public Sampler {
public:
    explicit SaSampler(SaConfig cfg = {}) : cfg_(cfg) {}
    std::string name() const override { return "sa"; }
    SolveResult solve(const ExplicitQubo& q, uint64_t seed) const override;
    const SaConfig& config() const { return cfg_; }

private:
    SaConfig cfg_;
};

class QaSimSampler final : public Sampler {
public:
    explicit QaSimSampler(AnnealSchedule schedule = {}, int shots = 1000)
        : schedule_(std::move(schedule)), shots_(shots) {}
    std::string name() const override { return "qa_sim"; }
    SolveResult solve(const ExplicitQubo& q, uint64_t seed) const override;

private:
    AnnealSchedule schedule_;
    int shots_;
};

}  // namespace qattn
