#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qattn/ingest.hpp"
#include "qattn/network.hpp"
#include "qattn/solvers.hpp"

#include <nlohmann/json_fwd.hpp>

namespace qattn {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DatasetConfig {
    std::string name = "mnist";  // mnist | cifar10
    std::string train_images, train_labels, test_images, test_labels;  // mnist paths
    std::vector<std::string> train_batches, test_batches;              // cifar10 paths
    int train_size = 0;  // 0 = all available
    int test_size = 0;
};

struct SolverConfig {
    std::string backend = "sa";  // exact | sa | qa_sim
    int sweeps = 1000;
    int restarts = 1;
    std::string init = "random";  // random | greedy (SA start state)
    double t_initial = 0.0;  // 0 = derive from max|Q'|
    double t_final = 0.0;    // 0 = 1e-3 * t_initial
    double total_time = 20.0;
    int steps_per_unit_time = 100;
    int shots = 1000;
};

struct NoiseConfig {
    bool enabled = false;
    double intensity = 0.0;
};

struct RunConfig {
    DatasetConfig dataset;
    NetworkConfig network;
    AttentionSettings attention;
    SolverConfig solver;
    NoiseConfig noise;
    uint64_t seed = 1;
    std::string output_dir = "out";
};

// Parses a config document, filling defaults per dataset (batch 32 and epochs
// 70 for mnist, batch 64 and epochs 100 for cifar10; lambda1=lambda2=1.0,
// k=100, lr=0.001, dropout 0.5). A manifest document (object with a "config"
// member) is accepted and unwrapped, so runs can be reproduced from their
// manifests. Throws ConfigError naming the offending field.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);
nlohmann::json run_config_to_json(const RunConfig& cfg);

// Validates solver/back-end consistency (unknown backend, state-vector limit
// for qa_sim) and returns the sampler. problem_vars is the block count the
// training path will solve over.
std::unique_ptr<Sampler> make_sampler(const SolverConfig& cfg, int problem_vars);

// Loads, subsets and normalizes the configured dataset pair.
struct DatasetPair {
    ImageBatch train;
    ImageBatch test;
};
DatasetPair load_datasets(const DatasetConfig& cfg);

}  // namespace qattn
