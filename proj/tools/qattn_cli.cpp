// Experiment driver: train a hard-attention classifier, solve stand-alone
// QUBO files, evaluate noise robustness, and render mask images.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qattn/runner.hpp"

namespace {

std::vector<double> parse_intensity_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"QUBO hard-attention classifier and annealing solvers"};
    app.require_subcommand(1);

    std::string config_path, qubo_path, checkpoint_path, backend, output_dir;
    std::string intensities_csv = "0.0,0.2,0.4";
    uint64_t seed = 0;
    bool seed_set = false, train_inline = false, score_matrix = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
            seed_set = true;
        });
        cmd->add_option("--output", output_dir, "output directory override");
    };

    CLI::App* train = app.add_subcommand("train", "train a model and write run artifacts");
    train->add_option("--config", config_path, "JSON config file")->required();
    train->add_option("--backend", backend, "solver backend override (exact|sa|qa_sim)");
    add_common(train);

    CLI::App* solve = app.add_subcommand("solve", "minimize an explicit QUBO file");
    solve->add_option("qubo_file", qubo_path, "QUBO text file: 'n offset' then n rows")->required();
    qattn::SolverConfig solver_cfg;
    solve->add_option("--backend", solver_cfg.backend, "exact|sa|qa_sim (default sa)");
    solve->add_option("--sweeps", solver_cfg.sweeps, "SA sweeps");
    solve->add_option("--restarts", solver_cfg.restarts, "SA restarts");
    solve->add_option("--t-initial", solver_cfg.t_initial, "SA initial temperature (0 = auto)");
    solve->add_option("--t-final", solver_cfg.t_final, "SA final temperature (0 = auto)");
    solve->add_option("--total-time", solver_cfg.total_time, "qa_sim anneal duration");
    solve->add_option("--steps-per-unit", solver_cfg.steps_per_unit_time, "qa_sim steps per unit time");
    solve->add_option("--shots", solver_cfg.shots, "qa_sim measurement shots");
    uint64_t solve_seed = 1;
    solve->add_option("--seed", solve_seed, "solver seed");

    CLI::App* noise = app.add_subcommand("noise-eval", "evaluate test accuracy under input noise");
    noise->add_option("--config", config_path, "JSON config file")->required();
    noise->add_option("--intensities", intensities_csv,
                      "comma-separated noise standard deviations (default 0.0,0.2,0.4)");
    noise->add_option("--checkpoint", checkpoint_path, "checkpoint to evaluate");
    noise->add_flag("--train-inline", train_inline, "train first instead of loading a checkpoint");
    noise->add_option("--backend", backend, "solver backend override");
    add_common(noise);

    CLI::App* viz = app.add_subcommand("mask-viz", "render the stored mask as PGM images");
    viz->add_option("--checkpoint", checkpoint_path, "checkpoint with the stored mask")->required();
    viz->add_option("--config", config_path, "JSON config file (default: checkpoint echo)");
    viz->add_flag("--score-matrix", score_matrix, "also render the outer-product score matrix");
    add_common(viz);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : qattn::kExitInputError;
    }

    qattn::CliOverrides ov;
    if (seed_set) ov.seed = seed;
    if (!backend.empty()) ov.backend = backend;
    if (!output_dir.empty()) ov.output_dir = output_dir;

    if (train->parsed()) return qattn::cmd_train(config_path, ov);
    if (solve->parsed()) return qattn::cmd_solve(qubo_path, solver_cfg, solve_seed);
    if (noise->parsed()) {
        std::vector<double> intensities;
        try {
            intensities = parse_intensity_list(intensities_csv);
        } catch (const std::exception&) {
            std::cerr << "error: bad --intensities list: " << intensities_csv << "\n";
            return qattn::kExitInputError;
        }
        return qattn::cmd_noise_eval(config_path, intensities, checkpoint_path, train_inline, ov);
    }
    if (viz->parsed()) return qattn::cmd_mask_viz(checkpoint_path, config_path, score_matrix, ov);
    return qattn::kExitInputError;
}
