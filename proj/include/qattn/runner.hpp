#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qattn/config.hpp"

namespace qattn {

// Command-line overrides applied on top of the config file.
struct CliOverrides {
    std::optional<uint64_t> seed;
    std::optional<std::string> backend;
    std::optional<std::string> output_dir;
};

// Exit codes shared by all subcommands:
//   0 success, 2 input/config error, 3 capability refusal.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitRefused = 3;

int cmd_train(const std::string& config_path, const CliOverrides& ov);

int cmd_solve(const std::string& qubo_path, const SolverConfig& solver, uint64_t seed);

int cmd_noise_eval(const std::string& config_path, const std::vector<double>& intensities,
                   const std::string& checkpoint_path, bool train_inline, const CliOverrides& ov);

int cmd_mask_viz(const std::string& checkpoint_path, const std::string& config_path,
                 bool with_score_matrix, const CliOverrides& ov);

}  // namespace qattn
