#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qattn/qubo.hpp"

namespace qattn {

// Versioned binary model checkpoint: config echo, parameter tensors in fixed
// order (conv1 w/b, conv2 w/b, fc w/b) as 32-bit floats, Adam state, epoch
// counter, and the final block-level mask with its grid shape.
struct Checkpoint {
    std::string config_json;
    int32_t epochs_completed = 0;
    int32_t grid_l = 0;
    int32_t grid_m = 0;
    BinaryMask mask;
    std::vector<std::vector<float>> params;
    int64_t adam_step = 0;
    std::vector<std::vector<float>> adam_m;
    std::vector<std::vector<float>> adam_v;
};

void save_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace qattn
