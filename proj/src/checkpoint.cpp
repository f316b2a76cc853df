#include "qattn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace qattn {

namespace {

constexpr char kMagic[4] = {'Q', 'A', 'T', 'N'};
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& f, T v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& f) {
    T v{};
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!f) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

void put_tensor(std::ofstream& f, const std::vector<float>& t) {
    put<uint64_t>(f, t.size());
    f.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(float)));
}

std::vector<float> get_tensor(std::ifstream& f) {
    const uint64_t n = get<uint64_t>(f);
    std::vector<float> t(n);
    f.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(n * sizeof(float)));
    if (!f) throw std::runtime_error("checkpoint: truncated tensor payload");
    return t;
}

void put_tensor_list(std::ofstream& f, const std::vector<std::vector<float>>& ts) {
    put<uint32_t>(f, static_cast<uint32_t>(ts.size()));
    for (const auto& t : ts) put_tensor(f, t);
}

std::vector<std::vector<float>> get_tensor_list(std::ifstream& f) {
    const uint32_t n = get<uint32_t>(f);
    std::vector<std::vector<float>> ts(n);
    for (auto& t : ts) t = get_tensor(f);
    return ts;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& c) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
    f.write(kMagic, 4);
    put<uint32_t>(f, kVersion);
    put<uint64_t>(f, c.config_json.size());
    f.write(c.config_json.data(), static_cast<std::streamsize>(c.config_json.size()));
    put<int32_t>(f, c.epochs_completed);
    put<int32_t>(f, c.grid_l);
    put<int32_t>(f, c.grid_m);
    put<uint32_t>(f, static_cast<uint32_t>(c.mask.bits.size()));
    f.write(reinterpret_cast<const char*>(c.mask.bits.data()),
            static_cast<std::streamsize>(c.mask.bits.size()));
    put_tensor_list(f, c.params);
    put<int64_t>(f, c.adam_step);
    put_tensor_list(f, c.adam_m);
    put_tensor_list(f, c.adam_v);
    if (!f) throw std::runtime_error("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint: cannot open: " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    const uint32_t version = get<uint32_t>(f);
    if (version != kVersion)
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));

    Checkpoint c;
    const uint64_t json_len = get<uint64_t>(f);
    c.config_json.resize(json_len);
    f.read(c.config_json.data(), static_cast<std::streamsize>(json_len));
    if (!f) throw std::runtime_error("checkpoint: truncated config echo");
    c.epochs_completed = get<int32_t>(f);
    c.grid_l = get<int32_t>(f);
    c.grid_m = get<int32_t>(f);
    const uint32_t mask_len = get<uint32_t>(f);
    c.mask.bits.resize(mask_len);
    f.read(reinterpret_cast<char*>(c.mask.bits.data()), mask_len);
    if (!f) throw std::runtime_error("checkpoint: truncated mask");
    c.params = get_tensor_list(f);
    c.adam_step = get<int64_t>(f);
    c.adam_m = get_tensor_list(f);
    c.adam_v = get_tensor_list(f);
    return c;
}

}  // namespace qattn
