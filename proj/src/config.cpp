#include "qattn/config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace qattn {

namespace {

using nlohmann::json;

template <typename T>
T field_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: field '" + key + "' has the wrong type");
    }
}

const json& section(const json& j, const std::string& key, const json& empty) {
    if (!j.contains(key)) return empty;
    if (!j.at(key).is_object()) throw ConfigError("config: field '" + key + "' must be an object");
    return j.at(key);
}

}  // namespace

RunConfig parse_run_config(const nlohmann::json& doc_in) {
    static const json empty = json::object();
    const json& doc =
        (doc_in.is_object() && doc_in.contains("config") && doc_in.at("config").is_object())
            ? doc_in.at("config")
            : doc_in;
    if (!doc.is_object()) throw ConfigError("config: document must be a JSON object");

    RunConfig cfg;

    const json& ds = section(doc, "dataset", empty);
    cfg.dataset.name = field_or<std::string>(ds, "name", "mnist");
    if (cfg.dataset.name != "mnist" && cfg.dataset.name != "cifar10")
        throw ConfigError("config: dataset.name must be 'mnist' or 'cifar10'");
    cfg.dataset.train_images = field_or<std::string>(ds, "train_images", "");
    cfg.dataset.train_labels = field_or<std::string>(ds, "train_labels", "");
    cfg.dataset.test_images = field_or<std::string>(ds, "test_images", "");
    cfg.dataset.test_labels = field_or<std::string>(ds, "test_labels", "");
    cfg.dataset.train_batches = field_or<std::vector<std::string>>(ds, "train_batches", {});
    cfg.dataset.test_batches = field_or<std::vector<std::string>>(ds, "test_batches", {});
    cfg.dataset.train_size = field_or<int>(ds, "train_size", 0);
    cfg.dataset.test_size = field_or<int>(ds, "test_size", 0);
    if (cfg.dataset.train_size < 0 || cfg.dataset.test_size < 0)
        throw ConfigError("config: dataset.train_size/test_size must be non-negative");

    const bool mnist = cfg.dataset.name == "mnist";
    cfg.network.input_channels = mnist ? 1 : 3;
    cfg.network.input_h = mnist ? 28 : 32;
    cfg.network.input_w = mnist ? 28 : 32;

    const json& net = section(doc, "network", empty);
    cfg.network.conv1.out_channels = field_or<int>(net, "conv1_channels", 32);
    cfg.network.conv2.out_channels = field_or<int>(net, "conv2_channels", 64);
    cfg.network.conv1.kernel = cfg.network.conv2.kernel = field_or<int>(net, "kernel", 5);
    cfg.network.conv1.stride = cfg.network.conv2.stride = field_or<int>(net, "stride", 2);
    cfg.network.conv1.padding = cfg.network.conv2.padding = field_or<int>(net, "padding", 2);
    cfg.network.dropout = field_or<double>(net, "dropout", 0.5);
    cfg.network.fc_out = field_or<int>(net, "fc_out", 10);
    cfg.network.lr = field_or<double>(net, "lr", 0.001);
    cfg.network.batch_size = field_or<int>(net, "batch_size", mnist ? 32 : 64);
    cfg.network.epochs = field_or<int>(net, "epochs", mnist ? 70 : 100);
    if (cfg.network.dropout < 0.0 || cfg.network.dropout >= 1.0)
        throw ConfigError("config: network.dropout must lie in [0,1)");
    if (cfg.network.lr <= 0.0) throw ConfigError("config: network.lr must be positive");
    if (cfg.network.batch_size < 1) throw ConfigError("config: network.batch_size must be positive");
    if (cfg.network.epochs < 0) throw ConfigError("config: network.epochs must be >= 0");
    if (cfg.network.conv1.out_channels < 1 || cfg.network.conv2.out_channels < 1)
        throw ConfigError("config: network conv channels must be positive");

    const json& attn = section(doc, "attention", empty);
    cfg.attention.lambda1 = field_or<double>(attn, "lambda1", 1.0);
    cfg.attention.lambda2 = field_or<double>(attn, "lambda2", 1.0);
    cfg.attention.k = field_or<int>(attn, "k", 100);
    cfg.attention.cadence = field_or<std::string>(attn, "cadence", "per_epoch");
    cfg.attention.q_mode = field_or<std::string>(attn, "q_mode", "keep_strong");
    cfg.attention.grid_l = field_or<int>(attn, "grid_l", 0);
    cfg.attention.grid_m = field_or<int>(attn, "grid_m", 0);
    cfg.attention.normalize_q = field_or<bool>(attn, "normalize_q", true);
    if (cfg.attention.lambda1 < 0.0 || cfg.attention.lambda2 < 0.0)
        throw ConfigError("config: attention.lambda1/lambda2 must be non-negative");
    if (cfg.attention.k < 0) throw ConfigError("config: attention.k must be non-negative");

    const json& sol = section(doc, "solver", empty);
    cfg.solver.backend = field_or<std::string>(sol, "backend", "sa");
    cfg.solver.sweeps = field_or<int>(sol, "sweeps", 1000);
    cfg.solver.restarts = field_or<int>(sol, "restarts", 1);
    cfg.solver.init = field_or<std::string>(sol, "init", "random");
    cfg.solver.t_initial = field_or<double>(sol, "t_initial", 0.0);
    cfg.solver.t_final = field_or<double>(sol, "t_final", 0.0);
    cfg.solver.total_time = field_or<double>(sol, "total_time", 20.0);
    cfg.solver.steps_per_unit_time = field_or<int>(sol, "steps_per_unit_time", 100);
    cfg.solver.shots = field_or<int>(sol, "shots", 1000);
    if (cfg.solver.backend != "exact" && cfg.solver.backend != "sa" &&
        cfg.solver.backend != "qa_sim")
        throw ConfigError("config: solver.backend must be one of exact, sa, qa_sim (got '" +
                          cfg.solver.backend + "')");
    if (cfg.solver.sweeps < 1 || cfg.solver.restarts < 1)
        throw ConfigError("config: solver.sweeps and solver.restarts must be positive");
    if (cfg.solver.init != "random" && cfg.solver.init != "greedy")
        throw ConfigError("config: solver.init must be 'random' or 'greedy' (got '" +
                          cfg.solver.init + "')");
    if (cfg.solver.shots < 1) throw ConfigError("config: solver.shots must be positive");
    if (cfg.solver.total_time <= 0.0)
        throw ConfigError("config: solver.total_time must be positive");
    if (cfg.solver.steps_per_unit_time < 1)
        throw ConfigError("config: solver.steps_per_unit_time must be positive");

    const json& noise = section(doc, "noise", empty);
    cfg.noise.enabled = field_or<bool>(noise, "enabled", false);
    cfg.noise.intensity = field_or<double>(noise, "intensity", 0.0);
    if (cfg.noise.intensity < 0.0) throw ConfigError("config: noise.intensity must be non-negative");

    cfg.seed = field_or<uint64_t>(doc, "seed", 1);
    cfg.output_dir = field_or<std::string>(doc, "output_dir", "out");
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open file: " + path);
    json doc;
    try {
        f >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("config: invalid JSON in " + path + ": " + e.what());
    }
    return parse_run_config(doc);
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
    json doc;
    doc["dataset"] = {{"name", cfg.dataset.name},
                      {"train_images", cfg.dataset.train_images},
                      {"train_labels", cfg.dataset.train_labels},
                      {"test_images", cfg.dataset.test_images},
                      {"test_labels", cfg.dataset.test_labels},
                      {"train_batches", cfg.dataset.train_batches},
                      {"test_batches", cfg.dataset.test_batches},
                      {"train_size", cfg.dataset.train_size},
                      {"test_size", cfg.dataset.test_size}};
    doc["network"] = {{"conv1_channels", cfg.network.conv1.out_channels},
                      {"conv2_channels", cfg.network.conv2.out_channels},
                      {"kernel", cfg.network.conv1.kernel},
                      {"stride", cfg.network.conv1.stride},
                      {"padding", cfg.network.conv1.padding},
                      {"dropout", cfg.network.dropout},
                      {"fc_out", cfg.network.fc_out},
                      {"lr", cfg.network.lr},
                      {"batch_size", cfg.network.batch_size},
                      {"epochs", cfg.network.epochs}};
    doc["attention"] = {{"lambda1", cfg.attention.lambda1},
                        {"lambda2", cfg.attention.lambda2},
                        {"k", cfg.attention.k},
                        {"cadence", cfg.attention.cadence},
                        {"q_mode", cfg.attention.q_mode},
                        {"grid_l", cfg.attention.grid_l},
                        {"grid_m", cfg.attention.grid_m},
                        {"normalize_q", cfg.attention.normalize_q}};
    doc["solver"] = {{"backend", cfg.solver.backend},
                     {"sweeps", cfg.solver.sweeps},
                     {"restarts", cfg.solver.restarts},
                     {"init", cfg.solver.init},
                     {"t_initial", cfg.solver.t_initial},
                     {"t_final", cfg.solver.t_final},
                     {"total_time", cfg.solver.total_time},
                     {"steps_per_unit_time", cfg.solver.steps_per_unit_time},
                     {"shots", cfg.solver.shots}};
    doc["noise"] = {{"enabled", cfg.noise.enabled}, {"intensity", cfg.noise.intensity}};
    doc["seed"] = cfg.seed;
    doc["output_dir"] = cfg.output_dir;
    return doc;
}

std::unique_ptr<Sampler> make_sampler(const SolverConfig& cfg, int problem_vars) {
    if (cfg.backend == "exact") {
        if (problem_vars > kExactMaxVars)
            throw CapabilityError("solver: exact backend limited to " +
                                  std::to_string(kExactMaxVars) + " variables, problem has " +
                                  std::to_string(problem_vars));
        return std::make_unique<ExactSampler>();
    }
    if (cfg.backend == "sa") {
        SaConfig sa;
        sa.sweeps = cfg.sweeps;
        sa.restarts = cfg.restarts;
        if (cfg.t_initial > 0.0) sa.t_initial = cfg.t_initial;
        if (cfg.t_final > 0.0) sa.t_final = cfg.t_final;
        sa.init = cfg.init == "greedy" ? SaInit::Greedy : SaInit::Random;
        return std::make_unique<SaSampler>(sa);
    }
    if (cfg.backend == "qa_sim") {
        if (problem_vars > kQaSimMaxVars)
            throw CapabilityError("solver: qa_sim backend limited to " +
                                  std::to_string(kQaSimMaxVars) + " variables, problem has " +
                                  std::to_string(problem_vars));
        return std::make_unique<QaSimSampler>(
            linear_schedule(cfg.total_time, cfg.steps_per_unit_time), cfg.shots);
    }
    throw ConfigError("config: unknown solver backend '" + cfg.backend + "'");
}

DatasetPair load_datasets(const DatasetConfig& cfg) {
    DatasetPair pair;
    if (cfg.name == "mnist") {
        for (const auto* p : {&cfg.train_images, &cfg.train_labels, &cfg.test_images,
                              &cfg.test_labels}) {
            if (p->empty()) throw ConfigError("config: dataset path fields must all be set for mnist");
            std::ifstream probe(*p, std::ios::binary);
            if (!probe) throw ConfigError("config: dataset file not found: " + *p);
        }
        pair.train = load_mnist(cfg.train_images, cfg.train_labels);
        pair.test = load_mnist(cfg.test_images, cfg.test_labels);
    } else {
        if (cfg.train_batches.empty() || cfg.test_batches.empty())
            throw ConfigError("config: dataset.train_batches/test_batches must be set for cifar10");
        for (const auto& p : cfg.train_batches) {
            std::ifstream probe(p, std::ios::binary);
            if (!probe) throw ConfigError("config: dataset file not found: " + p);
        }
        for (const auto& p : cfg.test_batches) {
            std::ifstream probe(p, std::ios::binary);
            if (!probe) throw ConfigError("config: dataset file not found: " + p);
        }
        pair.train = load_cifar10(cfg.train_batches);
        pair.test = load_cifar10(cfg.test_batches);
    }
    if (cfg.train_size > 0) {
        if (cfg.train_size > pair.train.count)
            throw ConfigError("config: dataset.train_size exceeds available samples (" +
                              std::to_string(pair.train.count) + ")");
        pair.train = subset(pair.train, cfg.train_size);
    }
    if (cfg.test_size > 0) {
        if (cfg.test_size > pair.test.count)
            throw ConfigError("config: dataset.test_size exceeds available samples (" +
                              std::to_string(pair.test.count) + ")");
        pair.test = subset(pair.test, cfg.test_size);
    }
    pair.train = normalize(pair.train);
    pair.test = normalize(pair.test);
    return pair;
}

}  // namespace qattn
