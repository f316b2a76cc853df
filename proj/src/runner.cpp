#include "qattn/runner.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

#include <nlohmann/json.hpp>

#include "qattn/attention.hpp"
#include "qattn/checkpoint.hpp"
#include "qattn/network.hpp"
#include "qattn/rng.hpp"

namespace qattn {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

int guarded(const std::function<void()>& body) {
    try {
        body();
        return kExitOk;
    } catch (const CapabilityError& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return kExitRefused;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
}

void apply_overrides(RunConfig& cfg, const CliOverrides& ov) {
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.backend) cfg.solver.backend = *ov.backend;
    if (ov.output_dir) cfg.output_dir = *ov.output_dir;
}

void write_manifest(const RunConfig& cfg, const std::string& command, double wall_seconds) {
    json doc;
    doc["command"] = command;
    doc["seed"] = cfg.seed;
    doc["wall_clock_seconds"] = wall_seconds;
    doc["config"] = run_config_to_json(cfg);
    std::ofstream f(fs::path(cfg.output_dir) / "manifest.json", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write manifest.json in " + cfg.output_dir);
    f << doc.dump(2) << "\n";
}

void write_history_csv(const std::string& path, const TrainingHistory& history) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "epoch,train_loss,train_acc,test_loss,test_acc\n";
    for (const EpochRecord& r : history.epochs)
        f << r.epoch << ',' << num(r.train_loss) << ',' << num(r.train_acc) << ','
          << num(r.test_loss) << ',' << num(r.test_acc) << '\n';
}

void write_solves_csv(const std::string& path, const std::vector<SolveLogEntry>& solves) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "epoch,batch,solver,seed,energy,cardinality,attended_energy\n";
    for (const SolveLogEntry& s : solves)
        f << s.epoch << ',' << s.batch << ',' << s.solver << ',' << s.seed << ',' << num(s.energy)
          << ',' << s.cardinality << ',' << num(s.attended_energy) << '\n';
}

Model<float> model_from_checkpoint(const RunConfig& cfg, const Checkpoint& ck) {
    Model<float> model = make_model<float>(cfg.network, 0);
    auto params = model.params();
    if (ck.params.size() != params.size())
        throw std::runtime_error("checkpoint: parameter tensor count does not match the config");
    for (size_t i = 0; i < params.size(); ++i) {
        if (ck.params[i].size() != params[i]->size())
            throw std::runtime_error("checkpoint: parameter tensor " + std::to_string(i) +
                                     " has size " + std::to_string(ck.params[i].size()) +
                                     ", config implies " + std::to_string(params[i]->size()));
        *params[i] = ck.params[i];
    }
    return model;
}

struct TrainedArtifacts {
    TrainResult result;
    AttentionGrid grid;
    RunConfig cfg;
};

TrainedArtifacts run_training(RunConfig cfg) {
    DatasetPair data = load_datasets(cfg.dataset);
    if (cfg.noise.enabled && cfg.noise.intensity > 0.0) {
        data.train = add_noise(data.train, cfg.noise.intensity, derive_seed(cfg.seed, "noise_train"));
        data.test = add_noise(data.test, cfg.noise.intensity, derive_seed(cfg.seed, "noise_test"));
    }

    TrainOptions opt;
    opt.net = cfg.network;
    opt.attention = cfg.attention;
    opt.seed = cfg.seed;

    const AttentionGrid grid = resolve_attention_grid(opt.net.fc_in(), opt.attention);
    std::unique_ptr<Sampler> sampler = make_sampler(cfg.solver, grid.vars());

    TrainedArtifacts out{train(opt, data.train, data.test, *sampler), grid, std::move(cfg)};
    return out;
}

void write_training_artifacts(const TrainedArtifacts& art, double wall_seconds) {
    const RunConfig& cfg = art.cfg;
    fs::create_directories(cfg.output_dir);
    const fs::path dir(cfg.output_dir);

    write_history_csv((dir / "history.csv").string(), art.result.history);
    write_solves_csv((dir / "solves.csv").string(), art.result.solves);
    render_mask(art.result.first_mask, art.grid.l, art.grid.m, (dir / "mask_first.pgm").string());
    render_mask(art.result.mask, art.grid.l, art.grid.m, (dir / "mask_last.pgm").string());

    Checkpoint ck;
    ck.config_json = run_config_to_json(cfg).dump();
    ck.epochs_completed = art.result.epochs_completed;
    ck.grid_l = art.grid.l;
    ck.grid_m = art.grid.m;
    ck.mask = art.result.mask;
    Model<float> model = art.result.model;
    for (auto* p : model.params()) ck.params.push_back(*p);
    ck.adam_step = art.result.adam.step;
    ck.adam_m = art.result.adam.m;
    ck.adam_v = art.result.adam.v;
    save_checkpoint((dir / "checkpoint.bin").string(), ck);

    write_manifest(cfg, "train", wall_seconds);
}

}  // namespace

int cmd_train(const std::string& config_path, const CliOverrides& ov) {
    return guarded([&] {
        const auto t0 = std::chrono::steady_clock::now();
        RunConfig cfg = load_run_config(config_path);
        apply_overrides(cfg, ov);
        TrainedArtifacts art = run_training(cfg);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_training_artifacts(art, secs);
        const auto& eps = art.result.history.epochs;
        if (!eps.empty()) {
            const EpochRecord& last = eps.back();
            std::cout << "trained " << eps.size() << " epochs; final test_acc=" << num(last.test_acc)
                      << " test_loss=" << num(last.test_loss) << "\n";
        }
        std::cout << "artifacts written to " << cfg.output_dir << "\n";
    });
}

int cmd_solve(const std::string& qubo_path, const SolverConfig& solver, uint64_t seed) {
    return guarded([&] {
        const ExplicitQubo q = load_explicit_qubo(qubo_path);
        std::unique_ptr<Sampler> sampler = make_sampler(solver, q.n());
        const SolveResult r = sampler->solve(q, seed);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", r.energy);
        std::cout << buf;
        for (uint8_t b : r.x_opt.bits) std::cout << ' ' << int(b);
        std::cout << "\n";
    });
}

int cmd_noise_eval(const std::string& config_path, const std::vector<double>& intensities,
                   const std::string& checkpoint_path, bool train_inline, const CliOverrides& ov) {
    return guarded([&] {
        const auto t0 = std::chrono::steady_clock::now();
        RunConfig cfg = load_run_config(config_path);
        apply_overrides(cfg, ov);
        fs::create_directories(cfg.output_dir);

        Model<float> model;
        BinaryMask mask;
        AttentionGrid grid;
        if (train_inline) {
            TrainedArtifacts art = run_training(cfg);
            model = art.result.model;
            mask = art.result.mask;
            grid = art.grid;
        } else {
            const std::string ck_path = checkpoint_path.empty()
                                            ? (fs::path(cfg.output_dir) / "checkpoint.bin").string()
                                            : checkpoint_path;
            if (!fs::exists(ck_path))
                throw std::runtime_error("no checkpoint at " + ck_path +
                                         " (train first or pass --train-inline)");
            const Checkpoint ck = load_checkpoint(ck_path);
            model = model_from_checkpoint(cfg, ck);
            mask = ck.mask;
            grid = resolve_attention_grid(cfg.network.fc_in(), cfg.attention);
            if (mask.size() != grid.vars())
                throw std::runtime_error("checkpoint mask length does not match the config grid");
        }
        const std::vector<uint8_t> position_mask = expand_block_mask(mask, grid);

        DatasetPair data = load_datasets(cfg.dataset);
        std::ofstream f(fs::path(cfg.output_dir) / "noise_report.csv", std::ios::binary);
        if (!f) throw std::runtime_error("cannot write noise_report.csv in " + cfg.output_dir);
        f << "intensity,test_loss,test_acc\n";
        for (size_t i = 0; i < intensities.size(); ++i) {
            const double intensity = intensities[i];
            const ImageBatch noisy =
                add_noise(data.test, intensity, derive_seed(cfg.seed, "noise_eval", i));
            const EvalResult ev = evaluate(model, noisy, position_mask, cfg.network.batch_size);
            f << num(intensity) << ',' << num(ev.loss) << ',' << num(ev.accuracy) << '\n';
            std::cout << "intensity " << num(intensity) << ": test_loss=" << num(ev.loss)
                      << " test_acc=" << num(ev.accuracy) << "\n";
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_manifest(cfg, "noise-eval", secs);
    });
}

int cmd_mask_viz(const std::string& checkpoint_path, const std::string& config_path,
                 bool with_score_matrix, const CliOverrides& ov) {
    return guarded([&] {
        const auto t0 = std::chrono::steady_clock::now();
        const Checkpoint ck = load_checkpoint(checkpoint_path);
        RunConfig cfg;
        if (!config_path.empty()) {
            cfg = load_run_config(config_path);
        } else {
            cfg = parse_run_config(json::parse(ck.config_json));
        }
        apply_overrides(cfg, ov);
        if (ck.mask.size() == 0) throw std::runtime_error("checkpoint has no stored mask");
        if (ck.mask.size() != ck.grid_l * ck.grid_m)
            throw std::runtime_error("checkpoint mask length does not match its grid");

        fs::create_directories(cfg.output_dir);
        const fs::path dir(cfg.output_dir);
        render_mask(ck.mask, ck.grid_l, ck.grid_m, (dir / "mask.pgm").string());
        std::cout << "wrote " << (dir / "mask.pgm").string() << " (" << ck.grid_l << "x"
                  << ck.grid_m << ")\n";
        if (with_score_matrix) {
            render_score_matrix(ck.mask, (dir / "score_matrix.pgm").string());
            std::cout << "wrote " << (dir / "score_matrix.pgm").string() << "\n";
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_manifest(cfg, "mask-viz", secs);
    });
}

}  // namespace qattn
