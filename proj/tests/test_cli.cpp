#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "qattn/attention.hpp"
#include "qattn/checkpoint.hpp"
#include "qattn/config.hpp"
#include "qattn/synthdata.hpp"

using namespace qattn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunOutput {
    int exit_code = -1;
    std::string out;
    std::string err;
};

fs::path scratch_root() {
    const fs::path dir = fs::temp_directory_path() / "qattn_cli_tests";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

RunOutput run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path out = scratch_root() / ("stdout." + std::to_string(counter));
    const fs::path err = scratch_root() / ("stderr." + std::to_string(counter));
    ++counter;
    const std::string cmd =
        std::string(QATTN_CLI_PATH) + " " + args + " > " + out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    RunOutput r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

// small mnist-format dataset + config shared by the end-to-end cases
struct CliFixture {
    fs::path dir;
    std::string config_path;
    std::string out_dir;

    explicit CliFixture(const std::string& tag, int epochs = 1) {
        dir = scratch_root() / tag;
        fs::create_directories(dir);
        const ImageBatch train = make_synth_digits(64, 28, 28, 11);
        const ImageBatch test = make_synth_digits(32, 28, 28, 12);
        write_idx_images(train, (dir / "train-images").string());
        write_idx_labels(train, (dir / "train-labels").string());
        write_idx_images(test, (dir / "test-images").string());
        write_idx_labels(test, (dir / "test-labels").string());

        out_dir = (dir / "out").string();
        json cfg;
        cfg["dataset"] = {{"name", "mnist"},
                          {"train_images", (dir / "train-images").string()},
                          {"train_labels", (dir / "train-labels").string()},
                          {"test_images", (dir / "test-images").string()},
                          {"test_labels", (dir / "test-labels").string()},
                          {"train_size", 64},
                          {"test_size", 32}};
        cfg["network"] = {{"epochs", epochs}, {"batch_size", 16}};
        cfg["solver"] = {{"backend", "sa"}, {"sweeps", 60}};
        cfg["seed"] = 5;
        cfg["output_dir"] = out_dir;
        config_path = (dir / "config.json").string();
        std::ofstream(config_path) << cfg.dump(2);
    }
};

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("config defaults mirror the experiment table") {
    const RunConfig cfg = parse_run_config(json::object());
    CHECK(cfg.dataset.name == "mnist");
    CHECK(cfg.network.batch_size == 32);
    CHECK(cfg.network.epochs == 70);
    CHECK(cfg.network.lr == 0.001);
    CHECK(cfg.network.dropout == 0.5);
    CHECK(cfg.network.conv1.kernel == 5);
    CHECK(cfg.network.conv1.stride == 2);
    CHECK(cfg.network.conv1.padding == 2);
    CHECK(cfg.network.fc_in() == 3136);
    CHECK(cfg.attention.lambda1 == 1.0);
    CHECK(cfg.attention.lambda2 == 1.0);
    CHECK(cfg.attention.k == 100);
    CHECK(cfg.solver.backend == "sa");

    const RunConfig cifar = parse_run_config(json{{"dataset", {{"name", "cifar10"}}}});
    CHECK(cifar.network.batch_size == 64);
    CHECK(cifar.network.epochs == 100);
    CHECK(cifar.network.fc_in() == 4096);
}

TEST_CASE("config parser unwraps manifests") {
    json manifest;
    manifest["command"] = "train";
    manifest["config"] = {{"seed", 99}, {"network", {{"epochs", 3}}}};
    const RunConfig cfg = parse_run_config(manifest);
    CHECK(cfg.seed == 99);
    CHECK(cfg.network.epochs == 3);
}

TEST_CASE("config parser rejects bad documents with the field name") {
    auto expect_error = [](const json& doc, const std::string& needle) {
        try {
            parse_run_config(doc);
            FAIL("expected ConfigError for ", needle);
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    expect_error(json{{"solver", {{"backend", "quantum_hype"}}}}, "backend");
    expect_error(json{{"network", {{"dropout", 1.5}}}}, "dropout");
    expect_error(json{{"dataset", {{"name", "imagenet"}}}}, "dataset.name");
    expect_error(json{{"dataset", {{"train_size", -5}}}}, "train_size");
    expect_error(json{{"network", {{"lr", "fast"}}}}, "lr");
    expect_error(json{{"noise", {{"intensity", -0.2}}}}, "intensity");
}

TEST_CASE("config round-trips through its JSON echo") {
    json doc;
    doc["dataset"] = {{"name", "cifar10"}, {"train_batches", {"a.bin"}}, {"test_batches", {"b.bin"}},
                      {"train_size", 128}, {"test_size", 64}};
    doc["network"] = {{"epochs", 7}, {"batch_size", 8}, {"lr", 0.01}, {"dropout", 0.25}};
    doc["attention"] = {{"k", 42}, {"lambda1", 0.5}, {"lambda2", 2.0}, {"cadence", "per_batch"},
                        {"q_mode", "gram_min"}};
    doc["solver"] = {{"backend", "exact"}};
    doc["noise"] = {{"enabled", true}, {"intensity", 0.2}};
    doc["seed"] = 31337;
    doc["output_dir"] = "elsewhere";
    const RunConfig a = parse_run_config(doc);
    const RunConfig b = parse_run_config(run_config_to_json(a));
    CHECK(b.dataset.name == a.dataset.name);
    CHECK(b.dataset.train_batches == a.dataset.train_batches);
    CHECK(b.network.epochs == a.network.epochs);
    CHECK(b.network.lr == a.network.lr);
    CHECK(b.attention.k == a.attention.k);
    CHECK(b.attention.cadence == a.attention.cadence);
    CHECK(b.attention.q_mode == a.attention.q_mode);
    CHECK(b.solver.backend == a.solver.backend);
    CHECK(b.noise.enabled == a.noise.enabled);
    CHECK(b.seed == a.seed);
    CHECK(b.output_dir == a.output_dir);
}

TEST_CASE("sampler factory enforces backend capability limits") {
    SolverConfig cfg;
    cfg.backend = "exact";
    CHECK(make_sampler(cfg, 24)->name() == "exact");
    CHECK_THROWS_AS(make_sampler(cfg, 25), CapabilityError);
    cfg.backend = "qa_sim";
    CHECK(make_sampler(cfg, 16)->name() == "qa_sim");
    CHECK_THROWS_AS(make_sampler(cfg, 17), CapabilityError);
    cfg.backend = "nope";
    CHECK_THROWS_AS(make_sampler(cfg, 4), ConfigError);
}

TEST_CASE("cli train writes the full artifact set") {
    CliFixture fx("train_ok");
    const RunOutput r = run_cli("train --config " + fx.config_path);
    CAPTURE(r.err);
    REQUIRE(r.exit_code == 0);

    const fs::path out(fx.out_dir);
    for (const char* name :
         {"history.csv", "solves.csv", "manifest.json", "checkpoint.bin", "mask_first.pgm",
          "mask_last.pgm"})
        CHECK(fs::exists(out / name));

    const auto history = parse_csv(slurp(out / "history.csv"));
    REQUIRE(history.size() == 2);  // header + one epoch
    CHECK(history[0] ==
          std::vector<std::string>{"epoch", "train_loss", "train_acc", "test_loss", "test_acc"});

    const json manifest = json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["command"] == "train");
    CHECK(manifest["seed"] == 5);
    CHECK(manifest.contains("wall_clock_seconds"));
    CHECK(manifest["config"]["network"]["epochs"] == 1);

    const PgmImage mask = read_pgm((out / "mask_last.pgm").string());
    CHECK(mask.width == 56);
    CHECK(mask.height == 56);

    const Checkpoint ck = load_checkpoint((out / "checkpoint.bin").string());
    CHECK(ck.epochs_completed == 1);
    CHECK(ck.grid_l == 56);
    CHECK(ck.mask.size() == 3136);
    CHECK(ck.params.size() == 6);
}

TEST_CASE("cli train is reproducible and reruns from its manifest") {
    CliFixture fx("train_repro");
    REQUIRE(run_cli("train --config " + fx.config_path).exit_code == 0);
    const std::string first = slurp(fs::path(fx.out_dir) / "history.csv");

    const std::string out2 = (fx.dir / "out2").string();
    REQUIRE(run_cli("train --config " + fx.config_path + " --output " + out2).exit_code == 0);
    CHECK(slurp(fs::path(out2) / "history.csv") == first);

    // manifests carry the full effective config and reproduce the run
    const std::string manifest = (fs::path(fx.out_dir) / "manifest.json").string();
    const std::string out3 = (fx.dir / "out3").string();
    REQUIRE(run_cli("train --config " + manifest + " --output " + out3).exit_code == 0);
    CHECK(slurp(fs::path(out3) / "history.csv") == first);
}

TEST_CASE("cli train fails cleanly on a missing dataset path") {
    CliFixture fx("train_missing");
    fs::remove(fx.dir / "train-images");
    const RunOutput r = run_cli("train --config " + fx.config_path);
    CHECK(r.exit_code == 2);
    CHECK(r.err.find((fx.dir / "train-images").string()) != std::string::npos);
}

TEST_CASE("cli train rejects invalid configs with exit 2") {
    CliFixture fx("train_badcfg");
    json doc = json::parse(slurp(fx.config_path));
    doc["solver"]["backend"] = "warp_drive";
    std::ofstream(fx.config_path) << doc.dump();
    const RunOutput r = run_cli("train --config " + fx.config_path);
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("backend") != std::string::npos);
}

TEST_CASE("cli solve prints the energy and mask bits") {
    const fs::path dir = scratch_root() / "solve";
    fs::create_directories(dir);
    {
        ExplicitQubo q;
        q.qprime = Matrix::identity(2);
        save_explicit_qubo((dir / "id2.txt").string(), q);
    }
    const RunOutput r = run_cli("solve " + (dir / "id2.txt").string() + " --backend exact");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "0 0 0\n");
}

TEST_CASE("cli solve enforces the exact-backend limit with exit 3") {
    const fs::path dir = scratch_root() / "solve_limit";
    fs::create_directories(dir);
    {
        ExplicitQubo q;
        q.qprime = Matrix(25, 25);
        save_explicit_qubo((dir / "big.txt").string(), q);
    }
    const RunOutput r = run_cli("solve " + (dir / "big.txt").string() + " --backend exact");
    CHECK(r.exit_code == 3);
}

TEST_CASE("cli solve rejects malformed files with exit 2") {
    const fs::path dir = scratch_root() / "solve_bad";
    fs::create_directories(dir);
    std::ofstream(dir / "bad.txt") << "2 0\n1 2\n";
    const RunOutput r = run_cli("solve " + (dir / "bad.txt").string());
    CHECK(r.exit_code == 2);
}

TEST_CASE("cli noise-eval evaluates each intensity against the checkpoint") {
    CliFixture fx("noise_eval");
    REQUIRE(run_cli("train --config " + fx.config_path).exit_code == 0);
    const auto history = parse_csv(slurp(fs::path(fx.out_dir) / "history.csv"));
    const RunOutput r = run_cli("noise-eval --config " + fx.config_path);
    REQUIRE(r.exit_code == 0);

    const auto report = parse_csv(slurp(fs::path(fx.out_dir) / "noise_report.csv"));
    REQUIRE(report.size() == 4);  // header + three intensities
    CHECK(report[0] == std::vector<std::string>{"intensity", "test_loss", "test_acc"});
    CHECK(std::stod(report[1][0]) == 0.0);
    CHECK(std::stod(report[2][0]) == 0.2);
    CHECK(std::stod(report[3][0]) == 0.4);

    // the zero-intensity row equals the final training evaluation
    CHECK(std::stod(report[1][1]) == doctest::Approx(std::stod(history.back()[3])).epsilon(1e-9));
    CHECK(std::stod(report[1][2]) == doctest::Approx(std::stod(history.back()[4])).epsilon(1e-9));
}

TEST_CASE("cli noise-eval with an empty intensity list writes only the header") {
    CliFixture fx("noise_empty");
    REQUIRE(run_cli("train --config " + fx.config_path).exit_code == 0);
    const RunOutput r = run_cli("noise-eval --config " + fx.config_path + " --intensities \"\"");
    REQUIRE(r.exit_code == 0);
    CHECK(slurp(fs::path(fx.out_dir) / "noise_report.csv") == "intensity,test_loss,test_acc\n");
}

TEST_CASE("cli noise-eval without a checkpoint exits with 2") {
    CliFixture fx("noise_nockpt");
    const RunOutput r = run_cli("noise-eval --config " + fx.config_path);
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("checkpoint") != std::string::npos);
}

TEST_CASE("cli mask-viz renders the stored mask") {
    CliFixture fx("maskviz");
    REQUIRE(run_cli("train --config " + fx.config_path).exit_code == 0);
    const std::string ck = (fs::path(fx.out_dir) / "checkpoint.bin").string();
    const std::string viz_out = (fx.dir / "viz").string();
    const RunOutput r = run_cli("mask-viz --checkpoint " + ck + " --output " + viz_out);
    REQUIRE(r.exit_code == 0);
    const PgmImage mask = read_pgm((fs::path(viz_out) / "mask.pgm").string());
    CHECK(mask.width == 56);
    CHECK(mask.height == 56);
    CHECK(!fs::exists(fs::path(viz_out) / "score_matrix.pgm"));

    const RunOutput r2 =
        run_cli("mask-viz --checkpoint " + ck + " --output " + viz_out + " --score-matrix");
    REQUIRE(r2.exit_code == 0);
    const PgmImage score = read_pgm((fs::path(viz_out) / "score_matrix.pgm").string());
    CHECK(score.width == 3136);
    CHECK(score.height == 3136);
}

TEST_CASE("cli mask-viz on a missing checkpoint exits with 2") {
    const RunOutput r = run_cli("mask-viz --checkpoint /nonexistent/ck.bin");
    CHECK(r.exit_code == 2);
}
