// Writes deterministic procedurally generated digit datasets in the exact
// file formats the loaders consume: MNIST-style IDX pairs or CIFAR-10-style
// binary batches. Useful when the reference datasets are not available
// locally; the generated sets use the same shapes, ranges and label space.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qattn/synthdata.hpp"

int main(int argc, char** argv) {
    CLI::App app{"deterministic digit dataset generator (IDX / CIFAR-10 binary)"};

    std::string out_dir = "data";
    std::string format = "mnist";
    int train_count = 2500;
    int test_count = 1000;
    uint64_t seed = 7;

    app.add_option("--out", out_dir, "output directory (default data)");
    app.add_option("--format", format, "mnist | cifar10 (default mnist)");
    app.add_option("--train", train_count, "training sample count (default 2500)");
    app.add_option("--test", test_count, "test sample count (default 1000)");
    app.add_option("--seed", seed, "generator seed (default 7)");
    CLI11_PARSE(app, argc, argv);

    namespace fs = std::filesystem;
    try {
        fs::create_directories(out_dir);
        const fs::path dir(out_dir);
        if (format == "mnist") {
            const qattn::ImageBatch train = qattn::make_synth_digits(train_count, 28, 28, seed);
            const qattn::ImageBatch test =
                qattn::make_synth_digits(test_count, 28, 28, seed + 1);
            qattn::write_idx_images(train, (dir / "train-images-idx3-ubyte").string());
            qattn::write_idx_labels(train, (dir / "train-labels-idx1-ubyte").string());
            qattn::write_idx_images(test, (dir / "t10k-images-idx3-ubyte").string());
            qattn::write_idx_labels(test, (dir / "t10k-labels-idx1-ubyte").string());
        } else if (format == "cifar10") {
            const qattn::ImageBatch train = qattn::make_synth_digits_rgb(train_count, 32, 32, seed);
            const qattn::ImageBatch test =
                qattn::make_synth_digits_rgb(test_count, 32, 32, seed + 1);
            qattn::write_cifar_batch(train, (dir / "data_batch_1.bin").string());
            qattn::write_cifar_batch(test, (dir / "test_batch.bin").string());
        } else {
            std::cerr << "error: unknown format '" << format << "'\n";
            return 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::cout << "wrote " << format << " files to " << out_dir << "\n";
    return 0;
}
