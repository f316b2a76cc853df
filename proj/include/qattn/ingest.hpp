#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qattn/matrix.hpp"

namespace qattn {

struct IngestError : std::runtime_error {
    enum class Kind {
        BadMagic,
        Truncated,
        CountMismatch,
        FormatError,
        LabelRange,
        EmptyDataset,
        BadArgument,
    };
    Kind kind;
    IngestError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// Batch of images in NCHW layout. Raw loads hold byte values [0,255];
// normalize() maps them to [-1,1].
struct ImageBatch {
    int count = 0;
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<float> data;     // count*channels*height*width
    std::vector<uint8_t> labels; // class index per image, 0..9

    size_t image_size() const { return static_cast<size_t>(channels) * height * width; }
    const float* image(int i) const { return data.data() + static_cast<size_t>(i) * image_size(); }
    float* image(int i) { return data.data() + static_cast<size_t>(i) * image_size(); }
};

// l x m partition of a 2-D matrix into equally sized blocks, each flattened
// row-major; blocks are ordered left-to-right, top-to-bottom.
struct BlockGrid {
    int l = 0;
    int m = 0;
    int source_rows = 0;
    int source_cols = 0;
    std::vector<std::vector<double>> blocks;

    int block_count() const { return l * m; }
};

// IDX-format loaders (big-endian, image magic 2051, label magic 2049).
ImageBatch load_mnist(const std::string& image_path, const std::string& label_path);

// CIFAR-10 binary batches: 3073-byte records, 1 label byte + 3072 pixel bytes
// in channel-major R,G,B order.
ImageBatch load_cifar10(const std::vector<std::string>& batch_paths);

// v -> v/127.5 - 1, mapping [0,255] onto [-1,1].
ImageBatch normalize(const ImageBatch& raw);

// Adds i.i.d. zero-mean Gaussian noise with the given standard deviation to
// every element, then clamps to [-1,1]. Deterministic given the seed.
ImageBatch add_noise(const ImageBatch& batch, double intensity, uint64_t seed);

// First n images in file order.
ImageBatch subset(const ImageBatch& batch, int n);

BlockGrid partition_blocks(const Matrix& matrix, int l, int m);

// Inverse of partition_blocks; used to state the round-trip property.
Matrix reassemble_blocks(const BlockGrid& grid);

// Q[a][b] = B_a . B_b (pairwise inner products of flattened blocks);
// symmetric positive semidefinite.
Matrix gram_matrix(const BlockGrid& grid);

}  // namespace qattn
