#include "qattn/ingest.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>

namespace qattn {

namespace {

constexpr uint32_t kImageMagic = 0x00000803;  // 2051
constexpr uint32_t kLabelMagic = 0x00000801;  // 2049

std::vector<uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IngestError(IngestError::Kind::FormatError, "cannot open file: " + path);
    f.seekg(0, std::ios::end);
    const std::streamoff len = f.tellg();
    f.seekg(0, std::ios::beg);
    std::vector<uint8_t> bytes(static_cast<size_t>(len));
    if (len > 0) f.read(reinterpret_cast<char*>(bytes.data()), len);
    if (!f) throw IngestError(IngestError::Kind::Truncated, "short read on file: " + path);
    return bytes;
}

uint32_t read_be32(const std::vector<uint8_t>& b, size_t off, const std::string& path) {
    if (off + 4 > b.size())
        throw IngestError(IngestError::Kind::Truncated, "truncated IDX header in " + path);
    return (uint32_t(b[off]) << 24) | (uint32_t(b[off + 1]) << 16) | (uint32_t(b[off + 2]) << 8) |
           uint32_t(b[off + 3]);
}

}  // namespace

ImageBatch load_mnist(const std::string& image_path, const std::string& label_path) {
    const std::vector<uint8_t> img = read_file_bytes(image_path);
    const std::vector<uint8_t> lab = read_file_bytes(label_path);

    if (read_be32(img, 0, image_path) != kImageMagic)
        throw IngestError(IngestError::Kind::BadMagic, "bad image magic number in " + image_path);
    if (read_be32(lab, 0, label_path) != kLabelMagic)
        throw IngestError(IngestError::Kind::BadMagic, "bad label magic number in " + label_path);

    const uint32_t n_img = read_be32(img, 4, image_path);
    const uint32_t rows = read_be32(img, 8, image_path);
    const uint32_t cols = read_be32(img, 12, image_path);
    const uint32_t n_lab = read_be32(lab, 4, label_path);

    if (n_img != n_lab)
        throw IngestError(IngestError::Kind::CountMismatch,
                          "image/label count mismatch: " + std::to_string(n_img) + " images vs " +
                              std::to_string(n_lab) + " labels");
    const size_t expect_img = 16 + static_cast<size_t>(n_img) * rows * cols;
    if (img.size() < expect_img)
        throw IngestError(IngestError::Kind::Truncated, "truncated image payload in " + image_path);
    if (lab.size() < 8 + static_cast<size_t>(n_lab))
        throw IngestError(IngestError::Kind::Truncated, "truncated label payload in " + label_path);

    ImageBatch batch;
    batch.count = static_cast<int>(n_img);
    batch.channels = 1;
    batch.height = static_cast<int>(rows);
    batch.width = static_cast<int>(cols);
    batch.data.resize(static_cast<size_t>(n_img) * rows * cols);
    for (size_t i = 0; i < batch.data.size(); ++i) batch.data[i] = static_cast<float>(img[16 + i]);
    batch.labels.assign(lab.begin() + 8, lab.begin() + 8 + n_lab);
    for (uint8_t y : batch.labels)
        if (y > 9)
            throw IngestError(IngestError::Kind::LabelRange,
                              "label out of range 0..9: " + std::to_string(int(y)));
    return batch;
}

ImageBatch load_cifar10(const std::vector<std::string>& batch_paths) {
    if (batch_paths.empty())
        throw IngestError(IngestError::Kind::EmptyDataset, "no CIFAR-10 batch files given");

    constexpr size_t kRecord = 3073;
    constexpr int kDim = 32;

    ImageBatch batch;
    batch.channels = 3;
    batch.height = kDim;
    batch.width = kDim;

    for (const std::string& path : batch_paths) {
        const std::vector<uint8_t> bytes = read_file_bytes(path);
        if (bytes.empty() || bytes.size() % kRecord != 0)
            throw IngestError(IngestError::Kind::FormatError,
                              "file length " + std::to_string(bytes.size()) +
                                  " is not a multiple of 3073: " + path);
        const size_t records = bytes.size() / kRecord;
        for (size_t r = 0; r < records; ++r) {
            const uint8_t* rec = bytes.data() + r * kRecord;
            if (rec[0] > 9)
                throw IngestError(IngestError::Kind::LabelRange,
                                  "label out of range 0..9: " + std::to_string(int(rec[0])) +
                                      " in " + path);
            batch.labels.push_back(rec[0]);
            const size_t base = batch.data.size();
            batch.data.resize(base + kRecord - 1);
            for (size_t i = 0; i < kRecord - 1; ++i)
                batch.data[base + i] = static_cast<float>(rec[1 + i]);
        }
    }
    batch.count = static_cast<int>(batch.labels.size());
    return batch;
}

ImageBatch normalize(const ImageBatch& raw) {
    ImageBatch out = raw;
    for (float& v : out.data) v = v / 127.5f - 1.0f;
    return out;
}

ImageBatch add_noise(const ImageBatch& batch, double intensity, uint64_t seed) {
    if (intensity < 0.0)
        throw IngestError(IngestError::Kind::BadArgument, "noise intensity must be non-negative");
    ImageBatch out = batch;
    if (intensity == 0.0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, intensity);
    for (float& v : out.data) {
        double w = static_cast<double>(v) + gauss(rng);
        w = std::clamp(w, -1.0, 1.0);
        v = static_cast<float>(w);
    }
    return out;
}

ImageBatch subset(const ImageBatch& batch, int n) {
    if (n < 0 || n > batch.count)
        throw IngestError(IngestError::Kind::BadArgument,
                          "subset size " + std::to_string(n) + " out of range for dataset of " +
                              std::to_string(batch.count));
    ImageBatch out;
    out.count = n;
    out.channels = batch.channels;
    out.height = batch.height;
    out.width = batch.width;
    out.data.assign(batch.data.begin(), batch.data.begin() + static_cast<size_t>(n) * batch.image_size());
    out.labels.assign(batch.labels.begin(), batch.labels.begin() + n);
    return out;
}

BlockGrid partition_blocks(const Matrix& matrix, int l, int m) {
    if (l < 1 || m < 1)
        throw IngestError(IngestError::Kind::BadArgument, "block grid dimensions must be positive");
    if (matrix.rows % l != 0 || matrix.cols % m != 0)
        throw IngestError(IngestError::Kind::BadArgument,
                          "matrix " + std::to_string(matrix.rows) + "x" + std::to_string(matrix.cols) +
                              " is not divisible into " + std::to_string(l) + "x" + std::to_string(m) +
                              " blocks");
    const int bh = matrix.rows / l;
    const int bw = matrix.cols / m;

    BlockGrid grid;
    grid.l = l;
    grid.m = m;
    grid.source_rows = matrix.rows;
    grid.source_cols = matrix.cols;
    grid.blocks.reserve(static_cast<size_t>(l) * m);
    for (int bi = 0; bi < l; ++bi) {
        for (int bj = 0; bj < m; ++bj) {
            std::vector<double> block;
            block.reserve(static_cast<size_t>(bh) * bw);
            for (int r = 0; r < bh; ++r)
                for (int c = 0; c < bw; ++c)
                    block.push_back(matrix.at(bi * bh + r, bj * bw + c));
            grid.blocks.push_back(std::move(block));
        }
    }
    return grid;
}

Matrix reassemble_blocks(const BlockGrid& grid) {
    const int bh = grid.source_rows / grid.l;
    const int bw = grid.source_cols / grid.m;
    Matrix out(grid.source_rows, grid.source_cols);
    for (int a = 0; a < grid.block_count(); ++a) {
        const int bi = a / grid.m;
        const int bj = a % grid.m;
        for (int r = 0; r < bh; ++r)
            for (int c = 0; c < bw; ++c)
                out.at(bi * bh + r, bj * bw + c) = grid.blocks[a][static_cast<size_t>(r) * bw + c];
    }
    return out;
}

Matrix gram_matrix(const BlockGrid& grid) {
    const int n = grid.block_count();
    if (n < 1) throw IngestError(IngestError::Kind::BadArgument, "gram_matrix: empty grid");
    Matrix q(n, n);
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) {
            double dot = 0.0;
            const auto& ba = grid.blocks[a];
            const auto& bb = grid.blocks[b];
            for (size_t i = 0; i < ba.size(); ++i) dot += ba[i] * bb[i];
            q.at(a, b) = dot;
            q.at(b, a) = dot;
        }
    }
    return q;
}

}  // namespace qattn
