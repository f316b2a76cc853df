#pragma once

#include <cstdint>
#include <string>

#include "qattn/ingest.hpp"

namespace qattn {

// Procedurally rendered digit images: per-class stroke skeletons drawn with
// random affine jitter, stroke thickness variation, and pixel noise. Output
// matches the raw loaders (byte range [0,255], labels 0..9) so generated
// files are drop-in stand-ins when the reference datasets are not on disk.
ImageBatch make_synth_digits(int count, int height, int width, uint64_t seed);

// 3-channel variant with randomized foreground/background colors.
ImageBatch make_synth_digits_rgb(int count, int height, int width, uint64_t seed);

// IDX writers (image magic 2051, label magic 2049, big-endian).
void write_idx_images(const ImageBatch& batch, const std::string& path);
void write_idx_labels(const ImageBatch& batch, const std::string& path);

// CIFAR-10 binary batch writer (3073-byte records).
void write_cifar_batch(const ImageBatch& batch, const std::string& path);

}  // namespace qattn
