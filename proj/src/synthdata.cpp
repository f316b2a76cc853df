#include "qattn/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace qattn {

namespace {

struct Pt {
    double x, y;
};

using Stroke = std::vector<Pt>;

std::vector<Pt> circle(double cx, double cy, double rx, double ry, int segs = 14) {
    std::vector<Pt> pts;
    pts.reserve(segs + 1);
    for (int i = 0; i <= segs; ++i) {
        const double a = 2.0 * M_PI * i / segs;
        pts.push_back({cx + rx * std::cos(a), cy + ry * std::sin(a)});
    }
    return pts;
}

// skeletons in a unit box, x right, y down
std::vector<Stroke> digit_strokes(int digit) {
    switch (digit) {
        case 0:
            return {circle(0.5, 0.5, 0.26, 0.36)};
        case 1:
            return {{{0.34, 0.28}, {0.54, 0.12}}, {{0.54, 0.12}, {0.54, 0.88}}};
        case 2:
            return {{{0.28, 0.30}, {0.33, 0.16}, {0.52, 0.11}, {0.68, 0.18}, {0.72, 0.32},
                     {0.62, 0.50}, {0.30, 0.85}},
                    {{0.30, 0.85}, {0.74, 0.85}}};
        case 3:
            return {{{0.30, 0.18}, {0.50, 0.12}, {0.68, 0.20}, {0.68, 0.36}, {0.50, 0.47}},
                    {{0.50, 0.47}, {0.70, 0.57}, {0.70, 0.76}, {0.50, 0.88}, {0.30, 0.80}}};
        case 4:
            return {{{0.64, 0.88}, {0.64, 0.12}}, {{0.64, 0.12}, {0.24, 0.62}},
                    {{0.24, 0.62}, {0.80, 0.62}}};
        case 5:
            return {{{0.70, 0.13}, {0.32, 0.13}}, {{0.32, 0.13}, {0.30, 0.46}},
                    {{0.30, 0.46}, {0.55, 0.42}, {0.70, 0.54}, {0.70, 0.72}, {0.52, 0.87},
                     {0.30, 0.80}}};
        case 6: {
            std::vector<Stroke> s = {{{0.62, 0.12}, {0.44, 0.30}, {0.33, 0.55}}};
            s.push_back(circle(0.50, 0.67, 0.20, 0.20));
            return s;
        }
        case 7:
            return {{{0.27, 0.13}, {0.73, 0.13}}, {{0.73, 0.13}, {0.42, 0.88}}};
        case 8: {
            std::vector<Stroke> s;
            s.push_back(circle(0.50, 0.30, 0.18, 0.17));
            s.push_back(circle(0.50, 0.67, 0.22, 0.20));
            return s;
        }
        case 9: {
            std::vector<Stroke> s;
            s.push_back(circle(0.50, 0.33, 0.20, 0.20));
            s.push_back({{0.70, 0.36}, {0.66, 0.62}, {0.55, 0.88}});
            return s;
        }
        default:
            throw std::invalid_argument("digit_strokes: digit out of range");
    }
}

double segment_distance(double px, double py, const Pt& a, const Pt& b) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double wx = px - a.x, wy = py - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? (wx * vx + wy * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = px - (a.x + t * vx);
    const double dy = py - (a.y + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

// one grayscale digit rendered into pixel values [0,255]
void render_digit(int digit, int height, int width, std::mt19937_64& rng, float* out) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double rot = (unit(rng) - 0.5) * 0.22;
    const double sx = 0.88 + unit(rng) * 0.20;
    const double sy = 0.88 + unit(rng) * 0.20;
    const double shear = (unit(rng) - 0.5) * 0.12;
    const double tx = (unit(rng) - 0.5) * 3.0;
    const double ty = (unit(rng) - 0.5) * 3.0;
    const double thickness = 1.1 + unit(rng) * 0.6;
    const double peak = 230.0 + unit(rng) * 25.0;

    // digits occupy a centered box of ~0.72 of the frame, matching the usual
    // size-normalized handwritten-digit layout
    const double box = 0.72 * std::min(height, width);
    const double cr = std::cos(rot), sr = std::sin(rot);
    const double cx = width / 2.0 + tx, cy = height / 2.0 + ty;

    // transform skeleton into pixel space
    std::vector<Stroke> strokes = digit_strokes(digit);
    for (Stroke& s : strokes) {
        for (Pt& p : s) {
            const double ux = (p.x - 0.5) * sx + (p.y - 0.5) * shear;
            const double uy = (p.y - 0.5) * sy;
            p = {cx + box * (cr * ux - sr * uy), cy + box * (sr * ux + cr * uy)};
        }
    }

    const double aa = 1.0;  // antialias band in pixels
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double d = 1e9;
            for (const Stroke& s : strokes)
                for (size_t i = 0; i + 1 < s.size(); ++i)
                    d = std::min(d, segment_distance(x + 0.5, y + 0.5, s[i], s[i + 1]));
            const double cover = std::clamp(1.0 - (d - thickness) / aa, 0.0, 1.0);
            out[static_cast<size_t>(y) * width + x] = static_cast<float>(peak * cover);
        }
    }
}

void add_pixel_noise(ImageBatch& batch, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, sigma);
    for (float& v : batch.data)
        v = static_cast<float>(std::clamp(static_cast<double>(v) + gauss(rng), 0.0, 255.0));
}

void write_be32(std::ofstream& f, uint32_t v) {
    const uint8_t b[4] = {static_cast<uint8_t>(v >> 24), static_cast<uint8_t>(v >> 16),
                          static_cast<uint8_t>(v >> 8), static_cast<uint8_t>(v)};
    f.write(reinterpret_cast<const char*>(b), 4);
}

uint8_t to_byte(float v) {
    return static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

ImageBatch make_synth_digits(int count, int height, int width, uint64_t seed) {
    if (count < 0) throw std::invalid_argument("make_synth_digits: negative count");
    ImageBatch batch;
    batch.count = count;
    batch.channels = 1;
    batch.height = height;
    batch.width = width;
    batch.data.resize(static_cast<size_t>(count) * height * width);
    batch.labels.resize(count);

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> cls(0, 9);
    for (int i = 0; i < count; ++i) {
        batch.labels[i] = static_cast<uint8_t>(cls(rng));
        render_digit(batch.labels[i], height, width, rng, batch.image(i));
    }
    add_pixel_noise(batch, 5.0, rng);
    return batch;
}

ImageBatch make_synth_digits_rgb(int count, int height, int width, uint64_t seed) {
    const ImageBatch gray = make_synth_digits(count, height, width, seed);
    ImageBatch batch;
    batch.count = count;
    batch.channels = 3;
    batch.height = height;
    batch.width = width;
    batch.data.resize(static_cast<size_t>(count) * 3 * height * width);
    batch.labels = gray.labels;

    std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const size_t plane = static_cast<size_t>(height) * width;
    for (int i = 0; i < count; ++i) {
        double fg[3], bg[3];
        for (int c = 0; c < 3; ++c) {
            fg[c] = 0.55 + 0.45 * unit(rng);
            bg[c] = 0.30 * unit(rng);
        }
        const float* g = gray.image(i);
        float* dst = batch.image(i);
        for (int c = 0; c < 3; ++c)
            for (size_t p = 0; p < plane; ++p) {
                const double a = g[p] / 255.0;
                dst[c * plane + p] =
                    static_cast<float>(255.0 * (a * fg[c] + (1.0 - a) * bg[c]));
            }
    }
    add_pixel_noise(batch, 9.0, rng);
    return batch;
}

void write_idx_images(const ImageBatch& batch, const std::string& path) {
    if (batch.channels != 1)
        throw std::invalid_argument("write_idx_images: IDX image files are single channel");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    write_be32(f, 0x00000803);
    write_be32(f, static_cast<uint32_t>(batch.count));
    write_be32(f, static_cast<uint32_t>(batch.height));
    write_be32(f, static_cast<uint32_t>(batch.width));
    for (float v : batch.data) f.put(static_cast<char>(to_byte(v)));
    if (!f) throw std::runtime_error("write failed: " + path);
}

void write_idx_labels(const ImageBatch& batch, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    write_be32(f, 0x00000801);
    write_be32(f, static_cast<uint32_t>(batch.count));
    for (uint8_t y : batch.labels) f.put(static_cast<char>(y));
    if (!f) throw std::runtime_error("write failed: " + path);
}

void write_cifar_batch(const ImageBatch& batch, const std::string& path) {
    if (batch.channels != 3 || batch.height != 32 || batch.width != 32)
        throw std::invalid_argument("write_cifar_batch: expects 3x32x32 images");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    for (int i = 0; i < batch.count; ++i) {
        f.put(static_cast<char>(batch.labels[i]));
        const float* img = batch.image(i);
        for (size_t p = 0; p < batch.image_size(); ++p)
            f.put(static_cast<char>(to_byte(img[p])));
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace qattn
