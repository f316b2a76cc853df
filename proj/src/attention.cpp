#include "qattn/attention.hpp"

#include <fstream>
#include <stdexcept>

namespace qattn {

ScoreMatrix score_matrix(const BinaryMask& x) {
    ScoreMatrix s;
    s.n = x.size();
    s.values.resize(static_cast<size_t>(s.n) * s.n);
    for (int a = 0; a < s.n; ++a)
        for (int b = 0; b < s.n; ++b)
            s.values[static_cast<size_t>(a) * s.n + b] = x.bits[a] & x.bits[b];
    return s;
}

namespace {

template <typename T>
std::vector<T> gate(const std::vector<T>& features, const BinaryMask& x) {
    if (static_cast<int>(features.size()) != x.size())
        throw std::invalid_argument("apply_mask: feature/mask length mismatch");
    std::vector<T> out(features.size());
    for (size_t a = 0; a < features.size(); ++a) out[a] = x.bits[a] ? features[a] : T(0);
    return out;
}

}  // namespace

std::vector<float> apply_mask(const std::vector<float>& features, const BinaryMask& x) {
    return gate(features, x);
}

std::vector<double> apply_mask(const std::vector<double>& features, const BinaryMask& x) {
    return gate(features, x);
}

double attended_energy(const Matrix& q, const BinaryMask& x_opt) {
    if (!q.square() || q.rows != x_opt.size())
        throw std::invalid_argument("attended_energy: dimension mismatch");
    double e = 0.0;
    for (int a = 0; a < q.rows; ++a) {
        if (!x_opt.bits[a]) continue;
        for (int b = 0; b < q.cols; ++b)
            if (x_opt.bits[b]) e += q.at(a, b);
    }
    return e;
}

namespace {

void write_pgm(const std::string& path, int width, int height, const std::vector<uint8_t>& pixels) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "P5\n" << width << ' ' << height << "\n255\n";
    f.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace

void render_mask(const BinaryMask& x, int l, int m, const std::string& path) {
    if (x.size() != l * m)
        throw std::invalid_argument("render_mask: mask length " + std::to_string(x.size()) +
                                    " does not equal " + std::to_string(l) + "*" + std::to_string(m));
    std::vector<uint8_t> px(x.bits.size());
    for (size_t i = 0; i < px.size(); ++i) px[i] = x.bits[i] ? 255 : 0;
    write_pgm(path, m, l, px);
}

void render_score_matrix(const BinaryMask& x, const std::string& path) {
    const ScoreMatrix s = score_matrix(x);
    std::vector<uint8_t> px(s.values.size());
    for (size_t i = 0; i < px.size(); ++i) px[i] = s.values[i] ? 255 : 0;
    write_pgm(path, s.n, s.n, px);
}

PgmImage read_pgm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    f >> magic >> w >> h >> maxval;
    if (magic != "P5" || maxval != 255) throw std::runtime_error("not an 8-bit P5 PGM: " + path);
    f.get();  // single whitespace after header
    PgmImage img;
    img.width = w;
    img.height = h;
    img.pixels.resize(static_cast<size_t>(w) * h);
    f.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (!f) throw std::runtime_error("truncated PGM payload: " + path);
    return img;
}

}  // namespace qattn
