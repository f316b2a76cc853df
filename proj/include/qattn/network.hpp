#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "qattn/ingest.hpp"
#include "qattn/matrix.hpp"
#include "qattn/qubo.hpp"
#include "qattn/solvers.hpp"

namespace qattn {

// ---------------------------------------------------------------------------
// tensors and layers, templated so training runs in float while gradient
// checks run the same code in double
// ---------------------------------------------------------------------------

template <typename T>
struct Tensor4 {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<T> v;

    Tensor4() = default;
    Tensor4(int n_, int c_, int h_, int w_)
        : n(n_), c(c_), h(h_), w(w_), v(static_cast<size_t>(n_) * c_ * h_ * w_, T(0)) {}

    size_t plane() const { return static_cast<size_t>(h) * w; }
    size_t sample_size() const { return static_cast<size_t>(c) * h * w; }
    T* sample(int s) { return v.data() + static_cast<size_t>(s) * sample_size(); }
    const T* sample(int s) const { return v.data() + static_cast<size_t>(s) * sample_size(); }
    T& at(int s, int ci, int y, int x) {
        return v[((static_cast<size_t>(s) * c + ci) * h + y) * w + x];
    }
    const T& at(int s, int ci, int y, int x) const {
        return v[((static_cast<size_t>(s) * c + ci) * h + y) * w + x];
    }
};

template <typename T>
struct ConvLayer {
    int in_c = 0, out_c = 0, kernel = 5, stride = 2, pad = 2;
    std::vector<T> w;  // out_c * in_c * kernel * kernel
    std::vector<T> b;  // out_c

    int out_dim(int in_dim) const { return (in_dim + 2 * pad - kernel) / stride + 1; }
    size_t weight_count() const {
        return static_cast<size_t>(out_c) * in_c * kernel * kernel;
    }
    T weight(int oc, int ic, int ky, int kx) const {
        return w[((static_cast<size_t>(oc) * in_c + ic) * kernel + ky) * kernel + kx];
    }
};

template <typename T>
struct FcLayer {
    int in = 0, out = 0;
    std::vector<T> w;  // out * in, row-major
    std::vector<T> b;  // out
};

template <typename T>
void kaiming_uniform_init(std::vector<T>& w, int fan_in, std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (T& x : w) x = static_cast<T>(dist(rng));
}

template <typename T>
Tensor4<T> conv_forward(const Tensor4<T>& in, const ConvLayer<T>& l) {
    if (in.c != l.in_c) throw std::invalid_argument("conv layer: input channel mismatch");
    const int oh = l.out_dim(in.h);
    const int ow = l.out_dim(in.w);
    if (oh < 1 || ow < 1) throw std::invalid_argument("conv layer: input smaller than kernel footprint");
    Tensor4<T> out(in.n, l.out_c, oh, ow);
    for (int s = 0; s < in.n; ++s) {
        for (int oc = 0; oc < l.out_c; ++oc) {
            T* op = &out.at(s, oc, 0, 0);
            for (size_t i = 0; i < out.plane(); ++i) op[i] = l.b[oc];
            for (int ic = 0; ic < l.in_c; ++ic) {
                for (int ky = 0; ky < l.kernel; ++ky) {
                    for (int kx = 0; kx < l.kernel; ++kx) {
                        const T wv = l.weight(oc, ic, ky, kx);
                        for (int oy = 0; oy < oh; ++oy) {
                            const int iy = oy * l.stride + ky - l.pad;
                            if (iy < 0 || iy >= in.h) continue;
                            const T* irow = &in.at(s, ic, iy, 0);
                            T* orow = op + static_cast<size_t>(oy) * ow;
                            for (int ox = 0; ox < ow; ++ox) {
                                const int ix = ox * l.stride + kx - l.pad;
                                if (ix < 0 || ix >= in.w) continue;
                                orow[ox] += wv * irow[ix];
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

// din may be null when the input gradient is not needed (first layer)
template <typename T>
void conv_backward(const Tensor4<T>& in, const ConvLayer<T>& l, const Tensor4<T>& dout,
                   Tensor4<T>* din, std::vector<T>& dw, std::vector<T>& db) {
    const int oh = dout.h, ow = dout.w;
    dw.assign(l.weight_count(), T(0));
    db.assign(l.out_c, T(0));
    if (din) *din = Tensor4<T>(in.n, in.c, in.h, in.w);
    for (int s = 0; s < in.n; ++s) {
        for (int oc = 0; oc < l.out_c; ++oc) {
            const T* dop = &dout.at(s, oc, 0, 0);
            T acc_b = 0;
            for (size_t i = 0; i < dout.plane(); ++i) acc_b += dop[i];
            db[oc] += acc_b;
            for (int ic = 0; ic < l.in_c; ++ic) {
                for (int ky = 0; ky < l.kernel; ++ky) {
                    for (int kx = 0; kx < l.kernel; ++kx) {
                        const size_t widx =
                            ((static_cast<size_t>(oc) * l.in_c + ic) * l.kernel + ky) * l.kernel + kx;
                        const T wv = l.w[widx];
                        T acc_w = 0;
                        for (int oy = 0; oy < oh; ++oy) {
                            const int iy = oy * l.stride + ky - l.pad;
                            if (iy < 0 || iy >= in.h) continue;
                            const T* irow = &in.at(s, ic, iy, 0);
                            T* drow = din ? &din->at(s, ic, iy, 0) : nullptr;
                            const T* dorow = dop + static_cast<size_t>(oy) * ow;
                            for (int ox = 0; ox < ow; ++ox) {
                                const int ix = ox * l.stride + kx - l.pad;
                                if (ix < 0 || ix >= in.w) continue;
                                acc_w += dorow[ox] * irow[ix];
                                if (drow) drow[ix] += wv * dorow[ox];
                            }
                        }
                        dw[widx] += acc_w;
                    }
                }
            }
        }
    }
}

template <typename T>
void relu_inplace(Tensor4<T>& t) {
    for (T& x : t.v)
        if (x < T(0)) x = T(0);
}

// grad *= indicator(activation > 0); `post` is the rectified output
template <typename T>
void relu_backward_inplace(const Tensor4<T>& post, Tensor4<T>& grad) {
    for (size_t i = 0; i < grad.v.size(); ++i)
        if (!(post.v[i] > T(0))) grad.v[i] = T(0);
}

template <typename T>
std::vector<T> fc_forward(const FcLayer<T>& l, const std::vector<T>& in, int batch) {
    std::vector<T> out(static_cast<size_t>(batch) * l.out);
    for (int s = 0; s < batch; ++s) {
        const T* x = in.data() + static_cast<size_t>(s) * l.in;
        T* y = out.data() + static_cast<size_t>(s) * l.out;
        for (int o = 0; o < l.out; ++o) {
            const T* wr = l.w.data() + static_cast<size_t>(o) * l.in;
            T acc = l.b[o];
            for (int i = 0; i < l.in; ++i) acc += wr[i] * x[i];
            y[o] = acc;
        }
    }
    return out;
}

template <typename T>
void fc_backward(const FcLayer<T>& l, const std::vector<T>& in, const std::vector<T>& dout,
                 int batch, std::vector<T>& din, std::vector<T>& dw, std::vector<T>& db) {
    din.assign(in.size(), T(0));
    dw.assign(l.w.size(), T(0));
    db.assign(l.b.size(), T(0));
    for (int s = 0; s < batch; ++s) {
        const T* x = in.data() + static_cast<size_t>(s) * l.in;
        const T* dy = dout.data() + static_cast<size_t>(s) * l.out;
        T* dx = din.data() + static_cast<size_t>(s) * l.in;
        for (int o = 0; o < l.out; ++o) {
            const T g = dy[o];
            const T* wr = l.w.data() + static_cast<size_t>(o) * l.in;
            T* dwr = dw.data() + static_cast<size_t>(o) * l.in;
            db[o] += g;
            for (int i = 0; i < l.in; ++i) {
                dwr[i] += g * x[i];
                dx[i] += g * wr[i];
            }
        }
    }
}

// row-wise softmax with max shift
template <typename T>
std::vector<T> softmax_rows(const std::vector<T>& logits, int batch, int classes) {
    std::vector<T> p(logits.size());
    for (int s = 0; s < batch; ++s) {
        const T* z = logits.data() + static_cast<size_t>(s) * classes;
        T* q = p.data() + static_cast<size_t>(s) * classes;
        T mx = z[0];
        for (int c = 1; c < classes; ++c) mx = std::max(mx, z[c]);
        T sum = 0;
        for (int c = 0; c < classes; ++c) {
            q[c] = std::exp(z[c] - mx);
            sum += q[c];
        }
        for (int c = 0; c < classes; ++c) q[c] /= sum;
    }
    return p;
}

// mean softmax cross-entropy over the batch; dlogits = (softmax - onehot)/batch
template <typename T>
T cross_entropy_loss_and_grad(const std::vector<T>& logits, const std::vector<uint8_t>& labels,
                              int classes, std::vector<T>& dlogits) {
    const int batch = static_cast<int>(labels.size());
    if (static_cast<size_t>(batch) * classes != logits.size())
        throw std::invalid_argument("cross entropy: logits/label shape mismatch");
    for (uint8_t y : labels)
        if (y >= classes) throw std::invalid_argument("cross entropy: label out of range");
    const std::vector<T> p = softmax_rows(logits, batch, classes);
    dlogits.assign(logits.size(), T(0));
    T loss = 0;
    for (int s = 0; s < batch; ++s) {
        const T* q = p.data() + static_cast<size_t>(s) * classes;
        T* d = dlogits.data() + static_cast<size_t>(s) * classes;
        loss -= std::log(std::max(q[labels[s]], std::numeric_limits<T>::min()));
        for (int c = 0; c < classes; ++c)
            d[c] = (q[c] - (c == labels[s] ? T(1) : T(0))) / static_cast<T>(batch);
    }
    return loss / static_cast<T>(batch);
}

// ---------------------------------------------------------------------------
// model
// ---------------------------------------------------------------------------

struct ConvSpec {
    int out_channels = 0;
    int kernel = 5;
    int stride = 2;
    int padding = 2;
};

struct NetworkConfig {
    int input_channels = 1;
    int input_h = 28;
    int input_w = 28;
    ConvSpec conv1{32};
    ConvSpec conv2{64};
    double dropout = 0.5;
    int fc_out = 10;
    double lr = 0.001;
    int batch_size = 32;
    int epochs = 5;

    int conv1_out_h() const;
    int conv1_out_w() const;
    int conv2_out_h() const;
    int conv2_out_w() const;
    int fc_in() const;  // conv2.out_channels * conv2_out_h * conv2_out_w
};

// How the masking layer builds its coefficient matrix from the representative
// feature matrix:
//   keep_strong: negated diagonal of the unit-normalized Gram matrix, so the
//                solver keeps the blocks with the largest feature norms
//   gram_min:    the unit-normalized Gram matrix itself, so the solver keeps
//                blocks whose combined energy is smallest
struct AttentionSettings {
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    int k = 100;
    std::string cadence = "per_epoch";  // per_epoch | per_batch
    std::string q_mode = "keep_strong"; // keep_strong | gram_min
    int grid_l = 0;  // 0 = one block per matrix entry
    int grid_m = 0;
    bool normalize_q = true;
};

template <typename T>
struct Model {
    ConvLayer<T> conv1, conv2;
    FcLayer<T> fc;

    std::vector<std::vector<T>*> params() {
        return {&conv1.w, &conv1.b, &conv2.w, &conv2.b, &fc.w, &fc.b};
    }
};

template <typename T>
Model<T> make_model(const NetworkConfig& cfg, uint64_t init_seed) {
    Model<T> m;
    m.conv1.in_c = cfg.input_channels;
    m.conv1.out_c = cfg.conv1.out_channels;
    m.conv1.kernel = cfg.conv1.kernel;
    m.conv1.stride = cfg.conv1.stride;
    m.conv1.pad = cfg.conv1.padding;
    m.conv1.w.resize(m.conv1.weight_count());
    m.conv1.b.assign(m.conv1.out_c, T(0));

    m.conv2.in_c = cfg.conv1.out_channels;
    m.conv2.out_c = cfg.conv2.out_channels;
    m.conv2.kernel = cfg.conv2.kernel;
    m.conv2.stride = cfg.conv2.stride;
    m.conv2.pad = cfg.conv2.padding;
    m.conv2.w.resize(m.conv2.weight_count());
    m.conv2.b.assign(m.conv2.out_c, T(0));

    m.fc.in = cfg.fc_in();
    m.fc.out = cfg.fc_out;
    m.fc.w.resize(static_cast<size_t>(m.fc.in) * m.fc.out);
    m.fc.b.assign(m.fc.out, T(0));

    std::mt19937_64 rng(init_seed);
    kaiming_uniform_init(m.conv1.w, m.conv1.in_c * m.conv1.kernel * m.conv1.kernel, rng);
    kaiming_uniform_init(m.conv2.w, m.conv2.in_c * m.conv2.kernel * m.conv2.kernel, rng);
    kaiming_uniform_init(m.fc.w, m.fc.in, rng);
    return m;
}

enum class RunMode { Train, Eval };

template <typename T>
struct ForwardCache {
    Tensor4<T> input;
    Tensor4<T> a1;               // rectified conv1 output
    Tensor4<T> a2;               // rectified conv2 output
    std::vector<T> flat_masked;  // batch * fc_in, after gating
    std::vector<T> dropped;      // after dropout, input to FC
    std::vector<uint8_t> keep;   // dropout keep pattern; empty in eval mode
    std::vector<T> logits;       // batch * fc_out
    int batch = 0;
};

template <typename T>
void forward_conv(const Model<T>& m, const Tensor4<T>& input, ForwardCache<T>& cache) {
    cache.input = input;
    cache.batch = input.n;
    cache.a1 = conv_forward(input, m.conv1);
    relu_inplace(cache.a1);
    cache.a2 = conv_forward(cache.a1, m.conv2);
    relu_inplace(cache.a2);
}

// position_mask has one entry per flattened feature; dropout uses inverted
// scaling so eval needs no rescale
template <typename T>
void forward_head(const Model<T>& m, ForwardCache<T>& cache, const std::vector<uint8_t>& position_mask,
                  RunMode mode, double dropout_rate, std::mt19937_64* dropout_rng) {
    const int batch = cache.batch;
    const size_t fc_in = static_cast<size_t>(m.fc.in);
    if (cache.a2.sample_size() != fc_in)
        throw std::invalid_argument("forward: conv output size does not match FC input");
    if (position_mask.size() != fc_in)
        throw std::invalid_argument("forward: mask length does not match FC input");

    cache.flat_masked.resize(static_cast<size_t>(batch) * fc_in);
    for (int s = 0; s < batch; ++s) {
        const T* src = cache.a2.sample(s);
        T* dst = cache.flat_masked.data() + static_cast<size_t>(s) * fc_in;
        for (size_t i = 0; i < fc_in; ++i) dst[i] = position_mask[i] ? src[i] : T(0);
    }

    if (mode == RunMode::Train && dropout_rate > 0.0) {
        if (!dropout_rng) throw std::invalid_argument("forward: dropout requires an RNG in train mode");
        const double keep_p = 1.0 - dropout_rate;
        const T scale = static_cast<T>(1.0 / keep_p);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        cache.keep.resize(cache.flat_masked.size());
        cache.dropped.resize(cache.flat_masked.size());
        for (size_t i = 0; i < cache.flat_masked.size(); ++i) {
            cache.keep[i] = unit(*dropout_rng) < keep_p ? 1 : 0;
            cache.dropped[i] = cache.keep[i] ? cache.flat_masked[i] * scale : T(0);
        }
    } else {
        cache.keep.clear();
        cache.dropped = cache.flat_masked;
    }

    cache.logits = fc_forward(m.fc, cache.dropped, batch);
}

template <typename T>
Tensor4<T> batch_to_tensor(const ImageBatch& b, const std::vector<int>& indices) {
    Tensor4<T> t(static_cast<int>(indices.size()), b.channels, b.height, b.width);
    for (size_t s = 0; s < indices.size(); ++s) {
        const float* src = b.image(indices[s]);
        T* dst = t.sample(static_cast<int>(s));
        for (size_t i = 0; i < b.image_size(); ++i) dst[i] = static_cast<T>(src[i]);
    }
    return t;
}

template <typename T>
struct Gradients {
    std::vector<T> conv1_w, conv1_b, conv2_w, conv2_b, fc_w, fc_b;

    std::vector<std::vector<T>*> tensors() {
        return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &fc_w, &fc_b};
    }
};

// The mask is a constant gate during backprop: upstream gradients are
// multiplied element-wise by the mask, so nothing flows into gated-off
// positions.
template <typename T>
Gradients<T> backward(const Model<T>& m, const ForwardCache<T>& cache,
                      const std::vector<uint8_t>& position_mask, double dropout_rate,
                      const std::vector<T>& dlogits) {
    if (cache.logits.empty()) throw std::logic_error("backward: no cached forward activations");
    const int batch = cache.batch;
    const size_t fc_in = static_cast<size_t>(m.fc.in);

    Gradients<T> g;
    std::vector<T> d_dropped;
    fc_backward(m.fc, cache.dropped, dlogits, batch, d_dropped, g.fc_w, g.fc_b);

    // dropout backward reuses the forward keep pattern
    std::vector<T> d_flat(d_dropped.size());
    if (!cache.keep.empty()) {
        const T scale = static_cast<T>(1.0 / (1.0 - dropout_rate));
        for (size_t i = 0; i < d_flat.size(); ++i)
            d_flat[i] = cache.keep[i] ? d_dropped[i] * scale : T(0);
    } else {
        d_flat = d_dropped;
    }

    // gate
    Tensor4<T> d_a2(batch, cache.a2.c, cache.a2.h, cache.a2.w);
    for (int s = 0; s < batch; ++s) {
        const T* src = d_flat.data() + static_cast<size_t>(s) * fc_in;
        T* dst = d_a2.sample(s);
        for (size_t i = 0; i < fc_in; ++i) dst[i] = position_mask[i] ? src[i] : T(0);
    }

    relu_backward_inplace(cache.a2, d_a2);
    Tensor4<T> d_a1;
    conv_backward(cache.a1, m.conv2, d_a2, &d_a1, g.conv2_w, g.conv2_b);
    relu_backward_inplace(cache.a1, d_a1);
    conv_backward(cache.input, m.conv1, d_a1, static_cast<Tensor4<T>*>(nullptr), g.conv1_w,
                  g.conv1_b);
    return g;
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

template <typename T>
struct AdamState {
    int64_t step = 0;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::vector<std::vector<T>> m, v;

    template <typename Params>
    void init_like(Params params) {
        m.clear();
        v.clear();
        for (auto* p : params) {
            m.emplace_back(p->size(), T(0));
            v.emplace_back(p->size(), T(0));
        }
    }
};

template <typename T>
void adam_step(std::vector<std::vector<T>*> params, std::vector<std::vector<T>*> grads,
               AdamState<T>& state, double lr) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw std::invalid_argument("adam: parameter/gradient/state shape mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (size_t t = 0; t < params.size(); ++t) {
        auto& p = *params[t];
        auto& g = *grads[t];
        if (p.size() != g.size()) throw std::invalid_argument("adam: gradient shape mismatch");
        auto& mo = state.m[t];
        auto& vo = state.v[t];
        for (size_t i = 0; i < p.size(); ++i) {
            const double gi = static_cast<double>(g[i]);
            mo[i] = static_cast<T>(state.beta1 * mo[i] + (1.0 - state.beta1) * gi);
            vo[i] = static_cast<T>(state.beta2 * vo[i] + (1.0 - state.beta2) * gi * gi);
            const double mhat = mo[i] / bc1;
            const double vhat = vo[i] / bc2;
            p[i] = static_cast<T>(p[i] - lr * mhat / (std::sqrt(vhat) + state.eps));
        }
    }
}

// ---------------------------------------------------------------------------
// masking layer plumbing and the training loop (float instantiation)
// ---------------------------------------------------------------------------

struct AttentionGrid {
    int mat_rows = 0, mat_cols = 0;  // representative feature matrix shape
    int l = 0, m = 0;                // block grid
    int vars() const { return l * m; }
};

// Derives the feature-matrix shape (square root of fc_in) and the block grid
// from the settings; throws on inconsistent configuration.
AttentionGrid resolve_attention_grid(int fc_in, const AttentionSettings& s);

struct AttentionQubo {
    QuboProblem problem;
    Matrix gram;  // unit-normalized Gram matrix, used for diagnostics
};

// Builds the QUBO the masking layer hands to the solver from a representative
// flattened feature vector.
AttentionQubo build_attention_qubo(const std::vector<double>& rep_features,
                                   const AttentionGrid& grid, const AttentionSettings& s);

// Expands a block-level mask to one gate bit per feature position.
std::vector<uint8_t> expand_block_mask(const BinaryMask& block_mask, const AttentionGrid& grid);

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0, train_acc = 0.0;
    double test_loss = 0.0, test_acc = 0.0;
};

struct TrainingHistory {
    std::vector<EpochRecord> epochs;
};

struct SolveLogEntry {
    int epoch = 0;
    int batch = 0;
    std::string solver;
    uint64_t seed = 0;
    double energy = 0.0;
    int cardinality = 0;
    double attended_energy = 0.0;
};

struct TrainResult {
    Model<float> model;
    AdamState<float> adam;
    TrainingHistory history;
    BinaryMask mask;        // final block-level mask
    BinaryMask first_mask;  // after the first solve (or the random initial mask if never solved)
    std::vector<SolveLogEntry> solves;
    int epochs_completed = 0;
};

struct TrainOptions {
    NetworkConfig net;
    AttentionSettings attention;
    uint64_t seed = 0;
};

TrainResult train(const TrainOptions& opt, const ImageBatch& train_set, const ImageBatch& test_set,
                  const Sampler& sampler);

struct EvalResult {
    double loss = 0.0;
    double accuracy = 0.0;
};

EvalResult evaluate(const Model<float>& model, const ImageBatch& batch,
                    const std::vector<uint8_t>& position_mask, int batch_size);

}  // namespace qattn
