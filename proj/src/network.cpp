#include "qattn/network.hpp"

#include <algorithm>
#include <numeric>

#include "qattn/attention.hpp"
#include "qattn/rng.hpp"

namespace qattn {

int NetworkConfig::conv1_out_h() const {
    return (input_h + 2 * conv1.padding - conv1.kernel) / conv1.stride + 1;
}
int NetworkConfig::conv1_out_w() const {
    return (input_w + 2 * conv1.padding - conv1.kernel) / conv1.stride + 1;
}
int NetworkConfig::conv2_out_h() const {
    return (conv1_out_h() + 2 * conv2.padding - conv2.kernel) / conv2.stride + 1;
}
int NetworkConfig::conv2_out_w() const {
    return (conv1_out_w() + 2 * conv2.padding - conv2.kernel) / conv2.stride + 1;
}
int NetworkConfig::fc_in() const { return conv2.out_channels * conv2_out_h() * conv2_out_w(); }

AttentionGrid resolve_attention_grid(int fc_in, const AttentionSettings& s) {
    AttentionGrid g;
    const int root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(fc_in))));
    if (root * root != fc_in)
        throw std::invalid_argument("attention grid: flattened feature count " +
                                    std::to_string(fc_in) + " is not a perfect square");
    g.mat_rows = root;
    g.mat_cols = root;
    g.l = s.grid_l > 0 ? s.grid_l : g.mat_rows;
    g.m = s.grid_m > 0 ? s.grid_m : g.mat_cols;
    if (g.mat_rows % g.l != 0 || g.mat_cols % g.m != 0)
        throw std::invalid_argument("attention grid: " + std::to_string(g.l) + "x" +
                                    std::to_string(g.m) + " does not divide the " +
                                    std::to_string(g.mat_rows) + "x" + std::to_string(g.mat_cols) +
                                    " feature matrix");
    if (s.k < 0 || s.k > g.vars())
        throw std::invalid_argument("attention grid: target cardinality k=" + std::to_string(s.k) +
                                    " out of range for " + std::to_string(g.vars()) + " blocks");
    if (s.cadence != "per_epoch" && s.cadence != "per_batch")
        throw std::invalid_argument("attention: unknown cadence: " + s.cadence);
    if (s.q_mode != "keep_strong" && s.q_mode != "gram_min")
        throw std::invalid_argument("attention: unknown q_mode: " + s.q_mode);
    return g;
}

AttentionQubo build_attention_qubo(const std::vector<double>& rep_features,
                                   const AttentionGrid& grid, const AttentionSettings& s) {
    if (static_cast<int>(rep_features.size()) != grid.mat_rows * grid.mat_cols)
        throw std::invalid_argument("attention: representative feature length mismatch");

    Matrix rep(grid.mat_rows, grid.mat_cols);
    rep.data.assign(rep_features.begin(), rep_features.end());

    const BlockGrid blocks = partition_blocks(rep, grid.l, grid.m);
    Matrix gram = gram_matrix(blocks);
    if (s.normalize_q) {
        const double scale = gram.max_abs();
        if (scale > 0.0)
            for (double& v : gram.data) v /= scale;
    }

    Matrix q(gram.rows, gram.cols);
    if (s.q_mode == "keep_strong") {
        // reward selecting the blocks with the largest squared norms
        for (int a = 0; a < gram.rows; ++a) q.at(a, a) = -gram.at(a, a);
    } else {
        q = gram;
    }

    AttentionQubo out{QuboProblem(std::move(q), s.lambda1, s.lambda2, s.k), std::move(gram)};
    return out;
}

std::vector<uint8_t> expand_block_mask(const BinaryMask& block_mask, const AttentionGrid& grid) {
    if (block_mask.size() != grid.vars())
        throw std::invalid_argument("attention: block mask length mismatch");
    const int bh = grid.mat_rows / grid.l;
    const int bw = grid.mat_cols / grid.m;
    std::vector<uint8_t> out(static_cast<size_t>(grid.mat_rows) * grid.mat_cols);
    for (int a = 0; a < grid.vars(); ++a) {
        const int bi = a / grid.m;
        const int bj = a % grid.m;
        for (int r = 0; r < bh; ++r)
            for (int c = 0; c < bw; ++c)
                out[static_cast<size_t>(bi * bh + r) * grid.mat_cols + bj * bw + c] =
                    block_mask.bits[a];
    }
    return out;
}

namespace {

BinaryMask random_mask(int n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    BinaryMask m;
    m.bits.resize(n);
    for (int i = 0; i < n; ++i) m.bits[i] = static_cast<uint8_t>(rng() & 1ULL);
    return m;
}

std::vector<double> mean_features(const Tensor4<float>& a2) {
    std::vector<double> mean(a2.sample_size(), 0.0);
    for (int s = 0; s < a2.n; ++s) {
        const float* f = a2.sample(s);
        for (size_t i = 0; i < mean.size(); ++i) mean[i] += static_cast<double>(f[i]);
    }
    for (double& v : mean) v /= static_cast<double>(a2.n);
    return mean;
}

int argmax_row(const float* row, int classes) {
    int best = 0;
    for (int c = 1; c < classes; ++c)
        if (row[c] > row[best]) best = c;
    return best;
}

}  // namespace

TrainResult train(const TrainOptions& opt, const ImageBatch& train_set, const ImageBatch& test_set,
                  const Sampler& sampler) {
    const NetworkConfig& net = opt.net;
    if (train_set.count < 1) throw std::invalid_argument("train: empty training set");
    if (net.batch_size < 1) throw std::invalid_argument("train: batch_size must be positive");
    if (net.epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");
    if (train_set.channels != net.input_channels || train_set.height != net.input_h ||
        train_set.width != net.input_w)
        throw std::invalid_argument("train: dataset shape does not match the network input shape");
    if (net.conv2_out_h() < 1 || net.conv2_out_w() < 1)
        throw std::invalid_argument("train: input too small for the convolution stack");

    const AttentionGrid grid = resolve_attention_grid(net.fc_in(), opt.attention);

    TrainResult result;
    result.model = make_model<float>(net, derive_seed(opt.seed, "init"));
    result.adam.init_like(result.model.params());
    result.mask = random_mask(grid.vars(), derive_seed(opt.seed, "mask0"));
    result.first_mask = result.mask;

    std::mt19937_64 dropout_rng(derive_seed(opt.seed, "dropout"));
    std::vector<uint8_t> position_mask = expand_block_mask(result.mask, grid);
    bool ever_solved = false;

    std::vector<int> order(train_set.count);
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < net.epochs; ++epoch) {
        std::mt19937_64 shuffle_rng(derive_seed(opt.seed, "shuffle", epoch));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double loss_sum = 0.0;
        long correct = 0;
        long seen = 0;

        const int batches = (train_set.count + net.batch_size - 1) / net.batch_size;
        for (int b = 0; b < batches; ++b) {
            const int lo = b * net.batch_size;
            const int hi = std::min(train_set.count, lo + net.batch_size);
            std::vector<int> idx(order.begin() + lo, order.begin() + hi);

            Tensor4<float> input = batch_to_tensor<float>(train_set, idx);
            ForwardCache<float> cache;
            forward_conv(result.model, input, cache);

            const bool solve_now =
                (opt.attention.cadence == "per_batch") || (opt.attention.cadence == "per_epoch" && b == 0);
            if (solve_now) {
                const std::vector<double> rep = mean_features(cache.a2);
                const AttentionQubo aq = build_attention_qubo(rep, grid, opt.attention);
                const ExplicitQubo eq = to_explicit_qubo(aq.problem);
                // one solver seed per run: successive solves see nearly the
                // same landscape, so the selected mask stays stable instead of
                // hopping between tie-equivalent subsets every epoch
                const uint64_t solve_seed = derive_seed(opt.seed, "solve");
                SolveResult sr = sampler.solve(eq, solve_seed);
                result.mask = sr.x_opt;
                position_mask = expand_block_mask(result.mask, grid);
                if (!ever_solved) {
                    result.first_mask = result.mask;
                    ever_solved = true;
                }
                result.solves.push_back({epoch, b, sampler.name(), solve_seed, sr.energy,
                                         sr.x_opt.cardinality(),
                                         attended_energy(aq.gram, sr.x_opt)});
            }

            forward_head(result.model, cache, position_mask, RunMode::Train, net.dropout,
                         &dropout_rng);

            std::vector<float> dlogits;
            const float loss =
                cross_entropy_loss_and_grad(cache.logits, [&] {
                    std::vector<uint8_t> lab(idx.size());
                    for (size_t i = 0; i < idx.size(); ++i) lab[i] = train_set.labels[idx[i]];
                    return lab;
                }(), net.fc_out, dlogits);

            for (size_t s = 0; s < idx.size(); ++s) {
                const float* row = cache.logits.data() + s * net.fc_out;
                if (argmax_row(row, net.fc_out) == train_set.labels[idx[s]]) ++correct;
            }
            loss_sum += static_cast<double>(loss) * static_cast<double>(idx.size());
            seen += static_cast<long>(idx.size());

            Gradients<float> grads =
                backward(result.model, cache, position_mask, net.dropout, dlogits);
            adam_step(result.model.params(), grads.tensors(), result.adam, net.lr);
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(seen);
        rec.train_acc = static_cast<double>(correct) / static_cast<double>(seen);
        const EvalResult ev = evaluate(result.model, test_set, position_mask, net.batch_size);
        rec.test_loss = ev.loss;
        rec.test_acc = ev.accuracy;
        result.history.epochs.push_back(rec);
        result.epochs_completed = epoch + 1;
    }

    return result;
}

EvalResult evaluate(const Model<float>& model, const ImageBatch& batch,
                    const std::vector<uint8_t>& position_mask, int batch_size) {
    if (batch.count < 1) throw std::invalid_argument("evaluate: empty dataset");
    double loss_sum = 0.0;
    long correct = 0;
    const int classes = model.fc.out;
    for (int lo = 0; lo < batch.count; lo += batch_size) {
        const int hi = std::min(batch.count, lo + batch_size);
        std::vector<int> idx(hi - lo);
        std::iota(idx.begin(), idx.end(), lo);
        Tensor4<float> input = batch_to_tensor<float>(batch, idx);
        ForwardCache<float> cache;
        forward_conv(model, input, cache);
        forward_head(model, cache, position_mask, RunMode::Eval, 0.0, nullptr);
        std::vector<uint8_t> labels(idx.size());
        for (size_t i = 0; i < idx.size(); ++i) labels[i] = batch.labels[idx[i]];
        std::vector<float> dlogits;
        const float loss = cross_entropy_loss_and_grad(cache.logits, labels, classes, dlogits);
        loss_sum += static_cast<double>(loss) * static_cast<double>(idx.size());
        for (size_t s = 0; s < idx.size(); ++s) {
            const float* row = cache.logits.data() + s * classes;
            if (argmax_row(row, classes) == labels[s]) ++correct;
        }
    }
    EvalResult r;
    r.loss = loss_sum / static_cast<double>(batch.count);
    r.accuracy = static_cast<double>(correct) / static_cast<double>(batch.count);
    return r;
}

}  // namespace qattn
