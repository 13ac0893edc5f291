#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "core_math.hpp"

namespace advcomm {

enum class Activation : std::uint8_t { linear = 0, relu = 1, sigmoid = 2 };

inline Activation activation_by_name(const std::string& s) {
    if (s == "linear") return Activation::linear;
    if (s == "relu") return Activation::relu;
    if (s == "sigmoid") return Activation::sigmoid;
    throw std::invalid_argument("unknown activation: " + s);
}

inline double apply_activation(Activation a, double x) {
    switch (a) {
        case Activation::relu: return x > 0.0 ? x : 0.0;
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
        default: return x;
    }
}

// derivative expressed through the post-activation value y
inline double activation_slope(Activation a, double y) {
    switch (a) {
        case Activation::relu: return y > 0.0 ? 1.0 : 0.0;  // subgradient 0 at the kink
        case Activation::sigmoid: return y * (1.0 - y);
        default: return 1.0;
    }
}

struct Layer {
    RealMatrix w;  // out x in
    std::vector<double> b;
    Activation act = Activation::linear;
};

struct NetGradients {
    std::vector<RealMatrix> gw;
    std::vector<std::vector<double>> gb;
};

// Small fully connected network with exact reverse-mode differentiation.
struct DenseNetwork {
    std::vector<Layer> layers;

    std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().w.cols; }
    std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().w.rows; }

    static DenseNetwork mlp(const std::vector<std::size_t>& dims, Activation hidden,
                            Activation head, RngStream& rng) {
        if (dims.size() < 2) throw std::invalid_argument("mlp: need at least input and output dims");
        DenseNetwork net;
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            Layer layer;
            layer.w = RealMatrix(dims[l + 1], dims[l]);
            layer.b.assign(dims[l + 1], 0.0);
            layer.act = (l + 2 == dims.size()) ? head : hidden;
            const double scale = layer.act == Activation::relu ? std::sqrt(2.0 / double(dims[l]))
                                                               : std::sqrt(1.0 / double(dims[l]));
            for (auto& x : layer.w.data) x = rng.gaussian(scale);
            net.layers.push_back(std::move(layer));
        }
        return net;
    }

    // post-activation outputs per layer; [0] is the input itself
    struct ForwardCache {
        std::vector<std::vector<double>> acts;
    };

    std::vector<double> forward(const std::vector<double>& x) const {
        std::vector<double> cur = x;
        for (const auto& layer : layers) {
            std::vector<double> next(layer.w.rows);
            for (std::size_t i = 0; i < layer.w.rows; ++i) {
                double s = layer.b[i];
                const double* wrow = &layer.w.data[i * layer.w.cols];
                for (std::size_t j = 0; j < layer.w.cols; ++j) s += wrow[j] * cur[j];
                next[i] = apply_activation(layer.act, s);
            }
            cur = std::move(next);
        }
        return cur;
    }

    std::vector<double> forward_cached(const std::vector<double>& x, ForwardCache& cache) const {
        cache.acts.clear();
        cache.acts.push_back(x);
        for (const auto& layer : layers) {
            const auto& cur = cache.acts.back();
            std::vector<double> next(layer.w.rows);
            for (std::size_t i = 0; i < layer.w.rows; ++i) {
                double s = layer.b[i];
                const double* wrow = &layer.w.data[i * layer.w.cols];
                for (std::size_t j = 0; j < layer.w.cols; ++j) s += wrow[j] * cur[j];
                next[i] = apply_activation(layer.act, s);
            }
            cache.acts.push_back(std::move(next));
        }
        return cache.acts.back();
    }

    // Backpropagates grad_out, accumulating parameter gradients; returns the
    // gradient with respect to the input.
    std::vector<double> backward(const ForwardCache& cache, std::vector<double> grad_out,
                                 NetGradients& grads) const {
        ensure_gradient_shape(grads);
        for (std::size_t li = layers.size(); li > 0; --li) {
            const Layer& layer = layers[li - 1];
            const auto& out = cache.acts[li];
            const auto& in = cache.acts[li - 1];
            for (std::size_t i = 0; i < out.size(); ++i)
                grad_out[i] *= activation_slope(layer.act, out[i]);
            auto& gw = grads.gw[li - 1];
            auto& gb = grads.gb[li - 1];
            std::vector<double> grad_in(in.size(), 0.0);
            for (std::size_t i = 0; i < layer.w.rows; ++i) {
                const double gi = grad_out[i];
                gb[i] += gi;
                double* gwrow = &gw.data[i * gw.cols];
                const double* wrow = &layer.w.data[i * layer.w.cols];
                if (gi != 0.0) {
                    for (std::size_t j = 0; j < layer.w.cols; ++j) {
                        gwrow[j] += gi * in[j];
                        grad_in[j] += gi * wrow[j];
                    }
                }
            }
            grad_out = std::move(grad_in);
        }
        return grad_out;
    }

    // Input gradient only, without touching parameter gradients.
    std::vector<double> input_gradient(const ForwardCache& cache,
                                       std::vector<double> grad_out) const {
        for (std::size_t li = layers.size(); li > 0; --li) {
            const Layer& layer = layers[li - 1];
            const auto& out = cache.acts[li];
            for (std::size_t i = 0; i < out.size(); ++i)
                grad_out[i] *= activation_slope(layer.act, out[i]);
            std::vector<double> grad_in(cache.acts[li - 1].size(), 0.0);
            for (std::size_t i = 0; i < layer.w.rows; ++i) {
                const double gi = grad_out[i];
                if (gi == 0.0) continue;
                const double* wrow = &layer.w.data[i * layer.w.cols];
                for (std::size_t j = 0; j < layer.w.cols; ++j) grad_in[j] += gi * wrow[j];
            }
            grad_out = std::move(grad_in);
        }
        return grad_out;
    }

    // Exact reverse-mode Jacobian: row i is the gradient of output i.
    RealMatrix jacobian(const std::vector<double>& r) const {
        ForwardCache cache;
        forward_cached(r, cache);
        RealMatrix jac(output_dim(), input_dim());
        std::vector<double> seed(output_dim(), 0.0);
        for (std::size_t i = 0; i < output_dim(); ++i) {
            seed.assign(output_dim(), 0.0);
            seed[i] = 1.0;
            const auto row = input_gradient(cache, seed);
            for (std::size_t j = 0; j < input_dim(); ++j) jac(i, j) = row[j];
        }
        return jac;
    }

    void ensure_gradient_shape(NetGradients& grads) const {
        if (grads.gw.size() == layers.size()) return;
        grads.gw.clear();
        grads.gb.clear();
        for (const auto& layer : layers) {
            grads.gw.emplace_back(layer.w.rows, layer.w.cols);
            grads.gb.emplace_back(layer.b.size(), 0.0);
        }
    }

    void zero_gradients(NetGradients& grads) const {
        ensure_gradient_shape(grads);
        for (auto& g : grads.gw) std::fill(g.data.begin(), g.data.end(), 0.0);
        for (auto& g : grads.gb) std::fill(g.begin(), g.end(), 0.0);
    }
};

// Versioned flat binary weight format shared with the DQN agent:
// magic "ADVNET01", u32 layer count, per layer (u32 out, u32 in, u8 act),
// then per layer the row-major weights and the bias, as little-endian f64.
inline void save_network(const DenseNetwork& net, std::ostream& os) {
    os.write("ADVNET01", 8);
    auto put_u32 = [&](std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); };
    put_u32(std::uint32_t(net.layers.size()));
    for (const auto& l : net.layers) {
        put_u32(std::uint32_t(l.w.rows));
        put_u32(std::uint32_t(l.w.cols));
        const std::uint8_t a = std::uint8_t(l.act);
        os.write(reinterpret_cast<const char*>(&a), 1);
    }
    for (const auto& l : net.layers) {
        os.write(reinterpret_cast<const char*>(l.w.data.data()),
                 std::streamsize(l.w.data.size() * sizeof(double)));
        os.write(reinterpret_cast<const char*>(l.b.data()),
                 std::streamsize(l.b.size() * sizeof(double)));
    }
}

inline void save_network(const DenseNetwork& net, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_network: cannot open " + path);
    save_network(net, f);
}

inline DenseNetwork load_network(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, "ADVNET01", 8) != 0)
        throw std::runtime_error("load_network: bad magic");
    auto get_u32 = [&]() {
        std::uint32_t v = 0;
        is.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    const std::uint32_t count = get_u32();
    if (count > 64) throw std::runtime_error("load_network: implausible layer count");
    DenseNetwork net;
    for (std::uint32_t i = 0; i < count; ++i) {
        Layer l;
        const std::uint32_t rows = get_u32();
        const std::uint32_t cols = get_u32();
        std::uint8_t a = 0;
        is.read(reinterpret_cast<char*>(&a), 1);
        l.w = RealMatrix(rows, cols);
        l.b.assign(rows, 0.0);
        l.act = Activation(a);
        net.layers.push_back(std::move(l));
    }
    for (auto& l : net.layers) {
        is.read(reinterpret_cast<char*>(l.w.data.data()),
                std::streamsize(l.w.data.size() * sizeof(double)));
        is.read(reinterpret_cast<char*>(l.b.data()),
                std::streamsize(l.b.size() * sizeof(double)));
    }
    if (!is) throw std::runtime_error("load_network: truncated file");
    return net;
}

inline DenseNetwork load_network(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_network: cannot open " + path);
    return load_network(f);
}

// Adam with decoupled weight decay. Weight decay is not applied to biases.
class AdamW {
public:
    AdamW(double lr = 1e-3, double weight_decay = 0.0, double beta1 = 0.9, double beta2 = 0.999,
          double eps = 1e-8)
        : lr_(lr), wd_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(DenseNetwork& net, const NetGradients& grads) {
        if (mw_.empty()) init(net);
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, double(t_));
        const double bc2 = 1.0 - std::pow(beta2_, double(t_));
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            update(net.layers[l].w.data, grads.gw[l].data, mw_[l], vw_[l], bc1, bc2, wd_);
            update(net.layers[l].b, grads.gb[l], mb_[l], vb_[l], bc1, bc2, 0.0);
        }
    }

    double learning_rate() const { return lr_; }
    void set_learning_rate(double lr) { lr_ = lr; }

private:
    void init(const DenseNetwork& net) {
        for (const auto& l : net.layers) {
            mw_.emplace_back(l.w.data.size(), 0.0);
            vw_.emplace_back(l.w.data.size(), 0.0);
            mb_.emplace_back(l.b.size(), 0.0);
            vb_.emplace_back(l.b.size(), 0.0);
        }
    }

    void update(std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                std::vector<double>& v, double bc1, double bc2, double wd) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= lr_ * (mhat / (std::sqrt(vhat) + eps_) + wd * p[i]);
        }
    }

    double lr_, wd_, beta1_, beta2_, eps_;
    std::uint64_t t_ = 0;
    std::vector<std::vector<double>> mw_, vw_, mb_, vb_;
};

// Batch encoder with the exact power contract: the batch is scaled so the
// mean per-frame power equals the number of channel dimensions.
inline std::vector<std::vector<double>> encode_batch(const DenseNetwork& encoder,
                                                     const std::vector<std::vector<double>>& xs) {
    if (xs.empty()) throw std::invalid_argument("encode_batch: empty batch");
    std::vector<std::vector<double>> z(xs.size());
    double total = 0.0;
    for (std::size_t b = 0; b < xs.size(); ++b) {
        if (xs[b].size() != encoder.input_dim())
            throw std::invalid_argument("encode_batch: input dimension mismatch");
        z[b] = encoder.forward(xs[b]);
        for (double v : z[b]) total += v * v;
    }
    const double n = double(encoder.output_dim());
    const double scale = total > 0.0 ? std::sqrt(double(xs.size()) * n / total) : 0.0;
    for (auto& row : z)
        for (auto& v : row) v *= scale;
    return z;
}

inline ComplexVector pair_to_complex(const std::vector<double>& z) {
    if (z.size() % 2 != 0) throw std::invalid_argument("pair_to_complex: odd dimension");
    ComplexVector out(z.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {z[2 * i], z[2 * i + 1]};
    return out;
}

struct TrainingConfig {
    std::size_t epochs = 200;
    std::size_t batch_size = 128;
    double learning_rate = 1e-3;
    double weight_decay = 1e-4;
    std::uint64_t seed = 1;
};

struct TrainResult {
    std::vector<double> loss_curve;  // mean per-sample total MSE per epoch
};

// End-to-end training through the noisy channel r = h*z + w, fresh noise per
// batch, exact backprop through the per-batch power normalization.
inline TrainResult train_deepjscc(DenseNetwork& encoder, DenseNetwork& decoder,
                                  const std::vector<std::vector<double>>& dataset, double h_mag,
                                  double noise_var_per_dim, const TrainingConfig& cfg) {
    if (dataset.empty()) throw std::invalid_argument("train_deepjscc: empty dataset");
    const std::size_t n_dim = encoder.output_dim();
    if (decoder.input_dim() != n_dim)
        throw std::invalid_argument("train_deepjscc: encoder/decoder dimension mismatch");

    RngStream rng(cfg.seed, 0xD33C);
    AdamW opt_enc(cfg.learning_rate, cfg.weight_decay);
    AdamW opt_dec(cfg.learning_rate, cfg.weight_decay);
    NetGradients genc, gdec;
    const double sigma = std::sqrt(noise_var_per_dim);

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    std::vector<DenseNetwork::ForwardCache> enc_caches, dec_caches;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size() - 1; i > 0; --i)
            std::swap(order[i], order[rng.next_below(i + 1)]);

        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t bsz = std::min(cfg.batch_size, order.size() - start);
            enc_caches.assign(bsz, {});
            dec_caches.assign(bsz, {});

            std::vector<std::vector<double>> raw(bsz);
            double total_power = 0.0;
            for (std::size_t b = 0; b < bsz; ++b) {
                raw[b] = encoder.forward_cached(dataset[order[start + b]], enc_caches[b]);
                for (double v : raw[b]) total_power += v * v;
            }
            const double scale =
                total_power > 0.0 ? std::sqrt(double(bsz) * double(n_dim) / total_power) : 0.0;

            decoder.zero_gradients(gdec);
            encoder.zero_gradients(genc);
            double batch_loss = 0.0;
            // dot of upstream z-gradients with raw outputs, for the exact
            // derivative of the shared normalization scale
            double gz_dot_raw = 0.0;
            std::vector<std::vector<double>> gz(bsz);
            for (std::size_t b = 0; b < bsz; ++b) {
                std::vector<double> r(n_dim);
                for (std::size_t j = 0; j < n_dim; ++j)
                    r[j] = h_mag * scale * raw[b][j] + rng.gaussian(sigma);
                const auto xh = decoder.forward_cached(r, dec_caches[b]);
                const auto& x = dataset[order[start + b]];
                std::vector<double> gout(x.size());
                for (std::size_t j = 0; j < x.size(); ++j) {
                    const double d = xh[j] - x[j];
                    batch_loss += d * d;
                    gout[j] = 2.0 * d / double(bsz);
                }
                const auto gr = decoder.backward(dec_caches[b], std::move(gout), gdec);
                gz[b].resize(n_dim);
                for (std::size_t j = 0; j < n_dim; ++j) {
                    gz[b][j] = h_mag * gr[j];
                    gz_dot_raw += gz[b][j] * raw[b][j];
                }
            }
            if (scale > 0.0) {
                for (std::size_t b = 0; b < bsz; ++b) {
                    std::vector<double> graw(n_dim);
                    for (std::size_t j = 0; j < n_dim; ++j)
                        graw[j] = scale * (gz[b][j] - raw[b][j] * gz_dot_raw / total_power);
                    encoder.backward(enc_caches[b], std::move(graw), genc);
                }
            }

            if (!std::isfinite(batch_loss))
                throw std::runtime_error("train_deepjscc: loss diverged (NaN/inf) at epoch " +
                                         std::to_string(epoch));
            opt_dec.step(decoder, gdec);
            opt_enc.step(encoder, genc);
            epoch_loss += batch_loss;
            seen += bsz;
        }
        result.loss_curve.push_back(epoch_loss / double(seen));
    }
    return result;
}

struct LipschitzEstimate {
    double g_hat = 0.0;
    std::size_t sample_count = 0;
    double norm_min = 0.0;
    double norm_mean = 0.0;
    std::vector<double> per_sample;  // spectral norm of the Jacobian per input
};

// Empirical lower estimate of the decoder Lipschitz constant: the maximum
// Jacobian spectral norm over sampled operating-point inputs.
inline LipschitzEstimate estimate_lipschitz(const DenseNetwork& decoder,
                                            const std::vector<std::vector<double>>& samples) {
    LipschitzEstimate est;
    est.sample_count = samples.size();
    est.per_sample.reserve(samples.size());
    double sum = 0.0, mn = 1e308;
    for (const auto& r : samples) {
        const double s = spectral_norm(decoder.jacobian(r), 1e-9);
        est.per_sample.push_back(s);
        est.g_hat = std::max(est.g_hat, s);
        mn = std::min(mn, s);
        sum += s;
    }
    if (!samples.empty()) {
        est.norm_min = mn;
        est.norm_mean = sum / double(samples.size());
    }
    return est;
}

// Trained semantic system at inference time: the power scale is frozen from
// the training set, so single-frame encoding does not depend on batch
// composition.
struct SemanticChain {
    DenseNetwork encoder;
    DenseNetwork decoder;
    double h_mag = 1.0;
    double noise_var = 0.1;  // per real channel dimension
    double power_scale = 1.0;

    std::size_t source_dim() const { return encoder.input_dim(); }
    std::size_t channel_dim() const { return encoder.output_dim(); }

    void freeze_power_scale(const std::vector<std::vector<double>>& dataset) {
        double total = 0.0;
        for (const auto& x : dataset) {
            const auto raw = encoder.forward(x);
            for (double v : raw) total += v * v;
        }
        power_scale = total > 0.0
                          ? std::sqrt(double(dataset.size()) * double(channel_dim()) / total)
                          : 0.0;
    }

    std::vector<double> encode_frame(const std::vector<double>& x) const {
        auto z = encoder.forward(x);
        for (auto& v : z) v *= power_scale;
        return z;
    }

    std::vector<double> transmit_frame(const std::vector<double>& x, RngStream& rng) const {
        auto z = encode_frame(x);
        const double sigma = std::sqrt(noise_var);
        for (auto& v : z) v = h_mag * v + rng.gaussian(sigma);
        return z;
    }

    std::vector<double> decode_frame(const std::vector<double>& r) const {
        return decoder.forward(r);
    }

    double distortion(const std::vector<double>& x, const std::vector<double>& r) const {
        const auto xh = decoder.forward(r);
        double se = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - xh[i];
            se += d * d;
        }
        return se;
    }
};

}  // namespace advcomm
