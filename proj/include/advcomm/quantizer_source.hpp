#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "core_math.hpp"
#include "ldpc.hpp"

namespace advcomm {

enum class SourceKind { gaussian, sparse_gaussian, patch };

struct SourceSpec {
    SourceKind kind = SourceKind::gaussian;
    std::size_t m = 32;        // source dimension
    double variance = 1.0;     // per-dimension variance (gaussian kinds)
    double sparsity = 0.25;    // kept fraction (sparse_gaussian only)

    static SourceKind kind_by_name(const std::string& s) {
        if (s == "gaussian") return SourceKind::gaussian;
        if (s == "sparse_gaussian") return SourceKind::sparse_gaussian;
        if (s == "patch") return SourceKind::patch;
        throw std::invalid_argument("unknown source kind: " + s);
    }
};

// count x m sample matrix, one source vector per row.
inline std::vector<std::vector<double>> generate(const SourceSpec& spec, std::size_t count,
                                                 RngStream& rng) {
    if (spec.m == 0) throw std::invalid_argument("generate: source dimension must be > 0");
    if (!(spec.variance > 0.0)) throw std::invalid_argument("generate: variance must be > 0");
    std::vector<std::vector<double>> out(count, std::vector<double>(spec.m, 0.0));
    const double sigma = std::sqrt(spec.variance);
    switch (spec.kind) {
        case SourceKind::gaussian:
            for (auto& row : out)
                for (auto& x : row) x = rng.gaussian(sigma);
            break;
        case SourceKind::sparse_gaussian: {
            const std::size_t keep =
                std::min<std::size_t>(spec.m, std::size_t(std::ceil(spec.sparsity * double(spec.m))));
            std::vector<std::size_t> order(spec.m);
            for (auto& row : out) {
                for (auto& x : row) x = rng.gaussian(sigma);
                // keep the `keep` largest-magnitude coordinates, zero the rest
                for (std::size_t i = 0; i < spec.m; ++i) order[i] = i;
                std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                    return std::abs(row[a]) > std::abs(row[b]);
                });
                for (std::size_t i = keep; i < spec.m; ++i) row[order[i]] = 0.0;
            }
            break;
        }
        case SourceKind::patch: {
            // synthetic smooth grayscale patches in [0,1]: separable first-order
            // smoothing of white noise, squashed through a logistic map
            const std::size_t side = std::size_t(std::lround(std::sqrt(double(spec.m))));
            if (side * side != spec.m)
                throw std::invalid_argument("generate: patch source needs a square dimension");
            const double rho = 0.85;
            std::vector<double> field(spec.m);
            for (auto& row : out) {
                for (auto& x : field) x = rng.gaussian(1.0);
                for (std::size_t r = 0; r < side; ++r)
                    for (std::size_t c = 1; c < side; ++c)
                        field[r * side + c] =
                            rho * field[r * side + c - 1] + (1 - rho) * field[r * side + c];
                for (std::size_t c = 0; c < side; ++c)
                    for (std::size_t r = 1; r < side; ++r)
                        field[r * side + c] =
                            rho * field[(r - 1) * side + c] + (1 - rho) * field[r * side + c];
                for (std::size_t i = 0; i < spec.m; ++i)
                    row[i] = 1.0 / (1.0 + std::exp(-2.5 * field[i]));
            }
            break;
        }
    }
    return out;
}

struct QuantizerSpec {
    std::size_t bits_per_sample = 8;
    double lo = -4.0;
    double hi = 4.0;

    std::size_t levels() const { return std::size_t(1) << bits_per_sample; }
    double step() const { return (hi - lo) / double(levels()); }
};

struct QuantizeResult {
    BitVector bits;                 // m * bits_per_sample, MSB first per sample
    std::vector<double> dequantized;
};

// Uniform midrise quantizer over [lo, hi); out-of-range samples clamp to the
// edge cells.
inline QuantizeResult quantize(const QuantizerSpec& q, const std::vector<double>& x) {
    if (q.bits_per_sample < 1 || q.bits_per_sample > 24)
        throw std::invalid_argument("quantize: bits_per_sample out of range");
    if (!(q.lo < q.hi)) throw std::invalid_argument("quantize: lo must be < hi");
    QuantizeResult res;
    res.bits.reserve(x.size() * q.bits_per_sample);
    res.dequantized.resize(x.size());
    const double delta = q.step();
    const long long nlev = (long long)q.levels();
    for (std::size_t i = 0; i < x.size(); ++i) {
        long long idx = (long long)std::floor((x[i] - q.lo) / delta);
        idx = std::clamp(idx, 0LL, nlev - 1);
        res.dequantized[i] = q.lo + (double(idx) + 0.5) * delta;
        for (std::size_t b = 0; b < q.bits_per_sample; ++b)
            res.bits.push_back(std::uint8_t((idx >> (q.bits_per_sample - 1 - b)) & 1));
    }
    return res;
}

inline std::vector<double> dequantize(const QuantizerSpec& q, const BitVector& bits) {
    if (bits.size() % q.bits_per_sample != 0)
        throw std::invalid_argument("dequantize: bit count not divisible by bits_per_sample");
    const std::size_t m = bits.size() / q.bits_per_sample;
    std::vector<double> x(m);
    const double delta = q.step();
    for (std::size_t i = 0; i < m; ++i) {
        long long idx = 0;
        for (std::size_t b = 0; b < q.bits_per_sample; ++b)
            idx = (idx << 1) | bits[i * q.bits_per_sample + b];
        x[i] = q.lo + (double(idx) + 0.5) * delta;
    }
    return x;
}

struct Metrics {
    double mse = 0.0;       // per-dimension
    double mse_total = 0.0; // ||x - x_hat||^2, the distortion used by the bounds
    double psnr_db = 0.0;   // Peak = 1
    double nmse_db = 0.0;
};

inline Metrics metrics(const std::vector<double>& x, const std::vector<double>& x_hat) {
    if (x.size() != x_hat.size() || x.empty())
        throw std::invalid_argument("metrics: dimension mismatch");
    Metrics m;
    double se = 0.0, xe = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - x_hat[i];
        se += d * d;
        xe += x[i] * x[i];
    }
    m.mse_total = se;
    m.mse = se / double(x.size());
    m.psnr_db = se == 0.0 ? std::numeric_limits<double>::infinity()
                          : 10.0 * std::log10(1.0 / m.mse);
    if (xe == 0.0)
        m.nmse_db = std::numeric_limits<double>::quiet_NaN();
    else
        m.nmse_db = se == 0.0 ? -std::numeric_limits<double>::infinity()
                              : 10.0 * std::log10(se / xe);
    return m;
}

}  // namespace advcomm
