#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "core_math.hpp"
#include "ldpc.hpp"
#include "modem.hpp"
#include "quantizer_source.hpp"

namespace advcomm {

// Complex baseband frame with its clean and perturbed views; the accumulated
// attack is perturbed - clean.
struct SignalFrame {
    ComplexVector clean;
    ComplexVector perturbed;

    double attack_power() const {
        double p = 0.0;
        for (std::size_t i = 0; i < clean.size(); ++i) p += std::norm(perturbed[i] - clean[i]);
        return p;
    }
};

struct ClassicalDecodeResult {
    bool converged = false;
    std::size_t iters_used = 0;
    std::vector<double> x_hat;      // zeros when decoding fails (erasure)
    double distortion_total = 0.0;  // ||x - x_hat||^2
};

// Quantize -> LDPC encode -> Gray modulation -> flat-fading AWGN, and the
// matching receiver. A decoding failure is scored as an erasure (x_hat = 0),
// which puts it on the same distortion scale as the semantic chain.
struct ClassicalChain {
    ParityCheckMatrix h;
    GeneratorMatrix gen;
    Constellation constellation;
    ChannelParams channel;
    QuantizerSpec quant;
    std::size_t source_dim = 0;
    std::size_t bp_max_iters = 50;

    std::size_t symbol_count() const { return h.n / constellation.bits_per_symbol; }

    void validate() const {
        if (h.n % constellation.bits_per_symbol != 0)
            throw std::invalid_argument("classical chain: n not divisible by bits/symbol");
        if (source_dim * quant.bits_per_sample > gen.k)
            throw std::invalid_argument("classical chain: quantized bits exceed code dimension");
    }

    BitVector encode_source(const std::vector<double>& x) const {
        if (x.size() != source_dim) throw std::invalid_argument("encode_source: dimension mismatch");
        BitVector info = quantize(quant, x).bits;
        info.resize(gen.k, 0);  // zero padding when the code has spare dimension
        return advcomm::encode(gen, info);
    }

    SignalFrame make_frame(const std::vector<double>& x, RngStream& rng) const {
        const BitVector cw = encode_source(x);
        const ComplexVector z = modulate(constellation, cw);
        SignalFrame f;
        f.clean = transmit(z, channel, rng);
        f.perturbed = f.clean;
        return f;
    }

    ClassicalDecodeResult receive(const std::vector<double>& x_ref,
                                  const ComplexVector& y) const {
        const LlrVector llr = demap_frame(constellation, y, channel);
        const BpResult bp = bp_decode(h, llr, bp_max_iters);
        ClassicalDecodeResult res;
        res.converged = bp.converged;
        res.iters_used = bp.iters_used;
        if (bp.converged) {
            // pull the systematic info bits back out and dequantize
            const std::size_t rank = gen.n - gen.k;
            BitVector info(gen.k, 0);
            for (std::size_t j = 0; j < gen.k; ++j) info[j] = bp.bits[gen.perm[rank + j]];
            info.resize(source_dim * quant.bits_per_sample);
            res.x_hat = dequantize(quant, info);
        } else {
            res.x_hat.assign(source_dim, 0.0);
        }
        double se = 0.0;
        for (std::size_t i = 0; i < source_dim; ++i) {
            const double d = x_ref[i] - res.x_hat[i];
            se += d * d;
        }
        res.distortion_total = se;
        return res;
    }
};

}  // namespace advcomm
