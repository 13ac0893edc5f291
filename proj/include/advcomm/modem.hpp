#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "core_math.hpp"
#include "ldpc.hpp"

namespace advcomm {

constexpr double kLlrClip = 25.0;

// Gray-labelled unit-average-power constellation. Labels are indexed by the
// bit tuple read MSB-first, so point_for(bits) is a direct lookup.
struct Constellation {
    std::size_t order = 0;                  // 4 or 16
    std::size_t bits_per_symbol = 0;        // B
    std::vector<std::complex<double>> points;  // indexed by label value
    std::string name;

    static Constellation qpsk() {
        Constellation c;
        c.order = 4;
        c.bits_per_symbol = 2;
        c.name = "qpsk";
        const double a = 1.0 / std::sqrt(2.0);
        c.points.resize(4);
        // bit 0 on I, bit 1 on Q; bit value 0 maps to the positive level
        for (std::size_t label = 0; label < 4; ++label) {
            const double i = (label & 2) ? -a : a;
            const double q = (label & 1) ? -a : a;
            c.points[label] = {i, q};
        }
        return c;
    }

    static Constellation qam16() {
        Constellation c;
        c.order = 16;
        c.bits_per_symbol = 4;
        c.name = "16qam";
        const double s = 1.0 / std::sqrt(10.0);
        // per-axis Gray map on 2 bits: 00->+3, 01->+1, 11->-1, 10->-3
        auto axis = [s](unsigned b) {
            switch (b) {
                case 0: return 3.0 * s;
                case 1: return 1.0 * s;
                case 3: return -1.0 * s;
                default: return -3.0 * s;
            }
        };
        c.points.resize(16);
        for (std::size_t label = 0; label < 16; ++label) {
            const unsigned bi = unsigned(label >> 2) & 3u;  // bits 0,1 -> I
            const unsigned bq = unsigned(label) & 3u;       // bits 2,3 -> Q
            c.points[label] = {axis(bi), axis(bq)};
        }
        return c;
    }

    static Constellation by_name(const std::string& name) {
        if (name == "qpsk") return qpsk();
        if (name == "16qam" || name == "qam16") return qam16();
        throw std::invalid_argument("unknown constellation: " + name);
    }
};

// Flat-fading AWGN channel parameters. noise_var is the total noise variance
// per complex symbol, split equally across I and Q, so the received SNR is
// h_mag^2 / noise_var regardless of the I/Q split.
struct ChannelParams {
    double h_mag = 1.0;
    double noise_var = 1.0;

    static ChannelParams from_snr_db(double snr_db, double h_mag = 1.0) {
        ChannelParams p;
        p.h_mag = h_mag;
        p.noise_var = h_mag * h_mag / std::pow(10.0, snr_db / 10.0);
        return p;
    }

    double snr_linear() const { return h_mag * h_mag / noise_var; }
    double snr_db() const { return 10.0 * std::log10(snr_linear()); }
    // effective noise variance after dividing the received signal by |h|
    double noise_var_eff() const { return noise_var / (h_mag * h_mag); }
};

inline ComplexVector modulate(const Constellation& c, const BitVector& bits) {
    if (bits.size() % c.bits_per_symbol != 0)
        throw std::invalid_argument("modulate: bit count not divisible by bits/symbol");
    ComplexVector out(bits.size() / c.bits_per_symbol);
    for (std::size_t s = 0; s < out.size(); ++s) {
        std::size_t label = 0;
        for (std::size_t b = 0; b < c.bits_per_symbol; ++b)
            label = (label << 1) | bits[s * c.bits_per_symbol + b];
        out[s] = c.points[label];
    }
    return out;
}

// Exact log-sum bit LLRs for one symbol, clipped to +/-25. The caller passes
// the receiver-side normalized symbol y = r/|h| and noise_var_eff.
inline std::vector<double> bit_llrs(const Constellation& c, std::complex<double> y,
                                    double noise_var_eff) {
    if (!(noise_var_eff > 0.0)) throw std::invalid_argument("bit_llrs: noise variance must be > 0");
    const std::size_t B = c.bits_per_symbol;
    std::vector<double> metric(c.order);
    double best = -1e308;
    for (std::size_t p = 0; p < c.order; ++p) {
        metric[p] = -std::norm(y - c.points[p]) / noise_var_eff;
        best = std::max(best, metric[p]);
    }
    std::vector<double> llrs(B);
    for (std::size_t b = 0; b < B; ++b) {
        double s0 = 0.0, s1 = 0.0;
        const std::size_t mask = std::size_t(1) << (B - 1 - b);
        for (std::size_t p = 0; p < c.order; ++p) {
            const double e = std::exp(metric[p] - best);
            if (p & mask)
                s1 += e;
            else
                s0 += e;
        }
        llrs[b] = std::clamp(std::log(s0) - std::log(s1), -kLlrClip, kLlrClip);
    }
    return llrs;
}

inline std::size_t hard_demap(const Constellation& c, std::complex<double> y) {
    std::size_t best = 0;
    double bd = std::norm(y - c.points[0]);
    for (std::size_t p = 1; p < c.order; ++p) {
        const double d = std::norm(y - c.points[p]);
        if (d < bd) {
            bd = d;
            best = p;
        }
    }
    return best;
}

inline ComplexVector transmit(const ComplexVector& z, const ChannelParams& p, RngStream& rng) {
    ComplexVector r(z.size());
    const double comp_sigma = std::sqrt(p.noise_var / 2.0);
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double wr = rng.gaussian(comp_sigma);
        const double wi = rng.gaussian(comp_sigma);
        r[i] = p.h_mag * z[i] + std::complex<double>(wr, wi);
    }
    return r;
}

// LLRs for a whole frame of received symbols; output is bit-ordered to feed
// bp_decode directly.
inline LlrVector demap_frame(const Constellation& c, const ComplexVector& received,
                             const ChannelParams& p) {
    LlrVector llr;
    llr.values.resize(received.size() * c.bits_per_symbol);
    const double nv = p.noise_var_eff();
    const double inv_h = 1.0 / p.h_mag;
    for (std::size_t s = 0; s < received.size(); ++s) {
        const auto ls = bit_llrs(c, received[s] * inv_h, nv);
        for (std::size_t b = 0; b < c.bits_per_symbol; ++b)
            llr.values[s * c.bits_per_symbol + b] = ls[b];
    }
    return llr;
}

}  // namespace advcomm
