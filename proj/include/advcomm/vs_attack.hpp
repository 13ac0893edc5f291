#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "chain.hpp"
#include "modem.hpp"
#include "vuln.hpp"

namespace advcomm {

enum class StopCondition { decode_failure, distortion };

struct VsAttackConfig {
    double eta_step = 0.01;      // per-iteration step size
    double extra_weight_e = 9.0; // vulnerable-set symbols get (1+e) times the step
    double eps_div = 1e-6;
    double fd_scale = 1e-6;
    std::size_t max_steps = 5000;
    StopCondition stop = StopCondition::decode_failure;
    double d_star = 0.0;  // total-MSE target for distortion mode
};

struct AttackResult {
    double rho_star = 0.0;
    std::size_t steps = 0;
    bool success = false;
    std::vector<double> distortion_trace;
};

// Per-step trace hook: (step, added_power, cum_power, objective, decoded_ok).
using AttackTraceFn = std::function<void(std::size_t, double, double, double, bool)>;

// f(r_i): sum of absolute LLRs over the bits mapped to one symbol, the
// decoder-confidence proxy the attack descends.
inline double symbol_confidence(const Constellation& c, std::complex<double> r_i,
                                double noise_var_eff) {
    double f = 0.0;
    for (double l : bit_llrs(c, r_i, noise_var_eff)) f += std::abs(l);
    return f;
}

// Symmetric finite-difference gradient of the confidence, with the step
// scaled by the symbol magnitude.
inline std::complex<double> fd_gradient(const Constellation& c, std::complex<double> r_i,
                                        double noise_var_eff, double fd_scale = 1e-6) {
    if (!(fd_scale > 0.0)) throw std::invalid_argument("fd_gradient: fd_scale must be > 0");
    const double eps = fd_scale * std::max(1.0, std::abs(r_i));
    const std::complex<double> dx(eps, 0.0), dy(0.0, eps);
    const double gx = (symbol_confidence(c, r_i + dx, noise_var_eff) -
                       symbol_confidence(c, r_i - dx, noise_var_eff)) /
                      (2.0 * eps);
    const double gy = (symbol_confidence(c, r_i + dy, noise_var_eff) -
                       symbol_confidence(c, r_i - dy, noise_var_eff)) /
                      (2.0 * eps);
    return {gx, gy};
}

// Marks each symbol whose mapped variable nodes intersect the vulnerable set.
inline std::vector<std::uint8_t> vulnerable_symbols(const VulnerabilityProfile& profile,
                                                    std::size_t n_bits,
                                                    std::size_t bits_per_symbol) {
    std::vector<std::uint8_t> flag(n_bits / bits_per_symbol, 0);
    for (std::size_t v : profile.vulnerable_set)
        if (v < n_bits) flag[v / bits_per_symbol] = 1;
    return flag;
}

// One perturbation step over every symbol: normalized descent direction of
// the confidence with extra weight on vulnerable-set symbols. Gradients come
// from the current perturbed signal, so the step adapts as the attack moves.
inline double vs_attack_step(SignalFrame& frame, const ClassicalChain& chain,
                             const std::vector<std::uint8_t>& vuln_symbol,
                             const VsAttackConfig& cfg) {
    const double nv = chain.channel.noise_var_eff();
    const double inv_h = 1.0 / chain.channel.h_mag;
    double added = 0.0;
    for (std::size_t i = 0; i < frame.perturbed.size(); ++i) {
        const std::complex<double> grad =
            fd_gradient(chain.constellation, frame.perturbed[i] * inv_h, nv, cfg.fd_scale);
        const double mag = std::abs(grad);
        const double weight = cfg.eta_step * (1.0 + cfg.extra_weight_e * (vuln_symbol[i] ? 1.0 : 0.0));
        const std::complex<double> step = weight * (-grad) / (mag + cfg.eps_div);
        frame.perturbed[i] += step;
        added += std::norm(step);
    }
    return added;
}

inline double total_confidence(const SignalFrame& frame, const ClassicalChain& chain) {
    const double nv = chain.channel.noise_var_eff();
    const double inv_h = 1.0 / chain.channel.h_mag;
    double f = 0.0;
    for (const auto& y : frame.perturbed)
        f += symbol_confidence(chain.constellation, y * inv_h, nv);
    return f;
}

// Iterates perturbation steps, re-demapping and re-decoding after each one,
// until the decoder fails (or the distortion target is reached) and reports
// the accumulated power as rho*.
inline AttackResult run_vs_attack(SignalFrame& frame, const ClassicalChain& chain,
                                  const VulnerabilityProfile& profile, const VsAttackConfig& cfg,
                                  const std::vector<double>& x_ref,
                                  const AttackTraceFn& trace = {}) {
    AttackResult res;
    const auto vuln_symbol =
        vulnerable_symbols(profile, chain.h.n, chain.constellation.bits_per_symbol);

    auto stopped = [&](const ClassicalDecodeResult& d) {
        if (cfg.stop == StopCondition::decode_failure) return !d.converged;
        return d.distortion_total >= cfg.d_star;
    };

    ClassicalDecodeResult dec = chain.receive(x_ref, frame.perturbed);
    res.distortion_trace.push_back(dec.distortion_total);
    if (trace) trace(0, 0.0, 0.0, dec.distortion_total, dec.converged);
    if (stopped(dec)) {  // target already violated by the clean frame
        res.success = true;
        res.rho_star = 0.0;
        return res;
    }

    double cum_power = 0.0;
    for (std::size_t t = 1; t <= cfg.max_steps; ++t) {
        const double added = vs_attack_step(frame, chain, vuln_symbol, cfg);
        cum_power = frame.attack_power();
        dec = chain.receive(x_ref, frame.perturbed);
        res.steps = t;
        res.distortion_trace.push_back(dec.distortion_total);
        if (trace) trace(t, added, cum_power, dec.distortion_total, dec.converged);
        if (stopped(dec)) {
            res.success = true;
            res.rho_star = cum_power;
            return res;
        }
    }
    res.success = false;
    res.rho_star = cum_power;
    return res;
}

}  // namespace advcomm
