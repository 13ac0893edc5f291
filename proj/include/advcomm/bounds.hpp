#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace advcomm {

// Parameters of one system configuration as seen by the bound formulas. N is
// that system's channel-use count (complex symbols for the classical chain,
// real dimensions for the semantic one) with sigma_w2 the noise variance per
// use; distortion is total squared error.
struct SystemParams {
    double m = 0.0;         // source dimension
    double n = 0.0;         // channel uses
    double sigma_w2 = 0.0;  // noise variance per channel use
    double eta = 0.0;       // nominal SNR, linear
    double lipschitz_g = 0.0;
    double theta_x = 0.0;   // entropy power of the source
    double d_star = 0.0;    // target total distortion
};

// Gaussian source: entropy power equals the per-dimension variance.
inline double entropy_power_gaussian(double variance_per_dim) {
    if (!(variance_per_dim > 0.0))
        throw std::invalid_argument("entropy_power_gaussian: variance must be > 0");
    return variance_per_dim;
}

// Minimum attack power against the semantic chain: zero when the bracket is
// negative (the bound is vacuous there).
inline double sem_attack_lower_bound(const SystemParams& p) {
    if (!(p.lipschitz_g > 0.0)) throw std::invalid_argument("sem bound: G must be > 0");
    const double bracket = std::sqrt(p.d_star) / p.lipschitz_g - std::sqrt(p.n * p.sigma_w2);
    return bracket <= 0.0 ? 0.0 : bracket * bracket;
}

// AWGN-attack upper bound for the classical chain. Empty for d_star >= M*Theta
// (regime III: no finite positive bound); the returned value can be negative
// (regime I: the chain fails the target with no attack at all).
inline std::optional<double> sscc_attack_upper_bound(const SystemParams& p) {
    const double m_theta = p.m * p.theta_x;
    if (p.d_star >= m_theta) return std::nullopt;
    const double denom = std::pow(m_theta / p.d_star, p.m / p.n) - 1.0;
    return p.eta * p.n * p.sigma_w2 / denom - p.n * p.sigma_w2;
}

// Channel capacity (nats) with an AWGN attack of power rho_a on top of the
// channel noise.
inline double capacity_under_attack(const SystemParams& p, double rho_a) {
    return 0.5 * p.n * std::log(1.0 + p.eta * p.n * p.sigma_w2 / (p.n * p.sigma_w2 + rho_a));
}

enum class Regime { one, two, three };

struct RegimeReport {
    Regime regime = Regime::one;
    double lhs = 0.0;             // semantic lower bound
    double rhs = 0.0;             // classical-side expression
    bool condition_holds = false; // lhs >= rhs
    double boundary_low = 0.0;    // M*Theta*(eta+1)^(-N/M)
    double boundary_high = 0.0;   // M*Theta
};

// Sufficient condition for the semantic chain to need at least as much attack
// power as the classical one, classified into the three target-distortion
// regimes.
inline RegimeReport robustness_condition(const SystemParams& p) {
    RegimeReport rep;
    const double m_theta = p.m * p.theta_x;
    rep.boundary_low = m_theta * std::exp(-(p.n / p.m) * std::log1p(p.eta));
    rep.boundary_high = m_theta;
    if (p.d_star < rep.boundary_low)
        rep.regime = Regime::one;
    else if (p.d_star < rep.boundary_high)
        rep.regime = Regime::two;
    else
        rep.regime = Regime::three;

    rep.lhs = sem_attack_lower_bound(p);
    if (rep.regime == Regime::three) {
        rep.rhs = -std::numeric_limits<double>::infinity();
    } else {
        const double denom = std::pow(m_theta / p.d_star, p.m / p.n) - 1.0;
        rep.rhs = (p.eta / denom - 1.0) * p.n * p.sigma_w2;
    }
    rep.condition_holds = rep.lhs >= rep.rhs;
    return rep;
}

struct DSem0Prediction {
    double predicted = 0.0;    // sigma^2 * mean over samples of sum_i sv_i^2
    double upper_bound = 0.0;  // N * sigma^2 * G_hat^2
    double g_hat = 0.0;
};

// Noise-induced distortion predicted from decoder Jacobian spectra.
inline DSem0Prediction d_sem0_predict(
    const std::vector<std::vector<double>>& jacobian_singular_values_per_sample, double sigma_w2,
    double n_channel) {
    if (jacobian_singular_values_per_sample.empty())
        throw std::invalid_argument("d_sem0_predict: no samples");
    DSem0Prediction out;
    double mean_sum = 0.0;
    for (const auto& svs : jacobian_singular_values_per_sample) {
        double s = 0.0;
        for (double sv : svs) {
            s += sv * sv;
            out.g_hat = std::max(out.g_hat, sv);
        }
        mean_sum += s;
    }
    mean_sum /= double(jacobian_singular_values_per_sample.size());
    out.predicted = sigma_w2 * mean_sum;
    out.upper_bound = n_channel * sigma_w2 * out.g_hat * out.g_hat;
    return out;
}

// Kozachenko-Leonenko nearest-neighbour differential entropy, used to flag an
// approximate entropy power for sources without an analytic value.
inline double entropy_power_knn(const std::vector<std::vector<double>>& samples) {
    const std::size_t n = samples.size();
    if (n < 8) throw std::invalid_argument("entropy_power_knn: need at least 8 samples");
    const std::size_t d = samples[0].size();
    double sum_log = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double dist = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = samples[i][k] - samples[j][k];
                dist += diff * diff;
            }
            best = std::min(best, dist);
        }
        sum_log += 0.5 * std::log(std::max(best, 1e-300));
    }
    const double pi = 3.14159265358979323846;
    const double euler_gamma = 0.57721566490153286;
    const double log_unit_ball =
        0.5 * double(d) * std::log(pi) - std::lgamma(0.5 * double(d) + 1.0);
    const double h = double(d) * sum_log / double(n) + log_unit_ball + euler_gamma +
                     std::log(double(n - 1));
    return std::exp(2.0 * h / double(d)) / (2.0 * pi * std::exp(1.0));
}

}  // namespace advcomm
