#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "core_math.hpp"
#include "deepjscc.hpp"
#include "vs_attack.hpp"  // AttackResult, AttackTraceFn

namespace advcomm {

struct PgaConfig {
    double alpha = 0.1;
    double eps_norm = 1e-8;
    std::size_t max_iters = 2000;
    double d_star = 0.0;  // total-MSE target
};

struct CwConfig {
    double c_init = 1.0;
    double c_min = 1e-6;
    double c_max = 100.0;
    double lr = 0.01;
    std::size_t max_iters = 2000;
    double kappa = 0.0;
    std::size_t rounds = 8;
    double d_star = 0.0;
};

// Exact ascent gradient of ||x - g(y)||^2 with respect to y.
inline std::vector<double> distortion_gradient(const DenseNetwork& decoder,
                                               const std::vector<double>& x,
                                               const std::vector<double>& y) {
    DenseNetwork::ForwardCache cache;
    const auto xhat = decoder.forward_cached(y, cache);
    if (xhat.size() != x.size()) throw std::invalid_argument("distortion_gradient: dim mismatch");
    std::vector<double> gout(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) gout[i] = 2.0 * (xhat[i] - x[i]);
    return decoder.input_gradient(cache, std::move(gout));
}

// Trajectory record used by the closed-form verification: y^(t) and the
// scalar coefficient multiplying J^T(g(y^(t)) - x) at each step.
struct PgaTrajectory {
    std::vector<std::vector<double>> y_history;  // y^(1) = r, then each iterate
    std::vector<double> coeffs;                  // 2*alpha/(||grad|| + eps) per step
};

// Progressive gradient ascent: normalized-gradient steps until the
// reconstruction distortion crosses d_star.
inline AttackResult pga_run(const DenseNetwork& decoder, const std::vector<double>& x,
                            const std::vector<double>& r, const PgaConfig& cfg,
                            PgaTrajectory* traj = nullptr, const AttackTraceFn& trace = {}) {
    AttackResult res;
    std::vector<double> y = r;
    if (traj) {
        traj->y_history.clear();
        traj->coeffs.clear();
        traj->y_history.push_back(y);
    }

    auto dist = [&](const std::vector<double>& yy) {
        const auto xh = decoder.forward(yy);
        double se = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - xh[i];
            se += d * d;
        }
        return se;
    };

    double d = dist(y);
    res.distortion_trace.push_back(d);
    if (trace) trace(0, 0.0, 0.0, d, true);
    if (d >= cfg.d_star) {
        res.success = true;
        return res;
    }

    for (std::size_t t = 1; t <= cfg.max_iters; ++t) {
        const auto grad = distortion_gradient(decoder, x, y);
        double gn = 0.0;
        for (double g : grad) gn += g * g;
        gn = std::sqrt(gn);
        const double step_scale = cfg.alpha / (gn + cfg.eps_norm);
        for (std::size_t j = 0; j < y.size(); ++j) y[j] += step_scale * grad[j];
        if (traj) {
            traj->coeffs.push_back(2.0 * cfg.alpha / (gn + cfg.eps_norm));
            traj->y_history.push_back(y);
        }
        d = dist(y);
        res.steps = t;
        res.distortion_trace.push_back(d);
        double rho = 0.0;
        for (std::size_t j = 0; j < y.size(); ++j) {
            const double s = y[j] - r[j];
            rho += s * s;
        }
        if (trace) trace(t, step_scale * gn * step_scale * gn, rho, d, true);
        if (d >= cfg.d_star) {
            res.success = true;
            res.rho_star = rho;
            return res;
        }
        res.rho_star = rho;
    }
    res.success = false;
    return res;
}

// Evaluates the product-form expression for the step s^(t):
//   s(t) = a_t J(y_t)^T [ prod_{i=1..t-1} (I + a_i J(y_i) J(y_i)^T) ] (g(y_1) - x)
// with the i = 0 factor equal to the identity. Exact for affine decoders;
// first-order in the step size otherwise.
inline std::vector<double> closed_form_perturbation(const DenseNetwork& decoder,
                                                    const std::vector<double>& x,
                                                    const std::vector<std::vector<double>>& y_history,
                                                    const std::vector<double>& coeffs,
                                                    std::size_t t) {
    if (t == 0 || t > coeffs.size() || t > y_history.size())
        throw std::invalid_argument("closed_form_perturbation: step index out of range");
    const std::size_t m = decoder.output_dim();

    const auto g1 = decoder.forward(y_history[0]);
    std::vector<double> v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = g1[i] - x[i];

    for (std::size_t i = 1; i < t; ++i) {
        // v <- (I + a_i J J^T) v, evaluated at y^(i)
        const RealMatrix ji = decoder.jacobian(y_history[i - 1]);
        const auto jt_v = matvec_t(ji, v);
        const auto jjt_v = matvec(ji, jt_v);
        for (std::size_t k = 0; k < m; ++k) v[k] += coeffs[i - 1] * jjt_v[k];
    }

    const RealMatrix jt = decoder.jacobian(y_history[t - 1]);
    auto s = matvec_t(jt, v);
    for (auto& e : s) e *= coeffs[t - 1];
    return s;
}

namespace detail {

struct AdamVec {
    std::vector<double> m, v;
    std::uint64_t t = 0;
    double lr, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    explicit AdamVec(std::size_t n, double lr_) : m(n, 0.0), v(n, 0.0), lr(lr_) {}

    void step(std::vector<double>& p, const std::vector<double>& g) {
        ++t;
        const double bc1 = 1.0 - std::pow(beta1, double(t));
        const double bc2 = 1.0 - std::pow(beta2, double(t));
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
        }
    }
};

}  // namespace detail

// Carlini-Wagner style baseline adapted to the regression target: minimize
// ||s||^2 + c * max(D* - D(r+s), -kappa), geometric c-search across rounds,
// each round stopping at its first crossing of the distortion target.
inline AttackResult cw_run(const DenseNetwork& decoder, const std::vector<double>& x,
                           const std::vector<double>& r, const CwConfig& cfg,
                           const AttackTraceFn& trace = {}) {
    AttackResult res;

    auto dist = [&](const std::vector<double>& yy) {
        const auto xh = decoder.forward(yy);
        double se = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - xh[i];
            se += d * d;
        }
        return se;
    };

    const double d0 = dist(r);
    res.distortion_trace.push_back(d0);
    if (d0 >= cfg.d_star) {  // nothing to do, the clean frame already exceeds the target
        res.success = true;
        return res;
    }

    double c = cfg.c_init;
    double best_rho = -1.0;
    std::size_t total_steps = 0;
    std::vector<double> y(r.size());

    for (std::size_t round = 0; round < cfg.rounds; ++round) {
        std::vector<double> s(r.size(), 0.0);
        detail::AdamVec opt(s.size(), cfg.lr);
        bool round_success = false;
        for (std::size_t it = 0; it < cfg.max_iters; ++it) {
            for (std::size_t j = 0; j < s.size(); ++j) y[j] = r[j] + s[j];
            const double d = dist(y);
            ++total_steps;
            if (d >= cfg.d_star) {
                double rho = 0.0;
                for (double e : s) rho += e * e;
                if (best_rho < 0.0 || rho < best_rho) best_rho = rho;
                round_success = true;
                if (trace) trace(total_steps, 0.0, rho, d, true);
                break;
            }
            // grad of ||s||^2 + c*max(D* - D, -kappa)
            std::vector<double> grad(s.size());
            const bool penalty_active = (cfg.d_star - d) > -cfg.kappa;
            std::vector<double> gd;
            if (penalty_active) gd = distortion_gradient(decoder, x, y);
            for (std::size_t j = 0; j < s.size(); ++j)
                grad[j] = 2.0 * s[j] - (penalty_active ? c * gd[j] : 0.0);
            opt.step(s, grad);
        }
        c = round_success ? c * 0.5 : c * 2.0;
        c = std::clamp(c, cfg.c_min, cfg.c_max);
    }

    res.steps = total_steps;
    if (best_rho >= 0.0) {
        res.success = true;
        res.rho_star = best_rho;
    } else {
        res.success = false;
        res.rho_star = 0.0;
    }
    return res;
}

}  // namespace advcomm
