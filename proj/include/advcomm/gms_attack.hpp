#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "chain.hpp"
#include "core_math.hpp"
#include "deepjscc.hpp"

namespace advcomm {

struct GmsConfig {
    double alpha_mix = 0.3;
    std::size_t episode_cap = 200;
    double d_star = 0.0;  // total-MSE termination target

    // DQN hyperparameters
    std::size_t buffer_capacity = 10000;
    std::size_t batch_size = 64;
    double gamma = 0.99;
    double lr = 3e-4;
    std::size_t total_timesteps = 10000;
    double eps_start = 1.0;
    double eps_end = 0.05;
    double eps_fraction = 0.5;  // fraction of timesteps spent annealing
    std::size_t target_sync = 1000;
    std::size_t learn_start = 1000;
    std::size_t hidden = 256;
};

inline std::size_t gms_block_size(std::size_t n_symbols) {
    std::size_t b = 0;
    while ((std::size_t(1) << b) < n_symbols) ++b;
    return std::max<std::size_t>(1, b);  // ceil(log2 n)
}

// Block-perturbation MDP over one received frame. An action picks the start
// of a contiguous symbol block (wrapping modulo the frame length); the block
// is mixed with Gaussian noise whose variance matches its current power.
class GmsEnv {
public:
    GmsEnv(const ClassicalChain& chain, std::vector<double> x, SignalFrame frame, double d_star,
           double alpha_mix)
        : chain_(&chain),
          x_(std::move(x)),
          frame_(std::move(frame)),
          d_star_(d_star),
          alpha_(alpha_mix),
          block_(gms_block_size(frame_.clean.size())) {}

    std::size_t n_actions() const { return frame_.clean.size(); }
    std::size_t block_size() const { return block_; }
    double attack_power() const { return frame_.attack_power(); }
    const SignalFrame& frame() const { return frame_; }

    std::vector<double> state() const {
        std::vector<double> s(2 * frame_.perturbed.size());
        for (std::size_t i = 0; i < frame_.perturbed.size(); ++i) {
            s[2 * i] = frame_.perturbed[i].real();
            s[2 * i + 1] = frame_.perturbed[i].imag();
        }
        return s;
    }

    struct StepOut {
        double reward = 0.0;
        bool done = false;
        double distortion = 0.0;
    };

    StepOut step(std::size_t action, RngStream& rng) {
        if (action >= n_actions()) throw std::invalid_argument("gms step: action out of range");
        const std::size_t n = frame_.perturbed.size();
        const double power_before = frame_.attack_power();

        double sigma2 = 0.0;
        for (std::size_t k = 0; k < block_; ++k)
            sigma2 += std::norm(frame_.perturbed[(action + k) % n]);
        sigma2 /= double(block_);

        const double comp_sigma = std::sqrt(sigma2 / 2.0);
        for (std::size_t k = 0; k < block_; ++k) {
            const std::size_t j = (action + k) % n;
            const std::complex<double> noise(rng.gaussian(comp_sigma), rng.gaussian(comp_sigma));
            frame_.perturbed[j] = (1.0 - alpha_) * frame_.perturbed[j] + alpha_ * noise;
        }

        StepOut out;
        out.reward = power_before - frame_.attack_power();
        const auto dec = chain_->receive(x_, frame_.perturbed);
        out.distortion = dec.distortion_total;
        out.done = dec.distortion_total >= d_star_;
        return out;
    }

private:
    const ClassicalChain* chain_;
    std::vector<double> x_;
    SignalFrame frame_;
    double d_star_;
    double alpha_;
    std::size_t block_;
};

struct Transition {
    std::vector<float> state, next_state;
    std::uint32_t action = 0;
    float reward = 0.0f;
    bool done = false;
};

// Fixed-capacity ring buffer with uniform sampling over current occupancy.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    void push(Transition t) {
        if (buffer_.size() < capacity_) {
            buffer_.push_back(std::move(t));
        } else {
            buffer_[pos_] = std::move(t);
        }
        pos_ = (pos_ + 1) % capacity_;
    }

    std::size_t size() const { return buffer_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& sample(RngStream& rng) const { return buffer_[rng.next_below(buffer_.size())]; }

private:
    std::size_t capacity_;
    std::size_t pos_ = 0;
    std::vector<Transition> buffer_;
};

// DQN agent: value network and target copy, epsilon-greedy behaviour, Huber
// loss on the one-step temporal-difference error.
class QAgent {
public:
    QAgent(std::size_t state_dim, std::size_t n_actions, const GmsConfig& cfg, RngStream& rng)
        : cfg_(cfg),
          replay_(cfg.buffer_capacity),
          opt_(cfg.lr, 0.0) {
        q_ = DenseNetwork::mlp({state_dim, cfg.hidden, cfg.hidden, n_actions}, Activation::relu,
                               Activation::linear, rng);
        target_ = q_;
    }

    const DenseNetwork& network() const { return q_; }
    DenseNetwork& network() { return q_; }
    ReplayBuffer& replay() { return replay_; }

    std::size_t greedy_action(const std::vector<double>& state) const {
        const auto qv = q_.forward(state);
        std::size_t best = 0;
        for (std::size_t a = 1; a < qv.size(); ++a)
            if (qv[a] > qv[best]) best = a;
        return best;
    }

    std::size_t act(const std::vector<double>& state, double epsilon, RngStream& rng) const {
        if (rng.uniform() < epsilon) return rng.next_below(q_.output_dim());
        return greedy_action(state);
    }

    void remember(const std::vector<double>& s, std::size_t a, double r,
                  const std::vector<double>& s2, bool done) {
        Transition t;
        t.state.assign(s.begin(), s.end());
        t.next_state.assign(s2.begin(), s2.end());
        t.action = std::uint32_t(a);
        t.reward = float(r);
        t.done = done;
        replay_.push(std::move(t));
    }

    double learn(RngStream& rng) {
        if (replay_.size() < cfg_.batch_size) return 0.0;
        q_.zero_gradients(grads_);
        double loss = 0.0;
        std::vector<double> s, s2;
        for (std::size_t b = 0; b < cfg_.batch_size; ++b) {
            const Transition& tr = replay_.sample(rng);
            s.assign(tr.state.begin(), tr.state.end());
            s2.assign(tr.next_state.begin(), tr.next_state.end());

            double target = tr.reward;
            if (!tr.done) {
                const auto q2 = target_.forward(s2);
                double mx = q2[0];
                for (double v : q2) mx = std::max(mx, v);
                target += cfg_.gamma * mx;
            }

            DenseNetwork::ForwardCache cache;
            const auto qv = q_.forward_cached(s, cache);
            const double diff = qv[tr.action] - target;
            // Huber with delta = 1
            const double dloss = std::clamp(diff, -1.0, 1.0);
            loss += std::abs(diff) <= 1.0 ? 0.5 * diff * diff : std::abs(diff) - 0.5;
            std::vector<double> gout(qv.size(), 0.0);
            gout[tr.action] = dloss / double(cfg_.batch_size);
            q_.backward(cache, std::move(gout), grads_);
        }
        if (!std::isfinite(loss))
            throw std::runtime_error("gms training: loss diverged (NaN/inf)");
        opt_.step(q_, grads_);
        return loss / double(cfg_.batch_size);
    }

    void sync_target() { target_ = q_; }

private:
    GmsConfig cfg_;
    DenseNetwork q_, target_;
    ReplayBuffer replay_;
    AdamW opt_;
    NetGradients grads_;
};

using GmsEnvFactory = std::function<GmsEnv(std::size_t episode_index)>;

struct GmsTrainResult {
    std::vector<double> episode_powers;   // attack power of each finished episode
    std::vector<double> episode_returns;  // telescoped rewards
    std::vector<std::size_t> episode_lengths;
    std::size_t capped_episodes = 0;
};

inline double gms_epsilon(const GmsConfig& cfg, std::size_t step) {
    const double horizon = cfg.eps_fraction * double(cfg.total_timesteps);
    if (horizon <= 0.0 || double(step) >= horizon) return cfg.eps_end;
    return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * double(step) / horizon;
}

inline GmsTrainResult train_gms(QAgent& agent, const GmsEnvFactory& make_env, const GmsConfig& cfg,
                                RngStream& rng) {
    GmsTrainResult result;
    std::size_t episode = 0;
    GmsEnv env = make_env(episode);
    std::vector<double> state = env.state();
    std::size_t ep_steps = 0;
    double ep_return = 0.0;

    for (std::size_t step = 0; step < cfg.total_timesteps; ++step) {
        const double eps = gms_epsilon(cfg, step);
        const std::size_t action = agent.act(state, eps, rng);
        const auto out = env.step(action, rng);
        const auto next_state = env.state();
        agent.remember(state, action, out.reward, next_state, out.done);
        state = next_state;
        ep_return += out.reward;
        ++ep_steps;

        if (agent.replay().size() >= std::max(cfg.learn_start, cfg.batch_size))
            agent.learn(rng);
        if ((step + 1) % cfg.target_sync == 0) agent.sync_target();

        const bool capped = ep_steps >= cfg.episode_cap;
        if (out.done || capped) {
            result.episode_powers.push_back(env.attack_power());
            result.episode_returns.push_back(ep_return);
            result.episode_lengths.push_back(ep_steps);
            if (capped && !out.done) ++result.capped_episodes;
            ++episode;
            env = make_env(episode);
            state = env.state();
            ep_steps = 0;
            ep_return = 0.0;
        }
    }
    return result;
}

struct GmsEvalResult {
    double mean_rho = 0.0;
    double stderr_rho = 0.0;
    std::vector<double> powers;  // per completed episode
    std::size_t capped = 0;
};

using GmsPolicy = std::function<std::size_t(const std::vector<double>&, RngStream&)>;

inline GmsEvalResult evaluate_gms_policy(const GmsPolicy& policy, const GmsEnvFactory& make_env,
                                         std::size_t episodes, std::size_t episode_cap,
                                         RngStream& rng) {
    GmsEvalResult res;
    for (std::size_t e = 0; e < episodes; ++e) {
        GmsEnv env = make_env(e);
        bool done = false;
        for (std::size_t t = 0; t < episode_cap && !done; ++t) {
            const auto s = env.state();
            done = env.step(policy(s, rng), rng).done;
        }
        if (done)
            res.powers.push_back(env.attack_power());
        else
            ++res.capped;
    }
    if (res.powers.empty())
        throw std::runtime_error("evaluate_gms: every episode hit the step cap");
    double sum = 0.0;
    for (double p : res.powers) sum += p;
    res.mean_rho = sum / double(res.powers.size());
    double var = 0.0;
    for (double p : res.powers) var += (p - res.mean_rho) * (p - res.mean_rho);
    if (res.powers.size() > 1) {
        var /= double(res.powers.size() - 1);
        res.stderr_rho = std::sqrt(var / double(res.powers.size()));
    }
    return res;
}

}  // namespace advcomm
