#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "core_math.hpp"
#include "ldpc.hpp"

namespace advcomm {

struct FeatureWeights {
    double w_deg = 0.0;
    double w_hop = 1.0;
    double w_cyc = 0.35;
    double w_svd = 0.25;
};

struct VulnerabilityProfile {
    std::vector<double> phi_deg, phi_hop, phi_cyc, phi_svd;  // raw features
    std::vector<double> phi;                                 // fused score
    double tau = 0.0;
    std::vector<std::size_t> vulnerable_set;  // sorted indices with phi >= tau
    FeatureWeights weights;
    std::size_t svd_k_used = 0;
};

inline std::vector<double> degree_feature(const ParityCheckMatrix& h) {
    std::vector<double> f(h.n, 0.0);
    for (std::size_t v = 0; v < h.n; ++v) f[v] = double(h.cols[v].size());
    return f;
}

inline std::vector<double> two_hop_feature(const ParityCheckMatrix& h) {
    std::vector<double> f(h.n, 0.0);
    std::vector<std::uint8_t> seen(h.n, 0);
    std::vector<std::size_t> touched;
    for (std::size_t v = 0; v < h.n; ++v) {
        touched.clear();
        for (std::size_t c : h.cols[v]) {
            for (std::size_t u : h.rows[c]) {
                if (u == v || seen[u]) continue;
                seen[u] = 1;
                touched.push_back(u);
            }
        }
        f[v] = double(touched.size());
        for (std::size_t u : touched) seen[u] = 0;
    }
    return f;
}

// phi_cyc(i) = sum_j C(K_ij, 2) with K_ij the number of checks shared by
// variable nodes i and j; counts the 4-cycles node i participates in.
inline std::vector<double> four_cycle_feature(const ParityCheckMatrix& h) {
    std::vector<double> f(h.n, 0.0);
    std::unordered_map<std::size_t, std::size_t> shared;
    for (std::size_t v = 0; v < h.n; ++v) {
        shared.clear();
        for (std::size_t c : h.cols[v])
            for (std::size_t u : h.rows[c])
                if (u != v) ++shared[u];
        double total = 0.0;
        for (const auto& [u, k] : shared) total += 0.5 * double(k) * double(k - 1);
        f[v] = total;
    }
    return f;
}

namespace detail {

// k is chosen just before the largest gap ratio among the smallest ceil(r/4)
// singular values; a flat curve (max ratio < 1.5) falls back to ceil(r/10).
inline std::size_t svd_elbow_k(const std::vector<double>& sv, std::size_t r) {
    if (r == 0) return 0;
    const std::size_t window = (r + 3) / 4;
    std::size_t best_k = 0;
    double best_ratio = 0.0;
    for (std::size_t k = 1; k <= window && k < r; ++k) {
        // ratio between the (k+1)-th smallest and the k-th smallest value
        const double hi = sv[r - k - 1];
        const double lo = sv[r - k];
        if (lo <= 0.0) continue;
        const double ratio = hi / lo;
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best_k = k;
        }
    }
    if (best_ratio < 1.5 || best_k == 0) return std::max<std::size_t>(1, (r + 9) / 10);
    return best_k;
}

}  // namespace detail

struct SvdFeatureResult {
    std::vector<double> feature;
    std::size_t k_used = 0;
};

// Participation in weakly constrained directions: sums |V_{j,i}|/(sigma_i+eps)
// over the k smallest nonzero singular values of H viewed as a real matrix.
inline SvdFeatureResult svd_feature(const ParityCheckMatrix& h, double eps = 1e-6) {
    if (!(eps > 0.0)) throw std::invalid_argument("svd_feature: eps must be > 0");
    SvdFeatureResult out;
    out.feature.assign(h.n, 0.0);

    RealMatrix hm(h.m, h.n);
    bool any = false;
    for (std::size_t c = 0; c < h.m; ++c)
        for (std::size_t v : h.rows[c]) {
            hm(c, v) = 1.0;
            any = true;
        }
    if (!any) return out;  // all-zero H

    const SvdResult dec = svd(hm);
    const double smax = dec.s.empty() ? 0.0 : dec.s.front();
    std::size_t r = 0;
    while (r < dec.s.size() && dec.s[r] > 1e-10 * smax) ++r;
    if (r == 0) return out;

    const std::size_t k = detail::svd_elbow_k(dec.s, r);
    out.k_used = k;
    for (std::size_t i = 1; i <= k; ++i) {
        const std::size_t col = r - i;  // r-i+1 in 1-based terms
        const double denom = dec.s[col] + eps;
        for (std::size_t j = 0; j < h.n; ++j)
            out.feature[j] += std::abs(dec.v(j, col)) / denom;
    }
    return out;
}

inline std::vector<double> min_max_normalize(const std::vector<double>& f) {
    if (f.empty()) return {};
    const auto [mn_it, mx_it] = std::minmax_element(f.begin(), f.end());
    const double mn = *mn_it, mx = *mx_it;
    std::vector<double> out(f.size(), 0.0);
    if (mx > mn)
        for (std::size_t i = 0; i < f.size(); ++i) out[i] = (f[i] - mn) / (mx - mn);
    return out;  // constant feature normalizes to all zeros
}

// Linear interpolation between order statistics, values must be sorted.
inline double percentile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("percentile: empty input");
    if (sorted.size() == 1) return sorted[0];
    const double rank = std::clamp(p, 0.0, 100.0) / 100.0 * double(sorted.size() - 1);
    const std::size_t lo = std::size_t(rank);
    const double frac = rank - double(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double percentile(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    return percentile_sorted(values, p);
}

// Min-max normalizes each feature, fuses with the given weights, and selects
// the vulnerable set by the adaptive threshold tau clipped into [P70, P95].
inline VulnerabilityProfile fuse_and_select(const std::vector<double>& f_deg,
                                            const std::vector<double>& f_hop,
                                            const std::vector<double>& f_cyc,
                                            const std::vector<double>& f_svd,
                                            const FeatureWeights& w) {
    const std::size_t n = f_deg.size();
    if (n == 0) throw std::invalid_argument("fuse_and_select: empty features");
    if (f_hop.size() != n || f_cyc.size() != n || f_svd.size() != n)
        throw std::invalid_argument("fuse_and_select: feature length mismatch");

    VulnerabilityProfile prof;
    prof.weights = w;
    prof.phi_deg = f_deg;
    prof.phi_hop = f_hop;
    prof.phi_cyc = f_cyc;
    prof.phi_svd = f_svd;

    const auto nd = min_max_normalize(f_deg);
    const auto nh = min_max_normalize(f_hop);
    const auto nc = min_max_normalize(f_cyc);
    const auto ns = min_max_normalize(f_svd);

    prof.phi.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        prof.phi[i] = w.w_deg * nd[i] + w.w_hop * nh[i] + w.w_cyc * nc[i] + w.w_svd * ns[i];

    double mean = 0.0;
    for (double x : prof.phi) mean += x;
    mean /= double(n);
    double var = 0.0;
    for (double x : prof.phi) var += (x - mean) * (x - mean);
    var /= double(n);
    const double sd = std::sqrt(var);

    std::vector<double> sorted = prof.phi;
    std::sort(sorted.begin(), sorted.end());
    const double p70 = percentile_sorted(sorted, 70.0);
    const double p85 = percentile_sorted(sorted, 85.0);
    const double p95 = percentile_sorted(sorted, 95.0);

    const double tau_initial = sd < 0.1 ? mean + 2.0 * sd : p85;
    prof.tau = std::min(std::max(tau_initial, p70), p95);

    for (std::size_t i = 0; i < n; ++i)
        if (prof.phi[i] >= prof.tau) prof.vulnerable_set.push_back(i);
    return prof;
}

inline VulnerabilityProfile analyze_code(const ParityCheckMatrix& h,
                                         const FeatureWeights& w = FeatureWeights{},
                                         double svd_eps = 1e-6) {
    const auto fd = degree_feature(h);
    const auto fh = two_hop_feature(h);
    const auto fc = four_cycle_feature(h);
    const auto fs = svd_feature(h, svd_eps);
    auto prof = fuse_and_select(fd, fh, fc, fs.feature, w);
    prof.svd_k_used = fs.k_used;
    return prof;
}

// Text audit report: per-node features, fused score, threshold, set.
inline void write_profile_report(const VulnerabilityProfile& p, std::ostream& os) {
    os << "vulnerability profile\n";
    os << "n " << p.phi.size() << "\n";
    os << "weights " << p.weights.w_deg << " " << p.weights.w_hop << " " << p.weights.w_cyc
       << " " << p.weights.w_svd << "\n";
    os << "svd_k " << p.svd_k_used << "\n";
    os << "tau " << p.tau << "\n";
    os << "vulnerable_count " << p.vulnerable_set.size() << "\n";
    os << "node phi_deg phi_hop phi_cyc phi_svd phi in_set\n";
    std::vector<std::uint8_t> in_set(p.phi.size(), 0);
    for (std::size_t i : p.vulnerable_set) in_set[i] = 1;
    for (std::size_t i = 0; i < p.phi.size(); ++i) {
        os << i << " " << p.phi_deg[i] << " " << p.phi_hop[i] << " " << p.phi_cyc[i] << " "
           << p.phi_svd[i] << " " << p.phi[i] << " " << int(in_set[i]) << "\n";
    }
}

}  // namespace advcomm
