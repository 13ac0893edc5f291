#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace advcomm {

using ComplexVector = std::vector<std::complex<double>>;

inline double signal_power(const ComplexVector& v) {
    double p = 0.0;
    for (const auto& z : v) p += std::norm(z);
    return p;
}

// Dense row-major real matrix. Small sizes only; this library never needs
// more than a few thousand rows/cols.
struct RealMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    RealMatrix() = default;
    RealMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    static RealMatrix identity(std::size_t n) {
        RealMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    RealMatrix transposed() const {
        RealMatrix t(cols, rows);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    double frobenius() const {
        double s = 0.0;
        for (double x : data) s += x * x;
        return std::sqrt(s);
    }
};

inline RealMatrix matmul(const RealMatrix& a, const RealMatrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: dimension mismatch");
    RealMatrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

inline std::vector<double> matvec(const RealMatrix& a, const std::vector<double>& x) {
    if (a.cols != x.size()) throw std::invalid_argument("matvec: dimension mismatch");
    std::vector<double> y(a.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols; ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

inline std::vector<double> matvec_t(const RealMatrix& a, const std::vector<double>& x) {
    if (a.rows != x.size()) throw std::invalid_argument("matvec_t: dimension mismatch");
    std::vector<double> y(a.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        for (std::size_t j = 0; j < a.cols; ++j) y[j] += a(i, j) * xi;
    }
    return y;
}

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace detail

// Deterministic seeded random stream. Identical (seed, stream_id) gives an
// identical sample sequence; distinct stream ids give unrelated sequences.
// All randomness in the library flows through these streams, never through
// a global engine.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
        std::uint64_t s = seed ^ 0xD1B54A32D192ED03ULL;
        detail::splitmix64(s);
        s ^= stream_id * 0x9E3779B97F4A7C15ULL + 0x2545F4914F6CDD1DULL;
        state_ = detail::splitmix64(s);
        if (state_ == 0) state_ = 0x4D595DF4D0F33173ULL;
        // warm up xorshift-multiply state
        for (int i = 0; i < 4; ++i) next_u64();
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64() {
        // xorshift64* with splitmix output stage; small, fast, reproducible
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545F4914F6CDD1DULL;
    }

    // uniform in [0, 1)
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }
    // uniform in (0, 1]
    double uniform_pos() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

    std::uint64_t next_below(std::uint64_t n) { return n ? next_u64() % n : 0; }

    double gaussian(double sigma = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return spare_ * sigma;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a) * sigma;
    }

    RngStream substream(std::uint64_t id) const {
        std::uint64_t s = stream_id_ * 0x100000001B3ULL + id + 1;
        return RngStream(seed_, detail::splitmix64(s));
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

inline std::vector<double> gaussian(RngStream& rng, std::size_t n, double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("gaussian: sigma must be >= 0");
    std::vector<double> out(n);
    for (auto& x : out) x = rng.gaussian(sigma);
    return out;
}

struct SvdResult {
    RealMatrix u;            // rows x r, orthonormal columns
    std::vector<double> s;   // r singular values, non-increasing
    RealMatrix v;            // cols x r, orthonormal columns
};

class SvdConvergenceError : public std::runtime_error {
public:
    SvdConvergenceError(double residual)
        : std::runtime_error("svd: jacobi sweeps did not converge, off-diagonal residual " +
                             std::to_string(residual)),
          residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

namespace detail {

// One-sided Jacobi on a tall matrix b (rows >= cols): orthogonalizes the
// columns of b in place while accumulating the right rotations into v.
inline void jacobi_orthogonalize(RealMatrix& b, RealMatrix& v) {
    const std::size_t m = b.rows, n = b.cols;
    const double tol = 1e-13;
    const int max_sweeps = 64;
    double off = 0.0;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        std::size_t rotated = 0;
        off = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    const double bp = b(i, p), bq = b(i, q);
                    app += bp * bp;
                    aqq += bq * bq;
                    apq += bp * bq;
                }
                if (app == 0.0 || aqq == 0.0) continue;
                const double denom = std::sqrt(app * aqq);
                if (std::abs(apq) <= tol * denom) continue;
                off = std::max(off, std::abs(apq) / denom);
                ++rotated;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double bp = b(i, p), bq = b(i, q);
                    b(i, p) = cs * bp - sn * bq;
                    b(i, q) = sn * bp + cs * bq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = cs * vp - sn * vq;
                    v(i, q) = sn * vp + cs * vq;
                }
            }
        }
        if (rotated == 0) return;
    }
    throw SvdConvergenceError(off);
}

// Fills zero columns of u with unit vectors orthogonal to all other columns
// so the factor keeps orthonormal columns even for rank-deficient input.
inline void complete_orthonormal(RealMatrix& u, const std::vector<std::size_t>& zero_cols) {
    const std::size_t m = u.rows, n = u.cols;
    for (std::size_t zc : zero_cols) {
        for (std::size_t cand = 0; cand < m; ++cand) {
            std::vector<double> e(m, 0.0);
            e[cand] = 1.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == zc) continue;
                double dot = 0.0;
                for (std::size_t i = 0; i < m; ++i) dot += e[i] * u(i, j);
                if (dot != 0.0)
                    for (std::size_t i = 0; i < m; ++i) e[i] -= dot * u(i, j);
            }
            double nrm = 0.0;
            for (double x : e) nrm += x * x;
            nrm = std::sqrt(nrm);
            if (nrm > 1e-6) {
                for (std::size_t i = 0; i < m; ++i) u(i, zc) = e[i] / nrm;
                break;
            }
        }
    }
}

}  // namespace detail

// Economy SVD by one-sided Jacobi rotations: a = u * diag(s) * v^T with s
// non-negative and non-increasing, u and v with orthonormal columns.
inline SvdResult svd(const RealMatrix& a) {
    if (a.rows == 0 || a.cols == 0) throw std::invalid_argument("svd: empty matrix");
    const bool transposed = a.rows < a.cols;
    RealMatrix b = transposed ? a.transposed() : a;
    const std::size_t m = b.rows, n = b.cols;

    RealMatrix v = RealMatrix::identity(n);
    detail::jacobi_orthogonalize(b, v);

    std::vector<double> s(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double nrm = 0.0;
        for (std::size_t i = 0; i < m; ++i) nrm += b(i, j) * b(i, j);
        s[j] = std::sqrt(nrm);
    }

    std::vector<std::size_t> order(n);
    for (std::size_t j = 0; j < n; ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return s[x] > s[y]; });

    RealMatrix u_sorted(m, n), v_sorted(n, n);
    std::vector<double> s_sorted(n);
    std::vector<std::size_t> zero_cols;
    const double smax = s.empty() ? 0.0 : s[order.empty() ? 0 : order[0]];
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        s_sorted[j] = s[src];
        if (s[src] > 0.0 && (smax == 0.0 || s[src] > smax * 1e-300)) {
            for (std::size_t i = 0; i < m; ++i) u_sorted(i, j) = b(i, src) / s[src];
        } else {
            zero_cols.push_back(j);
        }
        for (std::size_t i = 0; i < n; ++i) v_sorted(i, j) = v(i, src);
    }
    if (!zero_cols.empty()) detail::complete_orthonormal(u_sorted, zero_cols);

    SvdResult r;
    if (transposed) {
        r.u = v_sorted;
        r.v = u_sorted;
    } else {
        r.u = u_sorted;
        r.v = v_sorted;
    }
    r.s = std::move(s_sorted);
    return r;
}

// Largest singular value via power iteration on a^T a. Deterministic start
// vector; returns 0 for the zero matrix.
inline double spectral_norm(const RealMatrix& a, double tol = 1e-10) {
    if (a.rows == 0 || a.cols == 0) return 0.0;
    RngStream rng(0xADC0FFEEULL, 17);
    std::vector<double> v(a.cols);
    double nrm = 0.0;
    for (auto& x : v) {
        x = rng.gaussian();
        nrm += x * x;
    }
    nrm = std::sqrt(nrm);
    for (auto& x : v) x /= nrm;

    double sigma_prev = -1.0;
    for (int it = 0; it < 20000; ++it) {
        std::vector<double> av = matvec(a, v);
        double sigma = 0.0;
        for (double x : av) sigma += x * x;
        sigma = std::sqrt(sigma);
        if (sigma == 0.0) return 0.0;
        std::vector<double> w = matvec_t(a, av);
        double wn = 0.0;
        for (double x : w) wn += x * x;
        wn = std::sqrt(wn);
        if (wn == 0.0) return sigma;
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = w[j] / wn;
        if (sigma_prev >= 0.0 && std::abs(sigma - sigma_prev) <= 0.01 * tol * sigma && it >= 3)
            return sigma;
        sigma_prev = sigma;
    }
    return sigma_prev;
}

}  // namespace advcomm
