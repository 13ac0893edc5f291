#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "core_math.hpp"

namespace advcomm {

using BitVector = std::vector<std::uint8_t>;

// Sparse binary parity-check matrix held as per-check sorted variable-index
// lists, with the column adjacency derived alongside.
struct ParityCheckMatrix {
    std::size_t m = 0;  // checks
    std::size_t n = 0;  // variables
    std::vector<std::vector<std::size_t>> rows;  // per check, sorted VN indices
    std::vector<std::vector<std::size_t>> cols;  // per VN, sorted CN indices

    void rebuild_columns() {
        cols.assign(n, {});
        for (std::size_t c = 0; c < m; ++c)
            for (std::size_t v : rows[c]) {
                if (v >= n) throw std::invalid_argument("parity check: index out of range");
                cols[v].push_back(c);
            }
        for (auto& col : cols) std::sort(col.begin(), col.end());
    }

    std::size_t edge_count() const {
        std::size_t e = 0;
        for (const auto& r : rows) e += r.size();
        return e;
    }
};

struct GeneratorMatrix {
    std::size_t k = 0;
    std::size_t n = 0;
    // parity part P (m_eff x k) of the systematic form [I | P] in the
    // permuted domain; codeword_perm = (P*u, u)
    std::vector<BitVector> parity;
    std::vector<std::size_t> perm;  // column permutation: c[perm[j]] = c_perm[j]
    std::size_t dropped_rows = 0;   // dependent parity rows removed
};

struct LlrVector {
    std::vector<double> values;  // positive => bit 0 more likely, natural log
};

struct BpResult {
    BitVector bits;
    bool converged = false;
    std::size_t iters_used = 0;
};

inline BitVector syndrome(const ParityCheckMatrix& h, const BitVector& bits) {
    if (bits.size() != h.n) throw std::invalid_argument("syndrome: length mismatch");
    BitVector s(h.m, 0);
    for (std::size_t c = 0; c < h.m; ++c) {
        std::uint8_t acc = 0;
        for (std::size_t v : h.rows[c]) acc ^= bits[v];
        s[c] = acc;
    }
    return s;
}

inline bool syndrome_is_zero(const ParityCheckMatrix& h, const BitVector& bits) {
    for (std::size_t c = 0; c < h.m; ++c) {
        std::uint8_t acc = 0;
        for (std::size_t v : h.rows[c]) acc ^= bits[v];
        if (acc) return false;
    }
    return true;
}

// Gallager-style regular construction: the first band has row i covering
// columns [i*wr, (i+1)*wr); every further band is a random column permutation
// of it. Short cycles are left in on purpose, as in real short-blocklength
// codes.
inline ParityCheckMatrix build_regular_ldpc(std::size_t n, std::size_t rate_num,
                                            std::size_t rate_den, std::size_t col_weight,
                                            RngStream& rng) {
    if (rate_den == 0 || rate_num == 0 || rate_num >= rate_den)
        throw std::invalid_argument("build_regular_ldpc: rate must be in (0,1)");
    const bool known_rate = (rate_num == 1 && rate_den == 2) ||
                            (rate_num == 2 && rate_den == 3) ||
                            (rate_num == 5 && rate_den == 6);
    if (!known_rate) throw std::invalid_argument("build_regular_ldpc: rate must be 1/2, 2/3 or 5/6");
    if (col_weight == 0) throw std::invalid_argument("build_regular_ldpc: col_weight must be > 0");
    if ((n * (rate_den - rate_num)) % rate_den != 0)
        throw std::invalid_argument("build_regular_ldpc: (1-rate)*n not integral");
    const std::size_t m = n * (rate_den - rate_num) / rate_den;
    if ((col_weight * n) % m != 0)
        throw std::invalid_argument("build_regular_ldpc: row weight not integral");
    const std::size_t row_weight = col_weight * n / m;
    if (m % col_weight != 0 || n % row_weight != 0)
        throw std::invalid_argument("build_regular_ldpc: band structure infeasible");
    const std::size_t band_rows = m / col_weight;  // = n / row_weight

    ParityCheckMatrix h;
    h.m = m;
    h.n = n;
    h.rows.assign(m, {});

    for (int attempt = 0; attempt < 64; ++attempt) {
        for (auto& r : h.rows) r.clear();
        std::vector<std::size_t> perm(n);
        for (std::size_t band = 0; band < col_weight; ++band) {
            std::iota(perm.begin(), perm.end(), 0);
            if (band > 0) {
                for (std::size_t i = n - 1; i > 0; --i) {
                    const std::size_t j = rng.next_below(i + 1);
                    std::swap(perm[i], perm[j]);
                }
            }
            for (std::size_t i = 0; i < band_rows; ++i) {
                auto& row = h.rows[band * band_rows + i];
                for (std::size_t jj = 0; jj < row_weight; ++jj)
                    row.push_back(perm[i * row_weight + jj]);
                std::sort(row.begin(), row.end());
            }
        }
        h.rebuild_columns();
        // reject duplicate column patterns; rare for col_weight >= 2
        bool dup = false;
        std::vector<std::vector<std::size_t>> sorted_cols = h.cols;
        std::sort(sorted_cols.begin(), sorted_cols.end());
        for (std::size_t j = 0; j + 1 < sorted_cols.size() && !dup; ++j)
            if (sorted_cols[j] == sorted_cols[j + 1]) dup = true;
        if (!dup) return h;
    }
    throw std::runtime_error("build_regular_ldpc: could not avoid duplicate columns");
}

namespace detail {

// Dense GF(2) rows packed into 64-bit words for elimination.
struct Gf2Matrix {
    std::size_t ncols = 0;
    std::vector<std::vector<std::uint64_t>> rows;

    explicit Gf2Matrix(std::size_t cols) : ncols(cols) {}
    static std::size_t words(std::size_t c) { return (c + 63) / 64; }
    void add_row_from(const std::vector<std::size_t>& idx) {
        rows.emplace_back(words(ncols), 0);
        for (std::size_t j : idx) rows.back()[j >> 6] |= (1ULL << (j & 63));
    }
    bool get(std::size_t r, std::size_t c) const {
        return (rows[r][c >> 6] >> (c & 63)) & 1ULL;
    }
    void xor_rows(std::size_t dst, std::size_t src) {
        for (std::size_t w = 0; w < rows[dst].size(); ++w) rows[dst][w] ^= rows[src][w];
    }
};

}  // namespace detail

// Systematic generator from H by GF(2) elimination with column pivoting.
// Dependent rows are dropped (k grows accordingly).
inline GeneratorMatrix to_generator(const ParityCheckMatrix& h) {
    detail::Gf2Matrix g(h.n);
    for (const auto& r : h.rows) g.add_row_from(r);

    std::vector<std::size_t> perm(h.n);
    std::iota(perm.begin(), perm.end(), 0);

    std::size_t rank = 0;
    for (std::size_t col = 0; col < h.n && rank < h.m; ++col) {
        // find pivot in logical column `rank` position: search columns from
        // `rank` onward for one with a 1 in some row >= rank
        std::size_t pr = h.m, pc = h.n;
        for (std::size_t c = rank; c < h.n && pr == h.m; ++c) {
            for (std::size_t r = rank; r < h.m; ++r) {
                if (g.get(r, perm[c])) {
                    pr = r;
                    pc = c;
                    break;
                }
            }
        }
        if (pr == h.m) break;  // rest is zero
        std::swap(perm[rank], perm[pc]);
        std::swap(g.rows[rank], g.rows[pr]);
        for (std::size_t r = 0; r < h.m; ++r)
            if (r != rank && g.get(r, perm[rank])) g.xor_rows(r, rank);
        ++rank;
    }

    GeneratorMatrix gen;
    gen.n = h.n;
    gen.k = h.n - rank;
    gen.dropped_rows = h.m - rank;
    gen.perm = perm;
    gen.parity.assign(rank, BitVector(gen.k, 0));
    for (std::size_t r = 0; r < rank; ++r)
        for (std::size_t j = 0; j < gen.k; ++j)
            gen.parity[r][j] = g.get(r, perm[rank + j]) ? 1 : 0;
    return gen;
}

inline BitVector encode(const GeneratorMatrix& g, const BitVector& info_bits) {
    if (info_bits.size() != g.k) throw std::invalid_argument("encode: info length mismatch");
    const std::size_t rank = g.n - g.k;
    BitVector cw(g.n, 0);
    for (std::size_t r = 0; r < rank; ++r) {
        std::uint8_t p = 0;
        const BitVector& row = g.parity[r];
        for (std::size_t j = 0; j < g.k; ++j) p ^= (row[j] & info_bits[j]);
        cw[g.perm[r]] = p;
    }
    for (std::size_t j = 0; j < g.k; ++j) cw[g.perm[rank + j]] = info_bits[j];
    return cw;
}

// Log-domain sum-product decoding (tanh rule) with flooding schedule and
// message clipping at +/-25. Stops as soon as the hard decisions satisfy all
// checks; otherwise reports failure after max_iters.
inline BpResult bp_decode(const ParityCheckMatrix& h, const LlrVector& llr,
                          std::size_t max_iters = 50) {
    if (llr.values.size() != h.n) throw std::invalid_argument("bp_decode: llr length mismatch");
    if (max_iters < 1) throw std::invalid_argument("bp_decode: max_iters must be >= 1");
    constexpr double clip = 25.0;
    constexpr double tanh_cap = 1.0 - 1e-12;

    const std::size_t edges = h.edge_count();
    std::vector<double> vc(edges, 0.0);  // VN -> CN messages, laid out per check
    std::vector<double> cv(edges, 0.0);  // CN -> VN messages
    std::vector<std::size_t> edge_offset(h.m + 1, 0);
    for (std::size_t c = 0; c < h.m; ++c) edge_offset[c + 1] = edge_offset[c] + h.rows[c].size();

    // per-VN list of incident edge slots
    std::vector<std::vector<std::size_t>> vn_edges(h.n);
    for (std::size_t c = 0; c < h.m; ++c)
        for (std::size_t e = 0; e < h.rows[c].size(); ++e)
            vn_edges[h.rows[c][e]].push_back(edge_offset[c] + e);

    for (std::size_t c = 0; c < h.m; ++c)
        for (std::size_t e = 0; e < h.rows[c].size(); ++e)
            vc[edge_offset[c] + e] = std::clamp(llr.values[h.rows[c][e]], -clip, clip);

    BpResult res;
    res.bits.assign(h.n, 0);
    std::vector<double> posterior(h.n, 0.0);
    std::vector<double> t(64), prefix(65), suffix(65);

    for (std::size_t iter = 1; iter <= max_iters; ++iter) {
        // check node update via prefix/suffix tanh products (no division)
        for (std::size_t c = 0; c < h.m; ++c) {
            const std::size_t deg = h.rows[c].size();
            if (t.size() < deg) {
                t.resize(deg);
                prefix.resize(deg + 1);
                suffix.resize(deg + 1);
            }
            for (std::size_t e = 0; e < deg; ++e)
                t[e] = std::tanh(0.5 * vc[edge_offset[c] + e]);
            prefix[0] = 1.0;
            for (std::size_t e = 0; e < deg; ++e) prefix[e + 1] = prefix[e] * t[e];
            suffix[deg] = 1.0;
            for (std::size_t e = deg; e > 0; --e) suffix[e - 1] = suffix[e] * t[e - 1];
            for (std::size_t e = 0; e < deg; ++e) {
                const double prod = std::clamp(prefix[e] * suffix[e + 1], -tanh_cap, tanh_cap);
                cv[edge_offset[c] + e] = std::clamp(2.0 * std::atanh(prod), -clip, clip);
            }
        }

        // posteriors and VN update
        for (std::size_t v = 0; v < h.n; ++v) posterior[v] = llr.values[v];
        for (std::size_t c = 0; c < h.m; ++c)
            for (std::size_t e = 0; e < h.rows[c].size(); ++e)
                posterior[h.rows[c][e]] += cv[edge_offset[c] + e];
        for (std::size_t c = 0; c < h.m; ++c)
            for (std::size_t e = 0; e < h.rows[c].size(); ++e) {
                const std::size_t v = h.rows[c][e];
                vc[edge_offset[c] + e] =
                    std::clamp(posterior[v] - cv[edge_offset[c] + e], -clip, clip);
            }

        bool any_information = false;
        for (std::size_t v = 0; v < h.n; ++v) {
            res.bits[v] = posterior[v] < 0.0 ? 1 : 0;
            if (posterior[v] != 0.0) any_information = true;
        }
        res.iters_used = iter;
        if (any_information && syndrome_is_zero(h, res.bits)) {
            res.converged = true;
            return res;
        }
    }
    res.converged = false;
    res.iters_used = max_iters;
    return res;
}

// MacKay alist text format, 1-based indices.
inline void save_alist(const ParityCheckMatrix& h, std::ostream& os) {
    std::size_t wc_max = 0, wr_max = 0;
    for (const auto& col : h.cols) wc_max = std::max(wc_max, col.size());
    for (const auto& row : h.rows) wr_max = std::max(wr_max, row.size());
    os << h.n << " " << h.m << "\n" << wc_max << " " << wr_max << "\n";
    for (std::size_t v = 0; v < h.n; ++v) os << h.cols[v].size() << (v + 1 < h.n ? " " : "\n");
    for (std::size_t c = 0; c < h.m; ++c) os << h.rows[c].size() << (c + 1 < h.m ? " " : "\n");
    for (std::size_t v = 0; v < h.n; ++v) {
        for (std::size_t e = 0; e < wc_max; ++e) {
            const std::size_t val = e < h.cols[v].size() ? h.cols[v][e] + 1 : 0;
            os << val << (e + 1 < wc_max ? " " : "\n");
        }
    }
    for (std::size_t c = 0; c < h.m; ++c) {
        for (std::size_t e = 0; e < wr_max; ++e) {
            const std::size_t val = e < h.rows[c].size() ? h.rows[c][e] + 1 : 0;
            os << val << (e + 1 < wr_max ? " " : "\n");
        }
    }
}

inline void save_alist(const ParityCheckMatrix& h, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_alist: cannot open " + path);
    save_alist(h, f);
}

inline ParityCheckMatrix load_alist(std::istream& is) {
    std::size_t n = 0, m = 0, wc_max = 0, wr_max = 0;
    if (!(is >> n >> m >> wc_max >> wr_max)) throw std::runtime_error("load_alist: bad header");
    std::vector<std::size_t> col_w(n), row_w(m);
    for (auto& w : col_w) is >> w;
    for (auto& w : row_w) is >> w;
    ParityCheckMatrix h;
    h.n = n;
    h.m = m;
    h.rows.assign(m, {});
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t e = 0; e < wc_max; ++e) {
            long long idx;
            if (!(is >> idx)) throw std::runtime_error("load_alist: truncated column list");
            (void)idx;  // row lists below are authoritative
        }
    }
    for (std::size_t c = 0; c < m; ++c) {
        for (std::size_t e = 0; e < wr_max; ++e) {
            long long idx;
            if (!(is >> idx)) throw std::runtime_error("load_alist: truncated row list");
            if (idx > 0) {
                if (std::size_t(idx) > n) throw std::runtime_error("load_alist: index out of range");
                h.rows[c].push_back(std::size_t(idx - 1));
            }
        }
        std::sort(h.rows[c].begin(), h.rows[c].end());
        if (h.rows[c].size() != row_w[c])
            throw std::runtime_error("load_alist: row weight mismatch");
    }
    h.rebuild_columns();
    for (std::size_t v = 0; v < n; ++v)
        if (h.cols[v].size() != col_w[v]) throw std::runtime_error("load_alist: column weight mismatch");
    return h;
}

inline ParityCheckMatrix load_alist(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_alist: cannot open " + path);
    return load_alist(f);
}

}  // namespace advcomm
