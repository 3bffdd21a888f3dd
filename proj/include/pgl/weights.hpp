#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pgl/errors.hpp"
#include "pgl/gbs.hpp"
#include "pgl/graph.hpp"
#include "pgl/matchperm.hpp"
#include "pgl/parallel.hpp"
#include "pgl/rng.hpp"
#include "pgl/stats.hpp"

// The node-weight statistic W(i): the average of Y(A, B)^2 over all
// size-m pairs (A containing i, B), and its Monte Carlo estimators.
namespace pgl::weights {

enum class Method { exact, mc_perm, mc_indicator, structural };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::exact: return "exact";
        case Method::mc_perm: return "mc_perm";
        case Method::mc_indicator: return "mc_indicator";
        case Method::structural: return "structural";
    }
    return "?";
}

struct WeightEstimate {
    double value = 0.0;
    double stderr_value = 0.0;  // 0 for exact
    std::uint64_t samples = 0;
    Method method = Method::exact;
};

namespace detail {

// Fills `mask_rows` with the m x m submatrix on (rows, cols) of g.
inline void submatrix_inline(const BitMatrix& adj, const std::vector<std::uint32_t>& rows,
                             const std::vector<std::uint32_t>& cols, SquareMask& out) {
    auto m = static_cast<int>(rows.size());
    out.n = m;
    for (int i = 0; i < m; ++i) {
        const std::uint64_t* words = adj.row_words(rows[static_cast<std::size_t>(i)]);
        std::uint64_t bits = 0;
        for (int j = 0; j < m; ++j) {
            std::uint32_t c = cols[static_cast<std::size_t>(j)];
            bits |= ((words[c >> 6] >> (c & 63)) & 1ULL) << j;
        }
        out.row[static_cast<std::size_t>(i)] = bits;
    }
}

inline bool next_combination(std::vector<std::uint32_t>& cur, std::uint32_t n) {
    auto m = static_cast<int>(cur.size());
    int pos = m - 1;
    while (pos >= 0 &&
           cur[static_cast<std::size_t>(pos)] == n - static_cast<std::uint32_t>(m - pos))
        --pos;
    if (pos < 0) return false;
    ++cur[static_cast<std::size_t>(pos)];
    for (int q = pos + 1; q < m; ++q)
        cur[static_cast<std::size_t>(q)] = cur[static_cast<std::size_t>(q - 1)] + 1;
    return true;
}

}  // namespace detail

// Exact W(i): full enumeration of all C(n-1, m-1) * C(n, m) pairs.
inline WeightEstimate weight_exact(const BipartiteGraph& g, std::uint32_t i, std::uint32_t m,
                                   std::uint64_t cap = 100'000'000) {
    require(i < g.n(), "weight_exact: node out of range");
    require(m >= 1 && m <= 32 && m <= g.n(), "weight_exact: need 1 <= m <= min(n, 32)");
    require(g.p() > 0.0, "weight_exact: p must be in (0, 1]");
    std::uint64_t a_count = gbs::binomial_u64(g.n() - 1, m - 1);
    std::uint64_t b_count = gbs::binomial_u64(g.n(), m);
    if (static_cast<uint128>(a_count) * b_count > cap)
        throw CapExceeded("weight_exact: " + std::to_string(a_count) + " * " +
                          std::to_string(b_count) + " permanent evaluations exceed cap " +
                          std::to_string(cap));

    double denom = std::pow(g.p(), static_cast<int>(m)) * factorial_as_double(static_cast<int>(m));

    // Enumerate A-subsets containing i as (m-1)-subsets of [0, n-1) mapped
    // around i; parallelize over them with a chunk-indexed reduction.
    std::uint64_t n_chunks = (a_count + 15) / 16;
    std::vector<long double> partial(n_chunks, 0.0L);
    parallel_chunks(a_count, 16, [&](std::uint64_t chunk, std::uint64_t lo, std::uint64_t hi) {
        std::vector<std::uint32_t> rest(m - 1);
        for (std::uint32_t q = 0; q + 1 < m; ++q) rest[q] = q;
        for (std::uint64_t skip = 0; skip < lo; ++skip)
            detail::next_combination(rest, g.n() - 1);

        std::vector<std::uint32_t> a(m), b(m);
        SquareMask sub;
        long double acc = 0.0L;
        for (std::uint64_t ia = lo; ia < hi; ++ia) {
            a.clear();
            bool placed = false;
            for (std::uint32_t q = 0; q + 1 < m; ++q) {
                std::uint32_t v = rest[q] < i ? rest[q] : rest[q] + 1;
                if (!placed && v > i) {
                    a.push_back(i);
                    placed = true;
                }
                a.push_back(v);
            }
            if (!placed) a.push_back(i);

            for (std::uint32_t q = 0; q < m; ++q) b[q] = q;
            do {
                detail::submatrix_inline(g.adjacency(), a, b, sub);
                double y = perm_detail::permanent_or_throw(sub) / denom;
                acc += static_cast<long double>(y) * y;
            } while (detail::next_combination(b, g.n()));
            detail::next_combination(rest, g.n() - 1);
        }
        partial[chunk] = acc;
    });

    long double total = 0.0L;
    for (auto v : partial) total += v;
    std::uint64_t pairs = a_count * b_count;
    return WeightEstimate{static_cast<double>(total / static_cast<long double>(pairs)), 0.0,
                          pairs, Method::exact};
}

namespace detail {

template <typename TrialFn>
WeightEstimate mc_estimate(std::uint64_t r, Method method, const TrialFn& trial_value) {
    std::uint64_t n_chunks = (r + 4095) / 4096;
    std::vector<stats::RunningMoments> partial(n_chunks);
    parallel_chunks(r, 4096, [&](std::uint64_t chunk, std::uint64_t lo, std::uint64_t hi) {
        stats::RunningMoments rm;
        for (std::uint64_t t = lo; t < hi; ++t) rm.push(trial_value(t));
        partial[chunk] = rm;
    });
    stats::RunningMoments all;
    for (const auto& rm : partial) all.merge(rm);
    return WeightEstimate{all.mean(), all.stderr_mean(), r, method};
}

}  // namespace detail

// Unbiased W(i) estimator: mean of Y(A, B)^2 over r uniform pairs (A
// containing i, B), with the matching count evaluated exactly per pair.
inline WeightEstimate weight_mc_perm(const BipartiteGraph& g, std::uint32_t i, std::uint32_t m,
                                     std::uint64_t r, std::uint64_t seed) {
    require(i < g.n(), "weight_mc_perm: node out of range");
    require(m >= 1 && m <= 32 && m <= g.n(), "weight_mc_perm: need 1 <= m <= min(n, 32)");
    require(r >= 2, "weight_mc_perm: need r >= 2");
    require(g.p() > 0.0, "weight_mc_perm: p must be in (0, 1]");
    double denom = std::pow(g.p(), static_cast<int>(m)) * factorial_as_double(static_cast<int>(m));

    return detail::mc_estimate(r, Method::mc_perm, [&](std::uint64_t t) {
        thread_local SubsetSampler sampler;
        thread_local std::vector<std::uint32_t> a, b;
        thread_local SquareMask sub;
        Rng rng = Rng::stream(seed, tags::weight_mc, t);
        sampler.sample_containing(rng, g.n(), m, i, a);
        sampler.sample(rng, g.n(), m, b);
        detail::submatrix_inline(g.adjacency(), a, b, sub);
        double y = perm_detail::permanent_or_throw(sub) / denom;
        return y * y;
    });
}

// Literal estimator of the defining expectation: draw (A containing i, B,
// sigma, tau) and score prod_u xi_{u sigma(u)} xi_{u tau(u)} / p^2.
inline WeightEstimate weight_mc_indicator(const BipartiteGraph& g, std::uint32_t i,
                                          std::uint32_t m, std::uint64_t r, std::uint64_t seed) {
    require(i < g.n(), "weight_mc_indicator: node out of range");
    require(m >= 1 && m <= g.n(), "weight_mc_indicator: need 1 <= m <= n");
    require(r >= 2, "weight_mc_indicator: need r >= 2");
    require(g.p() > 0.0, "weight_mc_indicator: p must be in (0, 1]");
    double hit_value = std::pow(1.0 / g.p(), 2.0 * static_cast<double>(m));

    return detail::mc_estimate(r, Method::mc_indicator, [&](std::uint64_t t) {
        thread_local SubsetSampler sampler;
        thread_local std::vector<std::uint32_t> a, b, sigma, tau;
        Rng rng = Rng::stream(seed, tags::weight_ind, t);
        sampler.sample_containing(rng, g.n(), m, i, a);
        sampler.sample(rng, g.n(), m, b);
        sigma = b;
        tau = b;
        rng.shuffle(sigma);
        rng.shuffle(tau);
        for (std::uint32_t q = 0; q < m; ++q) {
            if (!g.edge(a[q], sigma[q]) || !g.edge(a[q], tau[q])) return 0.0;
        }
        return hit_value;
    });
}

// Graph-free estimator of E[W(i)] = E[p^{-S1 - S2}]: draws the planted sets
// alongside (A, B, sigma, tau) instead of conditioning on a realized graph.
// S1 counts matching edges from A intersect A0 landing in B0; S2 counts
// sigma = tau collisions outside the planted block.
inline WeightEstimate expected_weight_structural_mc(std::uint32_t n, std::uint32_t m,
                                                    std::uint32_t k, double p, bool planted,
                                                    std::uint64_t r, std::uint64_t seed) {
    require(n >= 1, "expected_weight_structural_mc: n must be >= 1");
    require(m >= 1 && m <= n, "expected_weight_structural_mc: need 1 <= m <= n");
    require(k <= n, "expected_weight_structural_mc: need k <= n");
    require(!planted || k >= 1, "expected_weight_structural_mc: planted requires k >= 1");
    require(planted || k < n, "expected_weight_structural_mc: background requires k < n");
    require(p > 0.0 && p <= 1.0, "expected_weight_structural_mc: p must be in (0, 1]");
    require(r >= 2, "expected_weight_structural_mc: need r >= 2");

    // Node of interest is 0; membership in A0 is decided by `planted`.
    std::vector<double> pow_inv(4 * static_cast<std::size_t>(m) + 1, 1.0);
    for (std::size_t j = 1; j < pow_inv.size(); ++j) pow_inv[j] = pow_inv[j - 1] / p;

    return detail::mc_estimate(r, Method::structural, [&](std::uint64_t t) {
        thread_local SubsetSampler sampler;
        thread_local std::vector<std::uint32_t> a, b, sigma, tau, a0, b0;
        Rng rng = Rng::stream(seed, tags::weight_struct, t);
        constexpr std::uint32_t node = 0;

        if (k == 0) {
            a0.clear();
        } else if (planted) {
            sampler.sample_containing(rng, n, k, node, a0);
        } else {
            sampler.sample(rng, n - 1, k, a0);  // subset of [0, n-1) shifted past node 0
            for (auto& v : a0) ++v;
        }
        if (k == 0)
            b0.clear();
        else
            sampler.sample(rng, n, k, b0);

        sampler.sample_containing(rng, n, m, node, a);
        sampler.sample(rng, n, m, b);
        sigma = b;
        tau = b;
        rng.shuffle(sigma);
        rng.shuffle(tau);

        int s1 = 0, s2 = 0;
        for (std::uint32_t q = 0; q < m; ++q) {
            bool u_planted =
                !a0.empty() && std::binary_search(a0.begin(), a0.end(), a[q]);
            bool sig_hit = u_planted && !b0.empty() &&
                           std::binary_search(b0.begin(), b0.end(), sigma[q]);
            bool tau_hit = u_planted && !b0.empty() &&
                           std::binary_search(b0.begin(), b0.end(), tau[q]);
            s1 += static_cast<int>(sig_hit) + static_cast<int>(tau_hit);
            if (sigma[q] == tau[q] && !sig_hit) ++s2;
        }
        return pow_inv[static_cast<std::size_t>(s1 + s2)];
    });
}

// Per-node weights with provenance; `nodes` lists which entries are present.
struct WeightTable {
    Side side = Side::left;
    std::vector<std::uint32_t> nodes;
    std::vector<double> values;
    std::vector<double> stderrs;
    Method method = Method::exact;
    std::uint64_t samples_used = 0;
};

enum class Centering { theoretical, empirical };

struct CenteredWeights {
    std::vector<double> z;
    Centering centering = Centering::theoretical;
    bool sqrt_n_applied = false;
    std::uint32_t n = 0;  // side size used for the sqrt(n) scale
};

// Subtracts either the closed-form mean e^{1/p-1} or the cross-node mean;
// optional sqrt(n) rescale and root-mean-square normalization.
inline CenteredWeights center_and_rescale(const WeightTable& w, Centering mode, std::uint32_t n,
                                          double theoretical_mean, bool apply_sqrt_n = false,
                                          bool rms_normalize = false) {
    require(!w.values.empty(), "center_and_rescale: empty weight table");
    CenteredWeights out;
    out.centering = mode;
    out.n = n;
    double center = theoretical_mean;
    if (mode == Centering::empirical) {
        long double s = 0.0L;
        for (double v : w.values) s += v;
        center = static_cast<double>(s / static_cast<long double>(w.values.size()));
    }
    out.z.reserve(w.values.size());
    for (double v : w.values) out.z.push_back(v - center);
    if (apply_sqrt_n) {
        double scale = std::sqrt(static_cast<double>(n));
        for (double& z : out.z) z *= scale;
        out.sqrt_n_applied = true;
    }
    if (rms_normalize) {
        long double ss = 0.0L;
        for (double z : out.z) ss += static_cast<long double>(z) * z;
        auto rms = static_cast<double>(
            std::sqrt(ss / static_cast<long double>(out.z.size())));
        require(rms > 0.0, "center_and_rescale: degenerate normalization (all values equal)");
        for (double& z : out.z) z /= rms;
    }
    return out;
}

struct MomentEstimate {
    double value = 0.0;
    double stderr_value = 0.0;
    std::uint64_t replicates = 0;
};

// phi_l estimate: average over independent-graph replicates of the product
// of sqrt(n)-scaled centered weights at `positions` (indices into z, may
// repeat).
inline MomentEstimate joint_moment_empirical(const std::vector<CenteredWeights>& replicates,
                                             const std::vector<std::size_t>& positions) {
    require(replicates.size() >= 2, "joint_moment_empirical: need >= 2 replicates");
    require(!positions.empty(), "joint_moment_empirical: need >= 1 index");
    stats::RunningMoments rm;
    for (const auto& rep : replicates) {
        double scale = rep.sqrt_n_applied ? 1.0 : std::sqrt(static_cast<double>(rep.n));
        double prod = 1.0;
        for (auto pos : positions) {
            require(pos < rep.z.size(), "joint_moment_empirical: index out of range");
            prod *= scale * rep.z[pos];
        }
        rm.push(prod);
    }
    return MomentEstimate{rm.mean(), rm.stderr_mean(), rm.count()};
}

// Per-node cross-replicate centering: subtracts each node's mean over the
// replicate collection, which estimates the exact finite-n E[W(i)].
inline std::vector<CenteredWeights> center_across_replicates(
    const std::vector<WeightTable>& tables, std::uint32_t n) {
    require(tables.size() >= 2, "center_across_replicates: need >= 2 replicates");
    std::size_t width = tables.front().values.size();
    std::vector<long double> mean(width, 0.0L);
    for (const auto& t : tables) {
        require(t.values.size() == width, "center_across_replicates: ragged tables");
        for (std::size_t j = 0; j < width; ++j) mean[j] += t.values[j];
    }
    for (auto& v : mean) v /= static_cast<long double>(tables.size());
    std::vector<CenteredWeights> out;
    out.reserve(tables.size());
    for (const auto& t : tables) {
        CenteredWeights cw;
        cw.centering = Centering::empirical;
        cw.n = n;
        cw.z.reserve(width);
        for (std::size_t j = 0; j < width; ++j)
            cw.z.push_back(t.values[j] - static_cast<double>(mean[j]));
        out.push_back(std::move(cw));
    }
    return out;
}

}  // namespace pgl::weights
