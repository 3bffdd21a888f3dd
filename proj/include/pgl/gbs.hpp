#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <cstdint>
#include <string>
#include <vector>

#include "pgl/errors.hpp"
#include "pgl/graph.hpp"
#include "pgl/matchperm.hpp"
#include "pgl/parallel.hpp"
#include "pgl/rng.hpp"

// Sampling from the idealized post-selected output law over balanced
// subgraph pairs: P(A, B) proportional to the squared matching count.
namespace pgl::gbs {

inline std::uint64_t binomial_u64(std::uint32_t n, std::uint32_t k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    uint128 r = 1;
    for (std::uint32_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r > static_cast<uint128>(~0ULL)) return ~0ULL;  // saturate
    }
    return static_cast<std::uint64_t>(r);
}

// All m-subsets of {0..n-1} in lexicographic order, flattened.
inline std::vector<std::uint32_t> all_subsets(std::uint32_t n, std::uint32_t m) {
    std::vector<std::uint32_t> flat;
    std::vector<std::uint32_t> cur(m);
    for (std::uint32_t i = 0; i < m; ++i) cur[i] = i;
    for (;;) {
        flat.insert(flat.end(), cur.begin(), cur.end());
        int pos = static_cast<int>(m) - 1;
        while (pos >= 0 && cur[static_cast<std::size_t>(pos)] ==
                               n - m + static_cast<std::uint32_t>(pos))
            --pos;
        if (pos < 0) break;
        ++cur[static_cast<std::size_t>(pos)];
        for (auto q = static_cast<std::uint32_t>(pos) + 1; q < m; ++q)
            cur[q] = cur[q - 1] + 1;
    }
    return flat;
}

// Collision-free guidance: the conventional regime keeps 2m below sqrt(2n).
inline bool m_exceeds_collision_free(std::uint32_t n, std::uint32_t m) {
    double bound = std::ceil(std::sqrt(2.0 * n)) / 2.0;
    return static_cast<double>(m) > bound;
}

struct ExactGBSDistribution {
    std::uint32_t n = 0;
    std::uint32_t m = 0;
    std::vector<std::uint32_t> subsets;   // flattened m-subsets, shared by both sides
    std::vector<double> weight;           // perm^2 per (ia * count + ib)
    std::vector<double> cumulative;
    double total_weight = 0.0;
    bool weights_exact = true;            // all matching counts below 2^53

    std::uint64_t subset_count() const { return subsets.size() / m; }
    const std::uint32_t* subset(std::uint64_t idx) const { return subsets.data() + idx * m; }

    SubgraphSample decode(std::uint64_t pair_index) const {
        std::uint64_t nb = subset_count();
        const std::uint32_t* pa = subset(pair_index / nb);
        const std::uint32_t* pb = subset(pair_index % nb);
        return SubgraphSample{{pa, pa + m}, {pb, pb + m}};
    }

    double probability(std::uint64_t pair_index) const {
        return weight[pair_index] / total_weight;
    }
};

inline ExactGBSDistribution enumerate_distribution(const BipartiteGraph& g, std::uint32_t m,
                                                   std::uint64_t cap = 10'000'000) {
    require(m >= 1 && m <= 32 && m <= g.n(), "enumerate_distribution: need 1 <= m <= min(n, 32)");
    std::uint64_t per_side = binomial_u64(g.n(), m);
    if (per_side > cap / per_side + 1 || per_side * per_side > cap)
        throw CapExceeded("enumerate_distribution: C(n,m)^2 = " +
                          std::to_string(per_side * per_side) + " exceeds cap " +
                          std::to_string(cap));

    ExactGBSDistribution dist;
    dist.n = g.n();
    dist.m = m;
    dist.subsets = all_subsets(g.n(), m);
    std::uint64_t count = dist.subset_count();
    dist.weight.assign(count * count, 0.0);

    constexpr double kExactLimit = 9007199254740992.0;  // 2^53
    std::vector<std::uint8_t> exact_flags(count, 1);
    parallel_chunks(count, 8, [&](std::uint64_t, std::uint64_t lo, std::uint64_t hi) {
        SubgraphSample s;
        for (std::uint64_t ia = lo; ia < hi; ++ia) {
            s.a.assign(dist.subset(ia), dist.subset(ia) + m);
            bool exact = true;
            for (std::uint64_t ib = 0; ib < count; ++ib) {
                s.b.assign(dist.subset(ib), dist.subset(ib) + m);
                double perm = perm_detail::permanent_or_throw(biadjacency_submatrix(g, s));
                if (perm >= kExactLimit) exact = false;
                dist.weight[ia * count + ib] = perm * perm;
            }
            exact_flags[ia] &= exact;
        }
    });
    for (auto f : exact_flags) dist.weights_exact &= static_cast<bool>(f);

    dist.cumulative.resize(dist.weight.size());
    long double acc = 0.0L;
    for (std::size_t i = 0; i < dist.weight.size(); ++i) {
        acc += dist.weight[i];
        dist.cumulative[i] = static_cast<double>(acc);
    }
    dist.total_weight = static_cast<double>(acc);
    if (!(dist.total_weight > 0.0))
        throw std::runtime_error(
            "enumerate_distribution: all weights zero (graph has no perfect matching on any "
            "balanced pair)");
    return dist;
}

enum class Provenance { exact, mcmc };

struct SampleBatch {
    std::vector<SubgraphSample> samples;
    std::uint64_t t = 0;
    Provenance provenance = Provenance::exact;
    std::uint64_t burnin = 0;
    std::uint64_t thin = 1;
    double acceptance_rate = 1.0;
};

inline SampleBatch sample_exact(const ExactGBSDistribution& dist, std::uint64_t t,
                                std::uint64_t seed) {
    require(t >= 1, "sample_exact: t must be >= 1");
    SampleBatch batch;
    batch.t = t;
    batch.provenance = Provenance::exact;
    batch.samples.resize(t);
    parallel_chunks(t, 1024, [&](std::uint64_t, std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t i = lo; i < hi; ++i) {
            Rng rng = Rng::stream(seed, tags::gbs_exact, i);
            double r = rng.next_double() * dist.total_weight;
            auto it = std::upper_bound(dist.cumulative.begin(), dist.cumulative.end(), r);
            auto idx = static_cast<std::uint64_t>(it - dist.cumulative.begin());
            if (idx >= dist.cumulative.size()) idx = dist.cumulative.size() - 1;
            batch.samples[i] = dist.decode(idx);
        }
    });
    return batch;
}

// Left-to-right maximum matching by augmenting paths; returns (A, B) of the
// first m matched pairs, or empty vectors if no size-m matching exists.
inline std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>> matching_start_state(
    const BipartiteGraph& g, std::uint32_t m) {
    std::uint32_t n = g.n();
    std::vector<std::int64_t> match_right(n, -1);
    std::vector<std::uint8_t> visited(n, 0);

    std::function<bool(std::uint32_t)> try_augment = [&](std::uint32_t u) -> bool {
        for (std::uint32_t v = 0; v < n; ++v) {
            if (!g.edge(u, v) || visited[v]) continue;
            visited[v] = 1;
            if (match_right[v] < 0 ||
                try_augment(static_cast<std::uint32_t>(match_right[v]))) {
                match_right[v] = u;
                return true;
            }
        }
        return false;
    };

    std::uint32_t matched = 0;
    for (std::uint32_t u = 0; u < n && matched < m; ++u) {
        std::fill(visited.begin(), visited.end(), 0);
        if (try_augment(u)) ++matched;
    }
    if (matched < m) return {};

    std::vector<std::uint32_t> a, b;
    for (std::uint32_t v = 0; v < n && b.size() < m; ++v) {
        if (match_right[v] >= 0) {
            a.push_back(static_cast<std::uint32_t>(match_right[v]));
            b.push_back(v);
        }
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return {std::move(a), std::move(b)};
}

// Metropolis chain over balanced pairs. Proposal: pick a side by fair coin,
// swap one uniformly chosen member against a uniform outside vertex.
// Acceptance ratio (perm_new / perm_old)^2; zero-weight proposals are
// rejected by the ratio itself.
inline SampleBatch sample_mcmc(const BipartiteGraph& g, std::uint32_t m, std::uint64_t t,
                               std::uint64_t burnin, std::uint64_t thin, std::uint64_t seed,
                               std::uint64_t chain_index = 0) {
    require(m >= 1 && m <= 32 && m < g.n(), "sample_mcmc: need 1 <= m <= 32 and m < n");
    require(t >= 1, "sample_mcmc: t must be >= 1");
    require(thin >= 1, "sample_mcmc: thin must be >= 1");

    auto [a, b] = matching_start_state(g, m);
    if (a.empty())
        throw std::runtime_error("sample_mcmc: no positive-weight start state (graph has no "
                                 "matching of size m)");

    SubgraphSample state{std::move(a), std::move(b)};
    double cur_perm = perm_detail::permanent_or_throw(biadjacency_submatrix(g, state));

    Rng rng = Rng::stream(seed, tags::gbs_mcmc, chain_index);
    SampleBatch batch;
    batch.t = t;
    batch.provenance = Provenance::mcmc;
    batch.burnin = burnin;
    batch.thin = thin;
    batch.samples.reserve(t);

    std::uint64_t accepted = 0;
    std::uint64_t total_steps = burnin + (t - 1) * thin + 1;
    SubgraphSample proposal = state;
    for (std::uint64_t step = 0; step < total_steps; ++step) {
        bool left = rng.bernoulli(0.5);
        auto& vec = left ? state.a : state.b;
        auto& prop_vec = left ? proposal.a : proposal.b;
        proposal = state;
        auto pos = static_cast<std::size_t>(rng.below(m));
        std::uint32_t replacement;
        do {
            replacement = static_cast<std::uint32_t>(rng.below(g.n()));
        } while (std::binary_search(vec.begin(), vec.end(), replacement));
        prop_vec[pos] = replacement;
        std::sort(prop_vec.begin(), prop_vec.end());

        double new_perm = perm_detail::permanent_or_throw(biadjacency_submatrix(g, proposal));
        double ratio_sq = cur_perm > 0.0 ? (new_perm / cur_perm) * (new_perm / cur_perm) : 1.0;
        if (ratio_sq >= 1.0 || rng.next_double() < ratio_sq) {
            state = proposal;
            cur_perm = new_perm;
            ++accepted;
        }
        if (step >= burnin && (step - burnin) % thin == 0) batch.samples.push_back(state);
    }
    batch.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(total_steps);
    return batch;
}

// P(2m photons | a squeezed input modes, squeezing b). The photon-pair
// count across a modes is negative-binomial:
// C(a/2 + m - 1, m) sech^a(b) tanh^{2m}(b), which sums to one over m.
inline double photon_number_pmf(std::uint32_t a, double b, std::uint32_t m) {
    require(a >= 2 && a % 2 == 0, "photon_number_pmf: a must be a positive even integer");
    require(b >= 0.0, "photon_number_pmf: b must be >= 0");
    if (b == 0.0) return m == 0 ? 1.0 : 0.0;
    double half_a = static_cast<double>(a) / 2.0;
    double dm = static_cast<double>(m);
    double lchoose = std::lgamma(half_a + dm) - std::lgamma(dm + 1.0) - std::lgamma(half_a);
    // log sech(b) = -(b + log((1 + e^{-2b}) / 2)); log tanh(b) = log(1 - e^{-2b}) - log(1 + e^{-2b}).
    double e2 = std::exp(-2.0 * b);
    double log_sech = -(b + std::log1p(e2) - std::log(2.0));
    double log_tanh = std::log1p(-e2) - std::log1p(e2);
    return std::exp(lchoose + static_cast<double>(a) * log_sech + 2.0 * dm * log_tanh);
}

// Per-node inclusion probabilities under the exact law, both sides.
struct InclusionMarginals {
    std::vector<double> left;
    std::vector<double> right;
};

inline InclusionMarginals exact_marginals(const ExactGBSDistribution& dist) {
    std::uint64_t count = dist.subset_count();
    std::vector<long double> row_sum(count, 0.0L), col_sum(count, 0.0L);
    for (std::uint64_t ia = 0; ia < count; ++ia)
        for (std::uint64_t ib = 0; ib < count; ++ib) {
            long double w = dist.weight[ia * count + ib];
            row_sum[ia] += w;
            col_sum[ib] += w;
        }
    InclusionMarginals out;
    out.left.assign(dist.n, 0.0);
    out.right.assign(dist.n, 0.0);
    std::vector<long double> left(dist.n, 0.0L), right(dist.n, 0.0L);
    for (std::uint64_t idx = 0; idx < count; ++idx) {
        const std::uint32_t* sub = dist.subset(idx);
        for (std::uint32_t q = 0; q < dist.m; ++q) {
            left[sub[q]] += row_sum[idx];
            right[sub[q]] += col_sum[idx];
        }
    }
    auto total = static_cast<long double>(dist.total_weight);
    for (std::uint32_t i = 0; i < dist.n; ++i) {
        out.left[i] = static_cast<double>(left[i] / total);
        out.right[i] = static_cast<double>(right[i] / total);
    }
    return out;
}

inline InclusionMarginals empirical_marginals(const SampleBatch& batch, std::uint32_t n) {
    InclusionMarginals out;
    out.left.assign(n, 0.0);
    out.right.assign(n, 0.0);
    for (const auto& s : batch.samples) {
        for (auto u : s.a) out.left[u] += 1.0;
        for (auto v : s.b) out.right[v] += 1.0;
    }
    auto t = static_cast<double>(batch.samples.size());
    for (std::uint32_t i = 0; i < n; ++i) {
        out.left[i] /= t;
        out.right[i] /= t;
    }
    return out;
}

}  // namespace pgl::gbs
