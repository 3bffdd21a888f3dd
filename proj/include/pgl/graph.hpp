#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pgl/bitmat.hpp"
#include "pgl/errors.hpp"
#include "pgl/rng.hpp"

namespace pgl {

enum class Side { left, right };

// Balanced pair (A, B) of sorted m-subsets of the two vertex sides.
struct SubgraphSample {
    std::vector<std::uint32_t> a;
    std::vector<std::uint32_t> b;

    std::size_t m() const { return a.size(); }
};

// Immutable n x n bipartite biadjacency with the edge probability it was
// drawn at. `p` rides along because every normalized statistic needs it.
class BipartiteGraph {
  public:
    BipartiteGraph(std::uint32_t n, double p, BitMatrix adj)
        : n_(n), p_(p), adj_(std::move(adj)) {
        require(n >= 1, "BipartiteGraph: n must be >= 1");
        require(p >= 0.0 && p <= 1.0, "BipartiteGraph: p must be in [0, 1]");
        require(adj_.rows() == n && adj_.cols() == n, "BipartiteGraph: adjacency shape mismatch");
    }

    std::uint32_t n() const { return n_; }
    double p() const { return p_; }

    bool edge(std::uint32_t u, std::uint32_t v) const { return adj_.get(u, v); }
    const BitMatrix& adjacency() const { return adj_; }

    std::uint64_t edge_count() const {
        std::uint64_t total = 0;
        for (std::uint32_t u = 0; u < n_; ++u)
            total += static_cast<std::uint64_t>(adj_.row_popcount(u));
        return total;
    }

    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges_sorted() const {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
        out.reserve(edge_count());
        for (std::uint32_t u = 0; u < n_; ++u)
            for (std::uint32_t v = 0; v < n_; ++v)
                if (adj_.get(u, v)) out.emplace_back(u, v);
        return out;
    }

  private:
    std::uint32_t n_;
    double p_;
    BitMatrix adj_;
};

// A graph together with the ground-truth planted biclique (A0, B0).
struct PlantedInstance {
    BipartiteGraph graph;
    std::vector<std::uint32_t> a0;
    std::vector<std::uint32_t> b0;
    std::uint32_t k = 0;
};

inline BipartiteGraph gen_bipartite_er(std::uint32_t n, double p, std::uint64_t seed) {
    require(n >= 1, "gen_bipartite_er: n must be >= 1");
    require(p >= 0.0 && p <= 1.0, "gen_bipartite_er: p must be in [0, 1]");
    BitMatrix adj(n, n);
    Rng rng = Rng::stream(seed, tags::graph_gen);
    if (p >= 1.0) {
        for (std::uint32_t u = 0; u < n; ++u)
            for (std::uint32_t v = 0; v < n; ++v) adj.set(u, v);
    } else if (p > 0.0) {
        for (std::uint32_t u = 0; u < n; ++u)
            for (std::uint32_t v = 0; v < n; ++v)
                if (rng.bernoulli(p)) adj.set(u, v);
    }
    return BipartiteGraph(n, p, std::move(adj));
}

// Draws A0, B0 uniformly among k-subsets and forces all A0 x B0 edges on.
inline PlantedInstance plant_biclique(const BipartiteGraph& g, std::uint32_t k,
                                      std::uint64_t seed) {
    require(k <= g.n(), "plant_biclique: k must be <= n");
    Rng rng = Rng::stream(seed, tags::graph_plant);
    SubsetSampler sampler;
    std::vector<std::uint32_t> a0, b0;
    if (k > 0) {
        sampler.sample(rng, g.n(), k, a0);
        sampler.sample(rng, g.n(), k, b0);
    }
    BitMatrix adj = g.adjacency();
    for (std::uint32_t u : a0)
        for (std::uint32_t v : b0) adj.set(u, v);
    return PlantedInstance{BipartiteGraph(g.n(), g.p(), std::move(adj)), std::move(a0),
                           std::move(b0), k};
}

// Plants a caller-chosen (a0, b0); used by tests and deserialization.
inline PlantedInstance plant_biclique_at(const BipartiteGraph& g,
                                         std::vector<std::uint32_t> a0,
                                         std::vector<std::uint32_t> b0) {
    require(a0.size() == b0.size(), "plant_biclique_at: |a0| != |b0|");
    require(a0.size() <= g.n(), "plant_biclique_at: k must be <= n");
    BitMatrix adj = g.adjacency();
    for (std::uint32_t u : a0) {
        require(u < g.n(), "plant_biclique_at: a0 index out of range");
        for (std::uint32_t v : b0) {
            require(v < g.n(), "plant_biclique_at: b0 index out of range");
            adj.set(u, v);
        }
    }
    std::sort(a0.begin(), a0.end());
    std::sort(b0.begin(), b0.end());
    auto k = static_cast<std::uint32_t>(a0.size());
    return PlantedInstance{BipartiteGraph(g.n(), g.p(), std::move(adj)), std::move(a0),
                           std::move(b0), k};
}

inline std::uint32_t degree(const BipartiteGraph& g, std::uint32_t u, Side side) {
    require(u < g.n(), "degree: vertex out of range");
    if (side == Side::left) return static_cast<std::uint32_t>(g.adjacency().row_popcount(u));
    return static_cast<std::uint32_t>(g.adjacency().col_popcount(u));
}

inline void validate_sample(const BipartiteGraph& g, const SubgraphSample& s) {
    require(!s.a.empty() && s.a.size() == s.b.size(),
            "SubgraphSample: |a| == |b| >= 1 required");
    require(s.a.size() <= g.n(), "SubgraphSample: m must be <= n");
    for (std::size_t i = 0; i < s.a.size(); ++i) {
        require(s.a[i] < g.n() && s.b[i] < g.n(), "SubgraphSample: index out of range");
        if (i > 0)
            require(s.a[i] > s.a[i - 1] && s.b[i] > s.b[i - 1],
                    "SubgraphSample: indices must be strictly increasing");
    }
}

// Entry (i, j) = edge(a[i], b[j]).
inline SquareMask biadjacency_submatrix(const BipartiteGraph& g, const SubgraphSample& s) {
    validate_sample(g, s);
    auto m = static_cast<int>(s.m());
    require(m <= 32, "biadjacency_submatrix: m must be <= 32");
    SquareMask out = SquareMask::zeros(m);
    for (int i = 0; i < m; ++i) {
        const std::uint64_t* words = g.adjacency().row_words(s.a[static_cast<std::size_t>(i)]);
        std::uint64_t bits = 0;
        for (int j = 0; j < m; ++j) {
            std::uint32_t c = s.b[static_cast<std::size_t>(j)];
            bits |= ((words[c >> 6] >> (c & 63)) & 1ULL) << j;
        }
        out.row[static_cast<std::size_t>(i)] = bits;
    }
    return out;
}

}  // namespace pgl
