#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pgl/gbs.hpp"
#include "pgl/theory.hpp"
#include "pgl/weights.hpp"

using namespace pgl;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("exact weight on complete and empty graphs", "[weights]") {
    BipartiteGraph full = gen_bipartite_er(6, 1.0, 1);
    for (std::uint32_t i : {0u, 3u, 5u}) REQUIRE(weights::weight_exact(full, i, 3).value == 1.0);

    BitMatrix adj(6, 6);
    BipartiteGraph empty(6, 0.5, std::move(adj));
    REQUIRE(weights::weight_exact(empty, 0, 3).value == 0.0);
}

TEST_CASE("exact weight equals the direct pair enumeration oracle", "[weights]") {
    // n = 4, m = 2: average Y^2 over the 3 * 6 = 18 pairs (A containing i, B),
    // with permanents from the brute-force oracle.
    BipartiteGraph g = gen_bipartite_er(4, 0.5, 103);
    for (std::uint32_t node = 0; node < 4; ++node) {
        double sum = 0.0;
        int pairs = 0;
        for (std::uint32_t a1 = 0; a1 < 4; ++a1) {
            if (a1 == node) continue;
            SubgraphSample s;
            s.a = {std::min(node, a1), std::max(node, a1)};
            for (std::uint32_t b0 = 0; b0 < 4; ++b0) {
                for (std::uint32_t b1 = b0 + 1; b1 < 4; ++b1) {
                    s.b = {b0, b1};
                    double perm = static_cast<double>(
                        permanent_bruteforce(biadjacency_submatrix(g, s)).exact);
                    double y = perm / (0.25 * 2.0);
                    sum += y * y;
                    ++pairs;
                }
            }
        }
        REQUIRE(pairs == 18);
        auto est = weights::weight_exact(g, node, 2);
        REQUIRE(est.samples == 18);
        REQUIRE_THAT(est.value, WithinRel(sum / 18.0, 1e-12));
        REQUIRE(est.stderr_value == 0.0);
    }
}

TEST_CASE("exact weight cap triggers", "[weights]") {
    BipartiteGraph g = gen_bipartite_er(30, 0.5, 1);
    REQUIRE_THROWS_AS(weights::weight_exact(g, 0, 10, 1000), CapExceeded);
}

TEST_CASE("MC estimators agree with the exact weight within 4 stderr", "[weights]") {
    for (std::uint64_t seed : {201ull, 202ull, 203ull}) {
        BipartiteGraph g = gen_bipartite_er(12, 0.5, seed);
        auto exact = weights::weight_exact(g, 2, 3);
        auto mc = weights::weight_mc_perm(g, 2, 3, 20000, seed + 17);
        REQUIRE(std::abs(mc.value - exact.value) < 4 * mc.stderr_value);
        auto ind = weights::weight_mc_indicator(g, 2, 3, 400000, seed + 18);
        REQUIRE(std::abs(ind.value - exact.value) < 4 * ind.stderr_value);
    }
}

TEST_CASE("complete graph at p = 1 gives exact estimates with zero spread", "[weights]") {
    BipartiteGraph g = gen_bipartite_er(8, 1.0, 1);
    auto mc = weights::weight_mc_perm(g, 1, 2, 100, 5);
    REQUIRE(mc.value == 1.0);
    REQUIRE(mc.stderr_value == 0.0);
    auto ind = weights::weight_mc_indicator(g, 1, 2, 100, 5);
    REQUIRE(ind.value == 1.0);
    REQUIRE(ind.stderr_value == 0.0);
}

TEST_CASE("empty graph gives zero for every indicator trial", "[weights]") {
    BitMatrix adj(8, 8);
    BipartiteGraph empty(8, 0.5, std::move(adj));
    auto ind = weights::weight_mc_indicator(empty, 0, 2, 500, 5);
    REQUIRE(ind.value == 0.0);
}

TEST_CASE("r = 2 returns a finite stderr", "[weights]") {
    BipartiteGraph g = gen_bipartite_er(10, 0.5, 301);
    auto est = weights::weight_mc_perm(g, 0, 3, 2, 14);
    REQUIRE(std::isfinite(est.stderr_value));
    REQUIRE(est.samples == 2);
}

TEST_CASE("perm estimator has no larger spread than the indicator estimator", "[weights]") {
    BipartiteGraph g = gen_bipartite_er(12, 0.5, 305);
    const std::uint64_t budget = 20000;
    auto perm = weights::weight_mc_perm(g, 0, 3, budget, 15);
    auto ind = weights::weight_mc_indicator(g, 0, 3, budget, 15);
    REQUIRE(perm.stderr_value <= ind.stderr_value);
}

TEST_CASE("structural estimator is exactly one at p = 1", "[weights]") {
    auto est = weights::expected_weight_structural_mc(50, 5, 3, 1.0, true, 1000, 16);
    REQUIRE(est.value == 1.0);
    REQUIRE(est.stderr_value == 0.0);
}

TEST_CASE("structural estimator approaches e^{1/p-1} for k = 0", "[weights]") {
    auto est = weights::expected_weight_structural_mc(10000, 50, 0, 0.5, false, 100000, 17);
    REQUIRE(std::abs(est.value - std::exp(1.0)) < 4 * est.stderr_value);
}

TEST_CASE("structural planted-minus-background matches the bias closed form", "[weights]") {
    auto planted = weights::expected_weight_structural_mc(100, 5, 10, 0.5, true, 400000, 18);
    auto background = weights::expected_weight_structural_mc(100, 5, 10, 0.5, false, 400000, 19);
    double bias = planted.value - background.value;
    double se = std::hypot(planted.stderr_value, background.stderr_value);
    double predicted = theory::weight_bias(0.5, 10, 100);  // 0.5437
    REQUIRE(std::abs(bias - predicted) < 4 * se + 0.15 * predicted);
}

TEST_CASE("node-inclusion probability is proportional to the exact weight", "[weights]") {
    BipartiteGraph g = gen_bipartite_er(6, 0.5, 401);
    auto dist = gbs::enumerate_distribution(g, 2);
    auto marg = gbs::exact_marginals(dist);
    double ratio0 = 0.0;
    for (std::uint32_t i = 0; i < 6; ++i) {
        double w = weights::weight_exact(g, i, 2).value;
        REQUIRE(w > 0.0);
        double r = marg.left[i] / w;
        if (i == 0)
            ratio0 = r;
        else
            REQUIRE_THAT(r, WithinRel(ratio0, 1e-9));
    }
}

TEST_CASE("per-pair mean-one lower bound: E[W] >= 1 empirically", "[weights]") {
    stats::RunningMoments rm;
    for (int rep = 0; rep < 300; ++rep) {
        BipartiteGraph g = gen_bipartite_er(10, 0.5, 500 + static_cast<std::uint64_t>(rep));
        rm.push(weights::weight_exact(g, 0, 2).value);
    }
    REQUIRE(rm.mean() + 4 * rm.stderr_mean() >= 1.0);
    REQUIRE(rm.mean() > 1.0);
}

// Distribution-level oracle: at (n=6, m=2, p=1/2) the exact moments of W
// over graph randomness follow from enumerating every configuration
// (A, B, sigma, tau) and counting distinct edges in unions:
//   E[W(i)]        = 2.5           (truncated exponential sum_{j<=m} 1/j!)
//   Var(W(i))      = 1.93
//   Cov(W(i),W(j)) = 0.8713333...
// The first is reproduced here from scratch; the variance and covariance are
// frozen from the same enumeration extended to pairs of configurations.
TEST_CASE("graph-randomness moments of W match the enumeration oracle", "[weights][slow]") {
    const std::uint32_t n = 6, m = 2;
    const double p = 0.5;

    // Independent oracle for E[W]: average p^{#distinct edges} over all
    // (A containing 0, B, sigma, tau).
    double ew_oracle = 0.0;
    std::uint64_t count = 0;
    for (std::uint32_t x = 1; x < n; ++x) {
        std::uint32_t a0 = 0, a1 = x;
        for (std::uint32_t b0 = 0; b0 < n; ++b0) {
            for (std::uint32_t b1 = b0 + 1; b1 < n; ++b1) {
                // sigma, tau each pick straight or crossed.
                for (int s = 0; s < 2; ++s) {
                    for (int t = 0; t < 2; ++t) {
                        // sigma = tau shares both edges, otherwise the
                        // straight and crossed matchings are disjoint.
                        int distinct = s == t ? 2 : 4;
                        (void)a0;
                        (void)a1;
                        ew_oracle += std::pow(p, distinct - 4);
                        ++count;
                    }
                }
            }
        }
    }
    ew_oracle /= static_cast<double>(count);
    REQUIRE_THAT(ew_oracle, WithinRel(2.5, 1e-12));

    // Library Monte Carlo over graphs against the frozen oracle values.
    stats::RunningMoments w0, w1, prod;
    const int graphs = 30000;
    for (int g = 0; g < graphs; ++g) {
        BipartiteGraph graph = gen_bipartite_er(n, p, 910000 + static_cast<std::uint64_t>(g));
        double v0 = weights::weight_exact(graph, 0, m).value;
        double v1 = weights::weight_exact(graph, 1, m).value;
        w0.push(v0);
        w1.push(v1);
        prod.push(v0 * v1);
    }
    REQUIRE(std::abs(w0.mean() - 2.5) < 4 * w0.stderr_mean());
    double var_se = w0.variance() * std::sqrt(2.0 / (graphs - 1.0) +
                                              w0.central4() / (w0.central2() * w0.central2()) /
                                                  graphs);
    REQUIRE(std::abs(w0.variance() - 1.93) < 4 * var_se);
    double cov = (prod.mean() - w0.mean() * w1.mean()) * graphs / (graphs - 1.0);
    REQUIRE(std::abs(cov - 0.871333) < 0.08);
}

TEST_CASE("centering examples", "[weights]") {
    weights::WeightTable table;
    table.nodes = {0, 1, 2, 3};
    table.values = {2.0, 2.0, 2.0, 2.0};
    table.stderrs = {0, 0, 0, 0};
    auto cw = weights::center_and_rescale(table, weights::Centering::empirical, 4, 0.0);
    for (double z : cw.z) REQUIRE(z == 0.0);

    table.values = {1.5, 0.25, 3.0, 1.0};
    auto theo = weights::center_and_rescale(table, weights::Centering::theoretical, 4,
                                            theory::expected_weight(1.0));
    REQUIRE(theo.z == std::vector<double>{0.5, -0.75, 2.0, 0.0});

    auto emp = weights::center_and_rescale(table, weights::Centering::empirical, 4, 0.0);
    double sum = emp.z[0] + emp.z[1] + emp.z[2] + emp.z[3];
    REQUIRE(std::abs(sum) < 1e-9 * 4);

    auto rms = weights::center_and_rescale(table, weights::Centering::empirical, 4, 0.0, true,
                                           true);
    double ss = 0.0;
    for (double z : rms.z) ss += z * z;
    REQUIRE_THAT(ss / 4.0, WithinRel(1.0, 1e-12));

    table.values = {1.0, 1.0, 1.0, 1.0};
    REQUIRE_THROWS_WITH(
        weights::center_and_rescale(table, weights::Centering::empirical, 4, 0.0, false, true),
        Catch::Matchers::ContainsSubstring("degenerate"));
}

TEST_CASE("joint moment of hand-built replicates", "[weights]") {
    // Two replicates over n = 4 with known z-values; sqrt(n) scale = 2.
    weights::CenteredWeights r1{{0.5, -0.5, 1.0}, weights::Centering::empirical, false, 4};
    weights::CenteredWeights r2{{-0.5, 0.5, 2.0}, weights::Centering::empirical, false, 4};
    auto est = weights::joint_moment_empirical({r1, r2}, {0, 1});
    // Products: (2*0.5)(2*-0.5) = -1 and (2*-0.5)(2*0.5) = -1.
    REQUIRE(est.value == -1.0);
    REQUIRE(est.stderr_value == 0.0);

    auto third = weights::joint_moment_empirical({r1, r2}, {2});
    // sqrt(4) * 1.0 = 2 and sqrt(4) * 2.0 = 4 -> mean 3.
    REQUIRE(third.value == 3.0);
}

TEST_CASE("centering across replicates removes per-node means", "[weights]") {
    std::vector<weights::WeightTable> tables(3);
    tables[0].values = {1.0, 4.0};
    tables[1].values = {2.0, 5.0};
    tables[2].values = {3.0, 9.0};
    auto centered = weights::center_across_replicates(tables, 16);
    REQUIRE(centered.size() == 3);
    REQUIRE_THAT(centered[0].z[0], WithinAbs(-1.0, 1e-12));
    REQUIRE_THAT(centered[2].z[1], WithinAbs(3.0, 1e-12));
    double col0 = centered[0].z[0] + centered[1].z[0] + centered[2].z[0];
    REQUIRE_THAT(col0, WithinAbs(0.0, 1e-12));
}
