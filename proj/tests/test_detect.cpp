#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "pgl/detect.hpp"

using namespace pgl;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

detect::SamplerConfig exact_sampler(std::uint32_t m) {
    detect::SamplerConfig s;
    s.kind = gbs::Provenance::exact;
    s.m = m;
    return s;
}

}  // namespace

TEST_CASE("occurrence counts always sum to 2 m T", "[detect]") {
    BipartiteGraph g = gen_bipartite_er(8, 0.6, 51);
    for (std::uint64_t t : {1ull, 17ull, 4096ull}) {
        auto res = detect::run_algorithm1(g, exact_sampler(3), t, {}, 7);
        std::uint64_t total = std::accumulate(res.counts.begin(), res.counts.end(), 0ull);
        REQUIRE(total == 2 * 3 * t);
    }
}

TEST_CASE("normalized scores have mean zero and mean-square one", "[detect]") {
    BipartiteGraph g = gen_bipartite_er(10, 0.5, 53);
    auto res = detect::run_algorithm1(g, exact_sampler(3), 20000, {}, 9);
    double mean = 0.0, ms = 0.0;
    for (double z : res.z) {
        mean += z;
        ms += z * z;
    }
    mean /= static_cast<double>(res.z.size());
    ms /= static_cast<double>(res.z.size());
    REQUIRE_THAT(mean, WithinAbs(0.0, 1e-6));
    REQUIRE_THAT(ms, WithinRel(1.0, 1e-6));
}

TEST_CASE("a collapsed sample space yields the degenerate-normalization error", "[detect]") {
    // Complete graph with m = n: the only balanced pair is (V, V'), so every
    // node appears in every sample.
    BipartiteGraph g = gen_bipartite_er(3, 1.0, 1);
    REQUIRE_THROWS_WITH(detect::run_algorithm1(g, exact_sampler(3), 100, {}, 3),
                        Catch::Matchers::ContainsSubstring("degenerate normalization"));
}

TEST_CASE("planted z-scores dominate under a strong plant", "[detect]") {
    // K = 6 planted in n = 12 at p = 0.5 is a sqrt(n)-scale signal.
    std::uint64_t wins = 0;
    const int reps = 10;
    for (int rep = 0; rep < reps; ++rep) {
        auto inst = plant_biclique(gen_bipartite_er(12, 0.5, 600 + rep), 6, 700 + rep);
        auto res = detect::run_algorithm1(inst.graph, exact_sampler(3), 100000, {}, 11 + rep);
        double planted = 0.0, background = 0.0;
        std::size_t pi = 0;
        for (std::uint32_t u = 0; u < 12; ++u) {
            if (pi < inst.a0.size() && inst.a0[pi] == u) {
                planted += res.z[u];
                ++pi;
            } else {
                background += res.z[u];
            }
        }
        wins += planted / 6.0 > background / 6.0;
    }
    REQUIRE(wins >= 8);
}

TEST_CASE("top fraction overlap counting and tie-breaking", "[detect]") {
    std::vector<double> z{0.9, 0.1, 0.8, 0.2, 0.7, 0.3, 0.6, 0.4, 0.5, 0.0};
    // Truth holds the three largest -> all captured at c = 0.5.
    REQUIRE(detect::top_fraction_overlap(z, {0, 2, 4}, 0.5).count == 3);
    // Truth holds the smallest values and c is small -> zero.
    REQUIRE(detect::top_fraction_overlap(z, {1, 9}, 0.3).count == 0);
    // Ties break by ascending index: with all-equal scores the top floor(c n)
    // slots go to the smallest indices.
    std::vector<double> flat(10, 1.0);
    auto r = detect::top_fraction_overlap(flat, {0, 1, 9}, 0.5);
    REQUIRE(r.count == 2);
    // Empty truth flags a warning and counts zero.
    auto w = detect::top_fraction_overlap(z, {}, 0.5);
    REQUIRE(w.count == 0);
    REQUIRE(w.empty_truth);
}

TEST_CASE("overlap counting is invariant to positive affine transforms", "[detect]") {
    Rng rng = Rng::stream(99, rng_detail::tag_hash("test.detect.affine"), 0);
    std::vector<double> z(40);
    for (auto& v : z) v = rng.next_double() * 6.0 - 3.0;
    std::vector<std::uint32_t> truth{3, 7, 19, 22, 31};
    auto base = detect::top_fraction_overlap(z, truth, 0.4).count;
    std::vector<double> scaled(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) scaled[i] = 2.5 * z[i] + 17.0;
    REQUIRE(detect::top_fraction_overlap(scaled, truth, 0.4).count == base);
}

TEST_CASE("degree detector normalization", "[detect]") {
    // Hand-built graph: left node 0 has 60 of 100 neighbors at p = 0.5.
    BitMatrix adj(100, 100);
    for (std::uint32_t v = 0; v < 60; ++v) adj.set(0, v);
    for (std::uint32_t v = 0; v < 50; ++v) adj.set(1, v);
    BipartiteGraph g(100, 0.5, std::move(adj));
    auto z = detect::degree_detector(g);
    REQUIRE_THAT(z[0], WithinRel(2.0, 1e-12));   // (60 - 50) / 5
    REQUIRE_THAT(z[1], WithinAbs(0.0, 1e-12));   // degree exactly np
    REQUIRE_THROWS_AS(detect::degree_detector(gen_bipartite_er(4, 1.0, 1)), ConfigError);
}

TEST_CASE("planted nodes shift normalized degrees by the predicted amount", "[detect]") {
    const std::uint32_t n = 400, k = 20;
    stats::RunningMoments diff;
    for (int rep = 0; rep < 40; ++rep) {
        auto inst = plant_biclique(gen_bipartite_er(n, 0.5, 800 + rep), k, 900 + rep);
        auto z = detect::degree_detector(inst.graph);
        double planted = 0.0, background = 0.0;
        std::size_t pi = 0;
        for (std::uint32_t u = 0; u < n; ++u) {
            if (pi < inst.a0.size() && inst.a0[pi] == u) {
                planted += z[u];
                ++pi;
            } else {
                background += z[u];
            }
        }
        diff.push(planted / k - background / (n - k));
    }
    double predicted = theory::degree_mean_shift(0.5, k, n);
    // The planted block replaces ~p k of the k edges, so the realized shift
    // is K(1-p) on average; allow 4 SE around the prediction.
    REQUIRE(std::abs(diff.mean() - predicted) < 4 * diff.stderr_mean());
}

TEST_CASE("max-z decision against a fixed threshold", "[detect]") {
    BipartiteGraph g = gen_bipartite_er(10, 0.5, 61);
    detect::DecisionConfig low;
    low.kind = detect::DecisionKind::max_z;
    low.theta = -100.0;
    auto res = detect::run_algorithm1(g, exact_sampler(3), 5000, low, 13);
    REQUIRE(res.decision);
    REQUIRE(res.statistic_name == "max_z");
    REQUIRE(res.statistic_value == res.max_z());

    detect::DecisionConfig high = low;
    high.theta = 100.0;
    REQUIRE(!detect::run_algorithm1(g, exact_sampler(3), 5000, high, 13).decision);
}

TEST_CASE("calibrated max-z reproduces deterministically", "[detect]") {
    BipartiteGraph g = gen_bipartite_er(10, 0.5, 67);
    detect::DecisionConfig cal;
    cal.kind = detect::DecisionKind::max_z_calibrated;
    cal.quantile = 0.9;
    cal.calibration_trials = 12;
    auto r1 = detect::run_algorithm1(g, exact_sampler(3), 4000, cal, 17);
    auto r2 = detect::run_algorithm1(g, exact_sampler(3), 4000, cal, 17);
    REQUIRE(r1.threshold == r2.threshold);
    REQUIRE(r1.decision == r2.decision);
    REQUIRE(r1.statistic_name == "max_z_calibrated");
}

TEST_CASE("a saturated plant gives AUC 1 for the degree detector", "[detect]") {
    detect::PowerParams params;
    params.n = 30;
    params.p = 0.5;
    params.k = 30;  // complete planted side
    params.t = 1;
    params.sampler = exact_sampler(3);
    auto summary = detect::detection_power_experiment(params, detect::Detector::degree, 30, 71);
    REQUIRE(summary.auc == 1.0);
}

TEST_CASE("no plant means no signal: AUC near 1/2", "[detect]") {
    detect::PowerParams params;
    params.n = 40;
    params.p = 0.5;
    params.k = 0;
    params.t = 1;
    auto summary = detect::detection_power_experiment(params, detect::Detector::degree, 400, 73);
    REQUIRE(std::abs(summary.auc - 0.5) < 3 * summary.auc_stderr + 1e-9);
}

TEST_CASE("theoretical-threshold surrogate matches the closed form", "[detect]") {
    auto res = detect::gaussian_rank_surrogate(0.8, 0.01, 100000,
                                               detect::SurrogateThreshold::theoretical, 0, 79);
    REQUIRE_THAT(res.predicted, WithinAbs(0.8028, 5e-5));
    REQUIRE(std::abs(res.fraction - res.predicted) < 4 * res.stderr_value);

    auto strong = detect::gaussian_rank_surrogate(0.8, 1.0, 100000,
                                                  detect::SurrogateThreshold::theoretical, 0, 80);
    REQUIRE_THAT(strong.predicted, WithinAbs(0.97, 3e-3));
    REQUIRE(std::abs(strong.fraction - strong.predicted) < 4 * strong.stderr_value);
}

TEST_CASE("empirical-pool surrogate lands near the closed form", "[detect]") {
    auto res = detect::gaussian_rank_surrogate(0.8, 1.0, 40000,
                                               detect::SurrogateThreshold::empirical, 10000, 81);
    REQUIRE(std::abs(res.fraction - res.predicted) < 0.01);
}

TEST_CASE("surrogate saturates for large eps", "[detect]") {
    auto res = detect::gaussian_rank_surrogate(0.8, 8.0, 20000,
                                               detect::SurrogateThreshold::theoretical, 0, 83);
    REQUIRE(res.fraction > 0.999);
}
