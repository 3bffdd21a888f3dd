#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "pgl/errors.hpp"
#include "pgl/gbs.hpp"
#include "pgl/graph.hpp"
#include "pgl/parallel.hpp"
#include "pgl/rng.hpp"
#include "pgl/stats.hpp"
#include "pgl/theory.hpp"

// The sampling-frequency detection pipeline: count node occurrences over T
// samples, center against the uniform baseline m/n, normalize by the
// root-mean-square over all 2n nodes, then apply a decision function.
namespace pgl::detect {

struct SamplerConfig {
    gbs::Provenance kind = gbs::Provenance::exact;
    std::uint32_t m = 2;
    std::uint64_t cap = 10'000'000;
    std::uint64_t burnin = 10'000;
    std::uint64_t thin = 10;
};

enum class DecisionKind { none, max_z, max_z_calibrated };

struct DecisionConfig {
    DecisionKind kind = DecisionKind::none;
    double theta = 0.0;             // max_z threshold
    double quantile = 0.95;         // calibration quantile
    std::uint32_t calibration_trials = 50;
};

struct DetectionResult {
    std::vector<double> z;          // 2n entries: left side then right side
    std::vector<std::uint64_t> counts;
    double sigma = 0.0;             // pooled normalization (pre-division)
    double sigma_left = 0.0;        // per-side diagnostics
    double sigma_right = 0.0;
    bool decision = false;
    std::string statistic_name = "none";
    double statistic_value = 0.0;
    double threshold = 0.0;
    std::uint64_t t_used = 0;

    double max_z() const { return *std::max_element(z.begin(), z.end()); }
};

namespace detail {

// Counting / centering / normalizing stages shared by detection and
// calibration runs.
inline DetectionResult score_batch(const gbs::SampleBatch& batch, std::uint32_t n,
                                   std::uint32_t m) {
    DetectionResult res;
    res.t_used = batch.samples.size();
    res.counts.assign(2 * static_cast<std::size_t>(n), 0);
    for (const auto& s : batch.samples) {
        for (auto u : s.a) ++res.counts[u];
        for (auto v : s.b) ++res.counts[n + v];
    }
    auto t = static_cast<double>(res.t_used);
    double baseline = static_cast<double>(m) / n;
    res.z.resize(res.counts.size());
    long double ss = 0.0L, ss_left = 0.0L, ss_right = 0.0L;
    for (std::size_t i = 0; i < res.counts.size(); ++i) {
        double zi = static_cast<double>(res.counts[i]) / t - baseline;
        res.z[i] = zi;
        ss += static_cast<long double>(zi) * zi;
        (i < n ? ss_left : ss_right) += static_cast<long double>(zi) * zi;
    }
    res.sigma = std::sqrt(static_cast<double>(ss / static_cast<long double>(2 * n)));
    res.sigma_left = std::sqrt(static_cast<double>(ss_left / static_cast<long double>(n)));
    res.sigma_right = std::sqrt(static_cast<double>(ss_right / static_cast<long double>(n)));
    if (!(res.sigma > 0.0))
        throw std::runtime_error(
            "run_algorithm1: degenerate normalization (all inclusion frequencies equal)");
    for (double& zi : res.z) zi /= res.sigma;
    return res;
}

inline gbs::SampleBatch draw_batch(const BipartiteGraph& g, const SamplerConfig& sampler,
                                   std::uint64_t t, std::uint64_t seed) {
    if (sampler.kind == gbs::Provenance::exact) {
        auto dist = gbs::enumerate_distribution(g, sampler.m, sampler.cap);
        return gbs::sample_exact(dist, t, seed);
    }
    return gbs::sample_mcmc(g, sampler.m, t, sampler.burnin, sampler.thin, seed);
}

}  // namespace detail

inline DetectionResult run_algorithm1(const BipartiteGraph& g, const SamplerConfig& sampler,
                                      std::uint64_t t, const DecisionConfig& decision,
                                      std::uint64_t seed) {
    require(t >= 1, "run_algorithm1: t must be >= 1");
    DetectionResult res =
        detail::score_batch(detail::draw_batch(g, sampler, t, seed), g.n(), sampler.m);

    switch (decision.kind) {
        case DecisionKind::none:
            break;
        case DecisionKind::max_z: {
            res.statistic_name = "max_z";
            res.statistic_value = res.max_z();
            res.threshold = decision.theta;
            res.decision = res.statistic_value > decision.theta;
            break;
        }
        case DecisionKind::max_z_calibrated: {
            require(decision.quantile > 0.0 && decision.quantile < 1.0,
                    "run_algorithm1: calibration quantile must be in (0, 1)");
            require(decision.calibration_trials >= 2,
                    "run_algorithm1: need >= 2 calibration trials");
            std::vector<double> null_stats(decision.calibration_trials);
            for (std::uint32_t c = 0; c < decision.calibration_trials; ++c) {
                Rng meta = Rng::stream(seed, tags::detect_calib, c);
                std::uint64_t g_seed = meta.next_u64();
                std::uint64_t s_seed = meta.next_u64();
                BipartiteGraph null_g = gen_bipartite_er(g.n(), g.p(), g_seed);
                DetectionResult null_res = detail::score_batch(
                    detail::draw_batch(null_g, sampler, t, s_seed), g.n(), sampler.m);
                null_stats[c] = null_res.max_z();
            }
            std::sort(null_stats.begin(), null_stats.end());
            auto pos = static_cast<std::size_t>(
                std::ceil(decision.quantile * static_cast<double>(null_stats.size())));
            if (pos > 0) --pos;
            res.statistic_name = "max_z_calibrated";
            res.statistic_value = res.max_z();
            res.threshold = null_stats[pos];
            res.decision = res.statistic_value > res.threshold;
            break;
        }
    }
    return res;
}

struct OverlapResult {
    std::uint32_t count = 0;
    bool empty_truth = false;
};

// Number of `truth` nodes among the floor(c * n) largest statistics.
// Ties break toward the smaller node index so counts are deterministic.
inline OverlapResult top_fraction_overlap(const std::vector<double>& z,
                                          const std::vector<std::uint32_t>& truth, double c) {
    require(c > 0.0 && c < 1.0, "top_fraction_overlap: c must be in (0, 1)");
    if (truth.empty()) return OverlapResult{0, true};
    auto n = z.size();
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) {
        if (z[x] != z[y]) return z[x] > z[y];
        return x < y;
    });
    auto take = static_cast<std::size_t>(c * static_cast<double>(n));
    OverlapResult res;
    for (std::size_t q = 0; q < take && q < n; ++q)
        if (std::binary_search(truth.begin(), truth.end(), order[q])) ++res.count;
    return res;
}

// Normalized degrees (D - np) / sqrt(np(1-p)) for both sides, left first.
inline std::vector<double> degree_detector(const BipartiteGraph& g) {
    require(g.p() > 0.0 && g.p() < 1.0, "degree_detector: p must be in (0, 1)");
    double np = static_cast<double>(g.n()) * g.p();
    double sd = std::sqrt(np * (1.0 - g.p()));
    std::vector<double> out(2 * static_cast<std::size_t>(g.n()));
    for (std::uint32_t u = 0; u < g.n(); ++u)
        out[u] = (static_cast<double>(degree(g, u, Side::left)) - np) / sd;
    for (std::uint32_t v = 0; v < g.n(); ++v)
        out[g.n() + v] = (static_cast<double>(degree(g, v, Side::right)) - np) / sd;
    return out;
}

enum class Detector { weight, degree };

struct PowerParams {
    std::uint32_t n = 12;
    double p = 0.5;
    std::uint32_t k = 6;
    std::uint64_t t = 100'000;
    SamplerConfig sampler;
    double c = 0.8;
};

struct PowerTrialRow {
    std::uint64_t trial = 0;
    double stat_null = 0.0;
    double stat_planted = 0.0;
    std::uint32_t overlap = 0;
    double planted_mean_z = 0.0;     // mean z over the true planted nodes (left side)
    double background_mean_z = 0.0;  // mean z over the other left nodes
};

struct PowerSummary {
    std::vector<PowerTrialRow> rows;
    double auc = 0.0;
    double auc_stderr = 0.0;
    double mean_overlap = 0.0;
    double overlap_stderr = 0.0;
    std::uint64_t sign_consistent = 0;  // trials with planted mean z above background
};

// Paired null/planted instances; the scalar statistic is max z over all 2n
// nodes. AUC is the win frequency of the planted statistic across pairs.
inline PowerSummary detection_power_experiment(const PowerParams& params, Detector detector,
                                               std::uint64_t trials, std::uint64_t seed) {
    require(trials >= 1, "detection_power_experiment: trials must be >= 1");
    require(params.k <= params.n, "detection_power_experiment: need k <= n");
    PowerSummary summary;
    summary.rows.resize(trials);

    parallel_chunks(trials, 1, [&](std::uint64_t, std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t trial = lo; trial < hi; ++trial) {
            Rng meta = Rng::stream(seed, tags::detect_power, trial);
            std::uint64_t s_g0 = meta.next_u64();
            std::uint64_t s_g1 = meta.next_u64();
            std::uint64_t s_plant = meta.next_u64();
            std::uint64_t s_run0 = meta.next_u64();
            std::uint64_t s_run1 = meta.next_u64();

            BipartiteGraph g0 = gen_bipartite_er(params.n, params.p, s_g0);
            PlantedInstance inst =
                plant_biclique(gen_bipartite_er(params.n, params.p, s_g1), params.k, s_plant);

            std::vector<double> z0, z1;
            if (detector == Detector::weight) {
                DecisionConfig none;
                z0 = run_algorithm1(g0, params.sampler, params.t, none, s_run0).z;
                z1 = run_algorithm1(inst.graph, params.sampler, params.t, none, s_run1).z;
            } else {
                z0 = degree_detector(g0);
                z1 = degree_detector(inst.graph);
            }

            PowerTrialRow row;
            row.trial = trial;
            row.stat_null = *std::max_element(z0.begin(), z0.end());
            row.stat_planted = *std::max_element(z1.begin(), z1.end());
            std::vector<double> left(z1.begin(), z1.begin() + params.n);
            row.overlap = top_fraction_overlap(left, inst.a0, params.c).count;

            long double planted_sum = 0.0L, background_sum = 0.0L;
            std::size_t ti = 0;
            for (std::uint32_t u = 0; u < params.n; ++u) {
                bool is_planted = ti < inst.a0.size() && inst.a0[ti] == u;
                if (is_planted) {
                    planted_sum += left[u];
                    ++ti;
                } else {
                    background_sum += left[u];
                }
            }
            row.planted_mean_z =
                params.k > 0 ? static_cast<double>(planted_sum / params.k) : 0.0;
            row.background_mean_z =
                params.k < params.n
                    ? static_cast<double>(background_sum / (params.n - params.k))
                    : 0.0;
            summary.rows[trial] = row;
        }
    });

    stats::RunningMoments overlap_rm;
    std::uint64_t wins2 = 0;  // 2 * wins + ties
    for (const auto& row : summary.rows) {
        overlap_rm.push(row.overlap);
        if (row.stat_planted > row.stat_null)
            wins2 += 2;
        else if (row.stat_planted == row.stat_null)
            wins2 += 1;
        summary.sign_consistent += row.planted_mean_z > row.background_mean_z;
    }
    summary.auc = static_cast<double>(wins2) / (2.0 * static_cast<double>(trials));
    summary.auc_stderr =
        std::sqrt(std::max(summary.auc * (1.0 - summary.auc), 0.0) /
                  static_cast<double>(trials));
    summary.mean_overlap = overlap_rm.mean();
    summary.overlap_stderr = overlap_rm.stderr_mean();
    return summary;
}

enum class SurrogateThreshold { theoretical, empirical };

struct SurrogateResult {
    double fraction = 0.0;
    double stderr_value = 0.0;
    double predicted = 0.0;  // closed form 1 - Phi(Phi^{-1}(1-c) - eps)
    std::uint64_t planted_draws = 0;
};

// Gaussian model of the ranking step: background scores N(0,1), planted
// scores N(eps,1). In `theoretical` mode each planted score is compared
// against the background c-quantile, matching the closed form exactly; in
// `empirical` mode planted scores are ranked inside a finite pool of size
// `pool_n`, which adds an O(eps/sqrt(pool_n)) bias.
inline SurrogateResult gaussian_rank_surrogate(double c, double eps, std::uint64_t draws,
                                               SurrogateThreshold mode, std::uint32_t pool_n,
                                               std::uint64_t seed) {
    require(c > 0.0 && c < 1.0, "gaussian_rank_surrogate: c must be in (0, 1)");
    require(eps >= 0.0, "gaussian_rank_surrogate: eps must be >= 0");
    require(draws >= 1, "gaussian_rank_surrogate: draws must be >= 1");

    SurrogateResult res;
    res.predicted = theory::detection_proportion(c, eps);

    auto sample_normal = [](Rng& rng) {
        double u1 = rng.next_double();
        double u2 = rng.next_double();
        while (u1 <= 0.0) u1 = rng.next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    };

    if (mode == SurrogateThreshold::theoretical) {
        double threshold = theory::std_normal_quantile(1.0 - c);
        std::uint64_t n_chunks = (draws + 65535) / 65536;
        std::vector<std::uint64_t> hits(n_chunks, 0);
        parallel_chunks(draws, 65536, [&](std::uint64_t chunk, std::uint64_t lo,
                                          std::uint64_t hi) {
            std::uint64_t h = 0;
            for (std::uint64_t i = lo; i < hi; ++i) {
                Rng rng = Rng::stream(seed, tags::detect_surrogate, i);
                h += (eps + sample_normal(rng)) > threshold;
            }
            hits[chunk] = h;
        });
        std::uint64_t total = 0;
        for (auto h : hits) total += h;
        res.planted_draws = draws;
        res.fraction = static_cast<double>(total) / static_cast<double>(draws);
        res.stderr_value = std::sqrt(
            std::max(res.fraction * (1.0 - res.fraction), 0.0) / static_cast<double>(draws));
        return res;
    }

    require(pool_n >= 2, "gaussian_rank_surrogate: pool_n must be >= 2");
    auto n1 = static_cast<std::uint32_t>(
        std::llround(eps * std::sqrt(static_cast<double>(pool_n))));
    require(n1 >= 1 && n1 < pool_n, "gaussian_rank_surrogate: eps*sqrt(pool_n) must be in [1, n)");
    std::uint64_t trials = (draws + n1 - 1) / n1;
    auto take = static_cast<std::size_t>(c * static_cast<double>(pool_n));

    std::vector<stats::RunningMoments> partial((trials + 7) / 8);
    parallel_chunks(trials, 8, [&](std::uint64_t chunk, std::uint64_t lo, std::uint64_t hi) {
        std::vector<double> pool(pool_n);
        stats::RunningMoments rm;
        for (std::uint64_t trial = lo; trial < hi; ++trial) {
            Rng rng = Rng::stream(seed, tags::detect_surrogate, trial);
            for (std::uint32_t i = 0; i < pool_n; ++i)
                pool[i] = sample_normal(rng) + (i < n1 ? eps : 0.0);
            std::vector<double> sorted = pool;
            std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(take),
                             sorted.end(), std::greater<double>());
            double cut = sorted[take];
            std::uint32_t hits = 0;
            for (std::uint32_t i = 0; i < n1; ++i) hits += pool[i] > cut;
            rm.push(static_cast<double>(hits) / static_cast<double>(n1));
        }
        partial[chunk] = rm;
    });
    stats::RunningMoments all;
    for (const auto& rm : partial) all.merge(rm);
    res.planted_draws = trials * n1;
    res.fraction = all.mean();
    res.stderr_value = all.stderr_mean();
    return res;
}

}  // namespace pgl::detect
