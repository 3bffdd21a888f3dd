#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "pgl/errors.hpp"
#include "pgl/rng.hpp"
#include "pgl/theory.hpp"

namespace pgl::stats {

// Single-pass central moments up to order 4 (Welford / Chan updates) with a
// deterministic merge, so chunked parallel reductions reproduce the serial
// result when merged in chunk order.
class RunningMoments {
  public:
    void push(double x) {
        double n1 = static_cast<double>(count_);
        ++count_;
        double n = static_cast<double>(count_);
        double delta = x - mean_;
        double delta_n = delta / n;
        double delta_n2 = delta_n * delta_n;
        double term1 = delta * delta_n * n1;
        mean_ += delta_n;
        m4_ += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * m2_ -
               4.0 * delta_n * m3_;
        m3_ += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m2_;
        m2_ += term1;
    }

    void merge(const RunningMoments& o) {
        if (o.count_ == 0) return;
        if (count_ == 0) {
            *this = o;
            return;
        }
        double na = static_cast<double>(count_), nb = static_cast<double>(o.count_);
        double n = na + nb;
        double delta = o.mean_ - mean_;
        double delta2 = delta * delta;
        double m4 = m4_ + o.m4_ +
                    delta2 * delta2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                    6.0 * delta2 * (na * na * o.m2_ + nb * nb * m2_) / (n * n) +
                    4.0 * delta * (na * o.m3_ - nb * m3_) / n;
        double m3 = m3_ + o.m3_ + delta2 * delta * na * nb * (na - nb) / (n * n) +
                    3.0 * delta * (na * o.m2_ - nb * m2_) / n;
        double m2 = m2_ + o.m2_ + delta2 * na * nb / n;
        mean_ += delta * nb / n;
        m2_ = m2;
        m3_ = m3;
        m4_ = m4;
        count_ += o.count_;
    }

    std::uint64_t count() const { return count_; }
    double mean() const { return mean_; }
    double variance() const {  // unbiased
        return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
    }
    double stderr_mean() const {
        return count_ > 1 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
    }
    double central2() const { return count_ > 0 ? m2_ / static_cast<double>(count_) : 0.0; }
    double central3() const { return count_ > 0 ? m3_ / static_cast<double>(count_) : 0.0; }
    double central4() const { return count_ > 0 ? m4_ / static_cast<double>(count_) : 0.0; }

  private:
    std::uint64_t count_ = 0;
    double mean_ = 0.0, m2_ = 0.0, m3_ = 0.0, m4_ = 0.0;
};

struct MomentSummary {
    std::uint64_t count = 0;
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double stderr_mean = 0.0;
    double central2 = 0.0;
    double central3 = 0.0;
    double central4 = 0.0;
};

inline MomentSummary summarize(const RunningMoments& rm) {
    return MomentSummary{rm.count(),    rm.mean(),     rm.variance(), rm.stderr_mean(),
                         rm.central2(), rm.central3(), rm.central4()};
}

inline MomentSummary moments_with_se(const std::vector<double>& data) {
    require(data.size() >= 2, "moments_with_se: need at least 2 observations");
    RunningMoments rm;
    for (double x : data) rm.push(x);
    return summarize(rm);
}

// Two-sided Kolmogorov-Smirnov distance between the empirical CDF and `cdf`.
inline double ks_statistic(std::vector<double> data, const std::function<double(double)>& cdf) {
    require(!data.empty(), "ks_statistic: need at least 1 observation");
    std::sort(data.begin(), data.end());
    double n = static_cast<double>(data.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        double f = cdf(data[i]);
        sup = std::max(sup, f - static_cast<double>(i) / n);
        sup = std::max(sup, static_cast<double>(i + 1) / n - f);
    }
    return sup;
}

// Total-variation distance between an empirical histogram over {0,1,...}
// and Poisson(mu), with all mass from the tail cutoff up folded into one
// bucket (Poisson mass beyond the cutoff is < 1e-12).
inline double poisson_tv(const std::vector<std::uint64_t>& counts, double mu) {
    require(!counts.empty(), "poisson_tv: histogram must be nonempty");
    require(mu >= 0.0, "poisson_tv: mu must be >= 0");
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    require(total > 0, "poisson_tv: histogram must have mass");

    auto cutoff = static_cast<std::size_t>(std::ceil(mu + 12.0 * std::sqrt(mu + 1.0)));
    double pmf = std::exp(-mu);
    double head_pmf_sum = 0.0;
    double tv = 0.0;
    for (std::size_t k = 0; k < cutoff; ++k) {
        double emp = k < counts.size() ? static_cast<double>(counts[k]) / total : 0.0;
        tv += std::abs(emp - pmf);
        head_pmf_sum += pmf;
        pmf *= mu / static_cast<double>(k + 1);
    }
    double emp_tail = 0.0;
    for (std::size_t k = cutoff; k < counts.size(); ++k)
        emp_tail += static_cast<double>(counts[k]) / total;
    tv += std::abs(emp_tail - (1.0 - head_pmf_sum));
    return 0.5 * tv;
}

// One exact-membership cell of the subset-intersection experiment: the
// subsets are keyed by a bitmask over {0..l}, |mask| >= 2.
struct IntersectionCell {
    std::uint32_t mask = 0;
    double mu = 0.0;                    // product-form Poisson mean
    std::vector<std::uint64_t> histogram;
    double tv = 0.0;                    // TV(histogram, Poisson(mu))
    double nonzero_frequency = 0.0;     // empirical P(cell count >= 1)
};

struct IntersectionExperiment {
    std::uint64_t trials = 0;
    std::vector<IntersectionCell> cells;

    const IntersectionCell& cell(std::uint32_t mask) const {
        for (const auto& c : cells)
            if (c.mask == mask) return c;
        throw ConfigError("IntersectionExperiment: no such cell");
    }
};

// Samples `ms.size()` independent uniform subsets of {0..n-1} per trial and
// histograms every exact-membership cell with |C| >= 2.
inline IntersectionExperiment subset_intersection_experiment(std::uint32_t n,
                                                             const std::vector<std::uint32_t>& ms,
                                                             std::uint64_t trials,
                                                             std::uint64_t seed) {
    std::size_t l = ms.size();
    require(l >= 2 && l <= 6, "subset_intersection_experiment: need 2..6 subsets");
    require(trials >= 1, "subset_intersection_experiment: trials must be >= 1");
    for (auto m : ms)
        require(m <= n, "subset_intersection_experiment: subset size must be <= n");

    std::vector<std::uint32_t> masks;
    for (std::uint32_t mask = 0; mask < (1u << l); ++mask)
        if (std::popcount(mask) >= 2) masks.push_back(mask);

    std::map<std::uint32_t, std::vector<std::uint64_t>> hist;
    std::map<std::uint32_t, std::uint64_t> nonzero;
    for (auto mask : masks) {
        hist[mask] = {};
        nonzero[mask] = 0;
    }

    SubsetSampler sampler;
    std::vector<std::uint32_t> subset;
    std::vector<std::uint32_t> member_mask(n, 0);
    std::vector<std::uint32_t> touched;
    std::vector<std::uint64_t> cell_count(1u << l, 0);

    for (std::uint64_t t = 0; t < trials; ++t) {
        Rng rng = Rng::stream(seed, tags::stat_subsets, t);
        touched.clear();
        for (std::size_t j = 0; j < l; ++j) {
            sampler.sample(rng, n, ms[j], subset);
            for (auto v : subset) {
                if (member_mask[v] == 0) touched.push_back(v);
                member_mask[v] |= 1u << j;
            }
        }
        for (auto v : touched) {
            std::uint32_t mask = member_mask[v];
            member_mask[v] = 0;
            if (std::popcount(mask) >= 2) ++cell_count[mask];
        }
        for (auto mask : masks) {
            std::uint64_t c = cell_count[mask];
            cell_count[mask] = 0;
            auto& h = hist[mask];
            if (h.size() <= c) h.resize(c + 1, 0);
            ++h[c];
            if (c >= 1) ++nonzero[mask];
        }
    }

    IntersectionExperiment out;
    out.trials = trials;
    for (auto mask : masks) {
        IntersectionCell cell;
        cell.mask = mask;
        std::vector<int> c_set;
        for (std::size_t j = 0; j < l; ++j)
            if (mask & (1u << j)) c_set.push_back(static_cast<int>(j));
        cell.mu = theory::poisson_intersection_mean(ms, n, c_set);
        cell.histogram = hist[mask];
        cell.tv = poisson_tv(cell.histogram, cell.mu);
        cell.nonzero_frequency = static_cast<double>(nonzero[mask]) / static_cast<double>(trials);
        out.cells.push_back(std::move(cell));
    }
    return out;
}

struct FrequencyEstimate {
    double frequency = 0.0;
    double stderr_value = 0.0;
    std::uint64_t trials = 0;
};

// Empirical probability that two independent uniform bijections agree
// nowhere on their common domain. Domains are [0, m) and a shifted copy
// overlapping in `overlap_a` points; codomains likewise with `overlap_b`.
inline FrequencyEstimate zero_agreement_frequency(std::uint32_t m, std::uint32_t overlap_a,
                                                  std::uint32_t overlap_b, std::uint64_t trials,
                                                  std::uint64_t seed) {
    require(m >= 1, "zero_agreement_frequency: m must be >= 1");
    require(overlap_a <= m && overlap_b <= m, "zero_agreement_frequency: overlaps must be <= m");
    require(trials >= 1, "zero_agreement_frequency: trials must be >= 1");

    // sigma: [0,m) -> [0,m).   tau: [m-overlap_a, 2m-overlap_a) -> shifted codomain.
    // Common domain: [m-overlap_a, m); common codomain: [m-overlap_b, m).
    std::uint64_t zero_count = 0;
    std::vector<std::uint32_t> sigma(m), tau(m);
    for (std::uint64_t t = 0; t < trials; ++t) {
        Rng rng = Rng::stream(seed, tags::stat_bijections, t);
        for (std::uint32_t i = 0; i < m; ++i) sigma[i] = i;
        for (std::uint32_t i = 0; i < m; ++i) tau[i] = (m - overlap_b) + i;
        rng.shuffle(sigma);
        rng.shuffle(tau);
        bool any = false;
        for (std::uint32_t i = 0; i < overlap_a; ++i) {
            // Domain point (m - overlap_a) + i is sigma slot (m - overlap_a) + i
            // and tau slot i.
            if (sigma[(m - overlap_a) + i] == tau[i]) {
                any = true;
                break;
            }
        }
        zero_count += !any;
    }
    double f = static_cast<double>(zero_count) / static_cast<double>(trials);
    double se = std::sqrt(std::max(f * (1.0 - f), 0.0) / static_cast<double>(trials));
    return FrequencyEstimate{f, se, trials};
}

}  // namespace pgl::stats
