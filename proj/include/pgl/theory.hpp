#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "pgl/errors.hpp"
#include "pgl/matchperm.hpp"

// Closed-form predictions. Formulas are implemented exactly as stated, with
// no finite-size correction terms; experiments own the tolerance budget.
namespace pgl::theory {

struct TheoryParams {
    std::uint32_t n = 0;
    std::uint32_t m = 0;
    std::uint32_t k = 0;
    double p = 0.5;
    double c = 0.8;

    double epsilon() const { return static_cast<double>(k) / std::sqrt(static_cast<double>(n)); }

    void validate() const {
        require(n >= 1, "TheoryParams: n must be >= 1");
        require(k <= n, "TheoryParams: k must be <= n");
        require(m <= n, "TheoryParams: m must be <= n");
        require(p > 0.0 && p <= 1.0, "TheoryParams: p must be in (0, 1]");
        require(c > 0.0 && c < 1.0, "TheoryParams: c must be in (0, 1)");
    }
};

// E[W(i)] in the large-n limit: e^{1/p - 1}.
inline double expected_weight(double p) {
    require(p > 0.0 && p <= 1.0, "expected_weight: p must be in (0, 1]");
    return std::exp(1.0 / p - 1.0);
}

// Planted-minus-background mean weight: e^{1/p-1} (1/p - 1) 2k/n.
inline double weight_bias(double p, std::uint32_t k, std::uint32_t n) {
    require(p > 0.0 && p <= 1.0, "weight_bias: p must be in (0, 1]");
    require(k <= n, "weight_bias: k must be <= n");
    return expected_weight(p) * (1.0 / p - 1.0) * (2.0 * k / n);
}

// Covariance of sqrt(n) Z(i), sqrt(n) Z(j):
// 4 (1/p - 1) e^{2(1/p - 1)} [1{i=j} + m^2/n].
inline double covariance_entry(double p, std::uint32_t m, std::uint32_t n, bool same_node) {
    require(p > 0.0 && p <= 1.0, "covariance_entry: p must be in (0, 1]");
    require(n >= 1, "covariance_entry: n must be >= 1");
    double base = 4.0 * (1.0 / p - 1.0) * std::exp(2.0 * (1.0 / p - 1.0));
    double cross = static_cast<double>(m) * m / n;
    return base * ((same_node ? 1.0 : 0.0) + cross);
}

namespace detail {

inline double wick_recurse(const std::vector<std::vector<double>>& cov,
                           const std::vector<int>& alive) {
    if (alive.empty()) return 1.0;
    int first = alive[0];
    double total = 0.0;
    for (std::size_t j = 1; j < alive.size(); ++j) {
        int partner = alive[j];
        std::vector<int> rest;
        rest.reserve(alive.size() - 2);
        for (std::size_t t = 1; t < alive.size(); ++t)
            if (t != j) rest.push_back(alive[t]);
        total += cov[static_cast<std::size_t>(first)][static_cast<std::size_t>(partner)] *
                 wick_recurse(cov, rest);
    }
    return total;
}

}  // namespace detail

// Sum over perfect pairings of products of covariance entries; 0 for odd order.
inline double wick_moment(const std::vector<std::vector<double>>& cov) {
    std::size_t l = cov.size();
    require(l >= 1, "wick_moment: order must be >= 1");
    for (const auto& row : cov)
        require(row.size() == l, "wick_moment: covariance matrix must be square");
    if (l % 2 != 0) return 0.0;
    std::vector<int> alive(l);
    for (std::size_t i = 0; i < l; ++i) alive[i] = static_cast<int>(i);
    return detail::wick_recurse(cov, alive);
}

// Poisson mean for the exact-membership cell of the subsets indexed by
// c_set: prod_{j in c_set} m_j / n^{|c_set| - 1}.
inline double poisson_intersection_mean(const std::vector<std::uint32_t>& ms, std::uint32_t n,
                                        const std::vector<int>& c_set) {
    require(c_set.size() >= 2, "poisson_intersection_mean: |c_set| must be >= 2");
    require(n >= 1, "poisson_intersection_mean: n must be >= 1");
    double mu = 1.0;
    for (int j : c_set) {
        require(j >= 0 && static_cast<std::size_t>(j) < ms.size(),
                "poisson_intersection_mean: index out of range");
        require(ms[static_cast<std::size_t>(j)] <= n,
                "poisson_intersection_mean: subset size must be <= n");
        mu *= static_cast<double>(ms[static_cast<std::size_t>(j)]);
    }
    for (std::size_t t = 1; t < c_set.size(); ++t) mu /= static_cast<double>(n);
    return mu;
}

struct LognormalParams {
    double mu = 0.0;
    double sigma2 = 0.0;
};

// Limit law of the normalized matching count: mu = -(1-p)/(2p), sigma^2 = (1-p)/p.
inline LognormalParams lognormal_params(double p) {
    require(p > 0.0 && p <= 1.0, "lognormal_params: p must be in (0, 1]");
    return LognormalParams{-(1.0 - p) / (2.0 * p), (1.0 - p) / p};
}

// Exact finite-n second moment of the normalized matching count:
// sum_{i=0}^{n} p^{-i}/i! * De(n-i)/(n-i)!, in ratio form to stay in range.
inline double haf_second_moment_exact(std::uint32_t n, double p) {
    require(n >= 1, "haf_second_moment_exact: n must be >= 1");
    require(p > 0.0 && p <= 1.0, "haf_second_moment_exact: p must be in (0, 1]");
    std::vector<double> ratio(n + 1);
    for (std::uint32_t j = 0; j <= n; ++j) ratio[j] = derangement_ratio(static_cast<int>(j));
    double sum = 0.0;
    double term = 1.0;  // p^{-i} / i!
    for (std::uint32_t i = 0; i <= n; ++i) {
        sum += term * ratio[n - i];
        term *= (1.0 / p) / static_cast<double>(i + 1);
    }
    return sum;
}

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.5 * std::numbers::sqrt2); }

inline double std_normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// Rational initial guess (Acklam) refined by two Newton steps.
inline double std_normal_quantile(double q) {
    require(q > 0.0 && q < 1.0, "std_normal_quantile: q must be in (0, 1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double q_low = 0.02425;
    double x;
    if (q < q_low) {
        double r = std::sqrt(-2.0 * std::log(q));
        x = (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
            ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
    } else if (q <= 1.0 - q_low) {
        double r = q - 0.5;
        double s = r * r;
        x = (((((a[0] * s + a[1]) * s + a[2]) * s + a[3]) * s + a[4]) * s + a[5]) * r /
            (((((b[0] * s + b[1]) * s + b[2]) * s + b[3]) * s + b[4]) * s + 1.0);
    } else {
        double r = std::sqrt(-2.0 * std::log(1.0 - q));
        x = -(((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
            ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
    }
    for (int it = 0; it < 2; ++it) {
        double err = std_normal_cdf(x) - q;
        double pdf = std_normal_pdf(x);
        if (pdf <= 0.0) break;
        x -= err / pdf;
    }
    return x;
}

// Expected fraction of planted scores ranking in the top c*n:
// 1 - Phi(Phi^{-1}(1 - c) - eps). The expected count is this times eps*sqrt(n).
inline double detection_proportion(double c, double eps) {
    require(c > 0.0 && c < 1.0, "detection_proportion: c must be in (0, 1)");
    require(eps >= 0.0, "detection_proportion: eps must be >= 0");
    return 1.0 - std_normal_cdf(std_normal_quantile(1.0 - c) - eps);
}

// Normalized-degree separation between planted and background nodes:
// K(1-p) / sqrt(n p (1-p)). Real-valued k admitted for scaling checks
// such as k = sqrt(np).
inline double degree_mean_shift(double p, double k, std::uint32_t n) {
    require(p > 0.0 && p < 1.0, "degree_mean_shift: p must be in (0, 1)");
    require(n >= 1 && k >= 0.0, "degree_mean_shift: need n >= 1, k >= 0");
    return k * (1.0 - p) / std::sqrt(static_cast<double>(n) * p * (1.0 - p));
}

}  // namespace pgl::theory
