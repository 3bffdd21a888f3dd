#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <bit>
#include <cstdint>
#include <numeric>
#include <string>

#include "pgl/bitmat.hpp"
#include "pgl/errors.hpp"
#include "pgl/graph.hpp"
#include "pgl/rng.hpp"

namespace pgl {

using int128 = __int128;
using uint128 = unsigned __int128;

// Exact matching count. `overflowed` means a Ryser partial term or sum left
// the signed 128-bit range (possible only for m >= 27); `exact` is then invalid.
struct PermanentValue {
    int128 exact = 0;
    bool overflowed = false;

    double as_double() const { return static_cast<double>(exact); }
};

inline std::string int128_to_string(int128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    uint128 x = neg ? static_cast<uint128>(-v) : static_cast<uint128>(v);
    std::string s;
    while (x > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(x % 10)));
        x /= 10;
    }
    if (neg) s.push_back('-');
    std::reverse(s.begin(), s.end());
    return s;
}

namespace perm_detail {

inline bool add_overflow_i128(int128 a, int128 b, int128* out) {
    auto ua = static_cast<uint128>(a), ub = static_cast<uint128>(b);
    uint128 s = ua + ub;
    *out = static_cast<int128>(s);
    return static_cast<bool>(((~(ua ^ ub)) & (ua ^ s)) >> 127);
}

inline bool mul_overflow_u128(uint128 a, uint128 b, uint128* out) {
    if (a == 0 || b == 0) {
        *out = 0;
        return false;
    }
    if (a > ~static_cast<uint128>(0) / b) return true;
    *out = a * b;
    return false;
}

}  // namespace perm_detail

// Ryser's inclusion-exclusion with Gray-code updates of the row sums,
// O(2^m * m). Row-sum products are taken in u64 over groups of <= 12 rows
// (each group product < 32^12 < 2^64) and combined into 128 bits with
// overflow checks.
inline PermanentValue permanent_exact(const SquareMask& mat) {
    int m = mat.n;
    require(m >= 1 && m <= 32, "permanent_exact: m must be in [1, 32]");

    std::array<std::uint64_t, 32> col{};
    for (int j = 0; j < m; ++j) col[static_cast<std::size_t>(j)] = mat.column_mask(j);

    std::array<std::int32_t, 32> rowsum{};
    int zero_rows = m;

    // Groups of rows whose u64 partial products cannot overflow.
    int group_count = (m + 11) / 12;
    std::array<int, 4> group_end{};
    for (int g = 0; g < group_count; ++g)
        group_end[static_cast<std::size_t>(g)] = std::min(m, (g + 1) * 12);

    int128 acc = 0;
    const std::uint64_t total = 1ULL << m;
    for (std::uint64_t k = 1; k < total; ++k) {
        int j = std::countr_zero(k);
        std::uint64_t gray = k ^ (k >> 1);
        bool added = (gray >> j) & 1ULL;
        std::uint64_t bits = col[static_cast<std::size_t>(j)];
        if (added) {
            while (bits) {
                int i = std::countr_zero(bits);
                bits &= bits - 1;
                if (rowsum[static_cast<std::size_t>(i)]++ == 0) --zero_rows;
            }
        } else {
            while (bits) {
                int i = std::countr_zero(bits);
                bits &= bits - 1;
                if (--rowsum[static_cast<std::size_t>(i)] == 0) ++zero_rows;
            }
        }
        if (zero_rows > 0) continue;

        uint128 term = 1;
        int row = 0;
        for (int g = 0; g < group_count; ++g) {
            std::uint64_t prod = 1;
            int end = group_end[static_cast<std::size_t>(g)];
            for (; row < end; ++row)
                prod *= static_cast<std::uint64_t>(rowsum[static_cast<std::size_t>(row)]);
            if (g == 0) {
                term = prod;
            } else if (perm_detail::mul_overflow_u128(term, prod, &term)) {
                return PermanentValue{0, true};
            }
        }
        if (term >> 127) return PermanentValue{0, true};

        bool negative = ((m - std::popcount(gray)) & 1) != 0;
        int128 signed_term = negative ? -static_cast<int128>(term) : static_cast<int128>(term);
        if (perm_detail::add_overflow_i128(acc, signed_term, &acc))
            return PermanentValue{0, true};
    }
    return PermanentValue{acc, false};
}

// Oracle: sum over all m! permutations. m <= 9.
inline PermanentValue permanent_bruteforce(const SquareMask& mat) {
    int m = mat.n;
    require(m >= 1 && m <= 9, "permanent_bruteforce: m must be in [1, 9]");
    std::array<int, 9> idx{};
    std::iota(idx.begin(), idx.begin() + m, 0);
    std::uint64_t count = 0;
    do {
        bool all = true;
        for (int i = 0; i < m; ++i) {
            if (!mat.get(i, idx[static_cast<std::size_t>(i)])) {
                all = false;
                break;
            }
        }
        count += all;
    } while (std::next_permutation(idx.begin(), idx.begin() + m));
    return PermanentValue{static_cast<int128>(count), false};
}

// De(j): permutations of j elements without fixed points. Exact for j <= 34.
inline uint128 derangements(int j) {
    require(j >= 0 && j <= 34, "derangements: exact values available for j in [0, 34]");
    if (j == 0) return 1;
    if (j == 1) return 0;
    uint128 prev2 = 1, prev1 = 0;
    for (int i = 2; i <= j; ++i) {
        uint128 cur = static_cast<uint128>(i - 1) * (prev1 + prev2);
        prev2 = prev1;
        prev1 = cur;
    }
    return prev1;
}

// De(j)/j! without overflow; tends to 1/e.
inline double derangement_ratio(int j) {
    require(j >= 0, "derangement_ratio: j must be >= 0");
    if (j == 0) return 1.0;
    if (j == 1) return 0.0;
    double prev2 = 1.0, prev1 = 0.0;
    for (int i = 2; i <= j; ++i) {
        double cur = ((i - 1) * prev1 + prev2) / i;
        prev2 = prev1;
        prev1 = cur;
    }
    return prev1;
}

inline double factorial_as_double(int m) {
    int128 f = 1;
    for (int i = 2; i <= m; ++i) f *= i;
    return static_cast<double>(f);
}

namespace perm_detail {

inline std::uint64_t perm3_masks(std::uint64_t r0, std::uint64_t r1, std::uint64_t r2) {
    std::uint64_t a = r0 & 1, b = (r0 >> 1) & 1, c = (r0 >> 2) & 1;
    std::uint64_t d = r1 & 1, e = (r1 >> 1) & 1, f = (r1 >> 2) & 1;
    std::uint64_t g = r2 & 1, h = (r2 >> 1) & 1, i = (r2 >> 2) & 1;
    return a * (e * i + f * h) + b * (d * i + f * g) + c * (d * h + e * g);
}

inline std::uint64_t drop_bit(std::uint64_t r, int j) {
    std::uint64_t low = r & ((1ULL << j) - 1);
    return low | ((r >> (j + 1)) << j);
}

// Direct expansions for the tiny orders that dominate the enumeration loops.
inline std::uint64_t matching_count_small(const SquareMask& mat) {
    const auto& r = mat.row;
    switch (mat.n) {
        case 1:
            return r[0] & 1;
        case 2:
            return (r[0] & 1) * ((r[1] >> 1) & 1) + ((r[0] >> 1) & 1) * (r[1] & 1);
        case 3:
            return perm3_masks(r[0], r[1], r[2]);
        case 4: {
            std::uint64_t total = 0;
            for (int j = 0; j < 4; ++j) {
                if (!((r[0] >> j) & 1)) continue;
                total += perm3_masks(drop_bit(r[1], j), drop_bit(r[2], j), drop_bit(r[3], j));
            }
            return total;
        }
        default:
            return 0;
    }
}

inline double permanent_or_throw(const SquareMask& mat) {
    if (mat.n <= 4 && mat.n >= 1)
        return static_cast<double>(matching_count_small(mat));
    PermanentValue pv = permanent_exact(mat);
    if (pv.overflowed) throw std::overflow_error("permanent_exact: 128-bit overflow");
    return pv.as_double();
}

}  // namespace perm_detail

// Y(A, B): matching count of the induced submatrix over p^m * m!.
inline double normalized_matching_sum(const BipartiteGraph& g, const SubgraphSample& s) {
    require(g.p() > 0.0, "normalized_matching_sum: p must be in (0, 1]");
    auto m = static_cast<int>(s.m());
    require(m <= 32, "normalized_matching_sum: m must be <= 32");
    double perm = perm_detail::permanent_or_throw(biadjacency_submatrix(g, s));
    return perm / (std::pow(g.p(), m) * factorial_as_double(m));
}

// Matching count of an n x n 0/1 matrix over p^n * n!. Mean 1 over
// matrices with i.i.d. Bernoulli(p) entries.
struct NormalizedHafnian {
    double value = 0.0;
};

inline NormalizedHafnian normalized_hafnian_square(const SquareMask& xi, double p) {
    require(p > 0.0 && p <= 1.0, "normalized_hafnian_square: p must be in (0, 1]");
    require(xi.n >= 1 && xi.n <= 32, "normalized_hafnian_square: n must be in [1, 32]");
    double perm = perm_detail::permanent_or_throw(xi);
    return NormalizedHafnian{perm / (std::pow(p, xi.n) * factorial_as_double(xi.n))};
}

// Row-sum surrogate: prod_i rowsum_i / (n p). Shares the lognormal limit
// with the normalized matching count.
inline double hafnian_rowsum_approx(const SquareMask& xi, double p) {
    require(p > 0.0 && p <= 1.0, "hafnian_rowsum_approx: p must be in (0, 1]");
    require(xi.n >= 1, "hafnian_rowsum_approx: n must be >= 1");
    double out = 1.0;
    double np = static_cast<double>(xi.n) * p;
    for (int i = 0; i < xi.n; ++i) out *= static_cast<double>(xi.row_sum(i)) / np;
    return out;
}

// i.i.d. Bernoulli(p) square 0/1 matrix, n <= 32.
inline SquareMask random_square_mask(int n, double p, Rng& rng) {
    SquareMask m = SquareMask::zeros(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (rng.bernoulli(p)) m.set(i, j);
    return m;
}

}  // namespace pgl
