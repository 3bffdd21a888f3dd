#pragma once

#include <cstdint>
#include <algorithm>
#include <string_view>
#include <vector>

namespace pgl {

// Counter-style splittable generator built on the SplitMix64 finalizer.
// Every consumer derives its own stream from (seed, tag, index), so trial
// results do not depend on scheduling or thread count.
namespace rng_detail {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

// FNV-1a over the tag name, evaluated at compile time.
constexpr std::uint64_t tag_hash(std::string_view name) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace rng_detail

class Rng {
  public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t state) : state_(state) {}

    // Independent stream for (seed, operation tag, trial index).
    static Rng stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) {
        using rng_detail::mix64;
        std::uint64_t s = mix64(seed + rng_detail::kGamma);
        s = mix64(s ^ tag);
        s = mix64(s ^ (index + rng_detail::kGamma));
        return Rng(s);
    }

    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~0ULL; }

    std::uint64_t operator()() { return next_u64(); }

    std::uint64_t next_u64() {
        state_ += rng_detail::kGamma;
        return rng_detail::mix64(state_);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_double() < p; }

    // Uniform in [0, bound) without modulo bias (Lemire rejection).
    std::uint64_t below(std::uint64_t bound) {
        using u128 = unsigned __int128;
        std::uint64_t x = next_u64();
        u128 m = static_cast<u128>(x) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            std::uint64_t threshold = (0 - bound) % bound;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<u128>(x) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    std::uint32_t below32(std::uint32_t bound) {
        return static_cast<std::uint32_t>(below(bound));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

  private:
    std::uint64_t state_;
};

// Stream tags, one per randomized operation.
namespace tags {
inline constexpr std::uint64_t graph_gen       = rng_detail::tag_hash("graph.gen");
inline constexpr std::uint64_t graph_plant     = rng_detail::tag_hash("graph.plant");
inline constexpr std::uint64_t gbs_exact       = rng_detail::tag_hash("gbs.sample_exact");
inline constexpr std::uint64_t gbs_mcmc        = rng_detail::tag_hash("gbs.sample_mcmc");
inline constexpr std::uint64_t weight_mc       = rng_detail::tag_hash("weights.mc_perm");
inline constexpr std::uint64_t weight_ind      = rng_detail::tag_hash("weights.mc_indicator");
inline constexpr std::uint64_t weight_struct   = rng_detail::tag_hash("weights.structural");
inline constexpr std::uint64_t stat_subsets    = rng_detail::tag_hash("stats.subset_intersection");
inline constexpr std::uint64_t stat_bijections = rng_detail::tag_hash("stats.zero_agreement");
inline constexpr std::uint64_t detect_power    = rng_detail::tag_hash("detect.power");
inline constexpr std::uint64_t detect_calib    = rng_detail::tag_hash("detect.calibration");
inline constexpr std::uint64_t detect_surrogate= rng_detail::tag_hash("detect.surrogate");
inline constexpr std::uint64_t exp_trial       = rng_detail::tag_hash("experiment.trial");
}  // namespace tags

// Uniform k-subset of {0, ..., n-1} by Floyd's algorithm, returned sorted.
// `scratch` is reused between calls to avoid per-draw clearing.
class SubsetSampler {
  public:
    void sample(Rng& rng, std::uint32_t n, std::uint32_t k, std::vector<std::uint32_t>& out) {
        ensure(n);
        ++epoch_;
        out.clear();
        for (std::uint64_t j = n - k; j < n; ++j) {
            auto t = static_cast<std::uint32_t>(rng.below(j + 1));
            if (stamp_[t] == epoch_) {
                stamp_[j] = epoch_;
                out.push_back(static_cast<std::uint32_t>(j));
            } else {
                stamp_[t] = epoch_;
                out.push_back(t);
            }
        }
        std::sort(out.begin(), out.end());
    }

    // As above but with `forced` always included (and counted toward k).
    void sample_containing(Rng& rng, std::uint32_t n, std::uint32_t k, std::uint32_t forced,
                           std::vector<std::uint32_t>& out) {
        ensure(n);
        ++epoch_;
        out.clear();
        out.push_back(forced);
        stamp_[forced] = epoch_;
        std::uint32_t need = k - 1;
        // Floyd over the n-1 remaining vertices, mapped around `forced`.
        for (std::uint64_t j = (n - 1) - need; j < n - 1; ++j) {
            auto t = static_cast<std::uint32_t>(rng.below(j + 1));
            std::uint32_t vt = t < forced ? t : t + 1;
            std::uint32_t vj = j < forced ? static_cast<std::uint32_t>(j)
                                          : static_cast<std::uint32_t>(j) + 1;
            if (stamp_[vt] == epoch_) {
                stamp_[vj] = epoch_;
                out.push_back(vj);
            } else {
                stamp_[vt] = epoch_;
                out.push_back(vt);
            }
        }
        std::sort(out.begin(), out.end());
    }

  private:
    void ensure(std::uint32_t n) {
        if (stamp_.size() < n) stamp_.assign(n, 0);
    }
    std::vector<std::uint64_t> stamp_;
    std::uint64_t epoch_ = 0;
};

}  // namespace pgl
