#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace tfms {

// splitmix64, the usual finalizer. Stable across platforms, which every
// seeded draw in this project relies on (std::*_distribution is not).
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return mix64(mix64(a) ^ (b + 0x9e3779b97f4a7c15ULL));
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix64(mix64(a, b) ^ (c + 0x632be59bd9b4e019ULL));
}

// [0, 1)
inline double to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // [0, bound)
    std::uint64_t next_below(std::uint64_t bound) {
        return bound == 0 ? 0 : next_u64() % bound;
    }

    // [lo, hi] inclusive
    std::int64_t next_between(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    double next_unit() { return to_unit(next_u64()); }

private:
    std::uint64_t state_;
};

// Rank-weighted sampler over {0..n-1} with weight(rank) = (rank+1)^-s.
// CDF + binary search; deterministic for a given Rng stream.
class ZipfSampler {
public:
    ZipfSampler(std::size_t n, double exponent) : cdf_(n) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += std::pow(static_cast<double>(i + 1), -exponent);
            cdf_[i] = acc;
        }
        total_ = acc;
    }

    std::size_t sample(Rng& rng) const {
        double u = rng.next_unit() * total_;
        std::size_t lo = 0, hi = cdf_.size();
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (cdf_[mid] < u)
                lo = mid + 1;
            else
                hi = mid;
        }
        return lo < cdf_.size() ? lo : cdf_.size() - 1;
    }

    std::size_t size() const { return cdf_.size(); }

private:
    std::vector<double> cdf_;
    double total_ = 0.0;
};

}  // namespace tfms
