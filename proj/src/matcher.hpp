#pragma once

#include "index.hpp"
#include "scorer.hpp"
#include "types.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace tfms {

struct TruncationConfig {
    static constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

    std::size_t m = 100;    // max crowds kept per user per channel
    std::size_t k = 2000;   // max ads kept per crowd
    std::size_t n = 50;     // final candidate count (production value 5000)

    bool truncates() const { return m != kUnbounded || k != kUnbounded; }

    friend bool operator==(const TruncationConfig&, const TruncationConfig&) = default;
};

// Exact work counters. Parallel callers keep one meter per worker and merge.
struct CostMeter {
    std::uint64_t user_crowd_pairs_examined = 0;
    std::uint64_t user_ad_pairs_scored = 0;

    void merge(const CostMeter& other) {
        user_crowd_pairs_examined += other.user_crowd_pairs_examined;
        user_ad_pairs_scored += other.user_ad_pairs_scored;
    }
};

// Per-request record of what the two truncation stages dropped.
struct TruncationBreakdown {
    std::uint64_t crowds_total = 0;
    std::uint64_t crowds_kept = 0;
    std::uint64_t ads_total = 0;  // over kept crowds
    std::uint64_t ads_kept = 0;   // |O1(u)|
};

// Truncated two-stage online matcher: top-m crowds per channel by rule
// score, top-k ads per crowd by rule score, then top-n of the join by
// value_measure. Ties everywhere break by id ascending.
std::vector<ValuedPair> match_truncated(UserId user, const TargetingIndex& index,
                                        const Scorer& scorer, const TruncationConfig& config,
                                        CostMeter& meter, TimePoint at,
                                        TruncationBreakdown* breakdown = nullptr);

// Brute-force optimum: scores every pair of O(u). The system-wide oracle.
std::vector<ValuedPair> match_optimal(UserId user, const TargetingIndex& index,
                                      const Scorer& scorer, std::size_t n, CostMeter& meter,
                                      TimePoint at);

// Sort by (score desc, ad asc, crowd asc) and keep the first n.
void take_top_n(std::vector<ValuedPair>& pairs, std::size_t n);

}  // namespace tfms
