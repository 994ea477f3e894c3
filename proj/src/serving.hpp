#pragma once

#include "index.hpp"
#include "nearline.hpp"
#include "types.hpp"

#include <cstdint>

namespace tfms {

struct FetchResult {
    std::vector<ValuedPair> served;   // cached order preserved, invalid pairs dropped
    std::uint64_t dropped_invalid = 0;
    bool cache_miss = false;
    Duration staleness = 0;           // since the newer of last_full_refresh / last_delta
    std::size_t cached_length = 0;    // pre-filter list length
};

// The online half of the matcher: copy the cached list and filter invalid
// entries against the campaign registry. Never re-scores, never touches the
// targeting maps (work is proportional to the cached list length only).
FetchResult fetch(UserId user, const TopNCache& cache, const TargetingIndex& campaigns,
                  TimePoint at);

}  // namespace tfms
