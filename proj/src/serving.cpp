#include "serving.hpp"

namespace tfms {

FetchResult fetch(UserId user, const TopNCache& cache, const TargetingIndex& campaigns,
                  TimePoint at) {
    FetchResult result;
    TopNCache::Entry entry;
    if (!cache.lookup(user, entry)) {
        result.cache_miss = true;
        return result;
    }

    result.cached_length = entry.pairs.size();
    result.staleness = at - std::max(entry.last_full_refresh, entry.last_delta);
    result.served.reserve(entry.pairs.size());
    Campaign campaign;
    for (const auto& vp : entry.pairs) {
        if (campaigns.campaign_of_ad(vp.pair.ad, campaign) && is_valid(campaign, vp.pair, at))
            result.served.push_back(vp);
        else
            ++result.dropped_invalid;
    }
    return result;
}

}  // namespace tfms
