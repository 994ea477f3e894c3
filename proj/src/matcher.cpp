#include "matcher.hpp"

#include <algorithm>
#include <array>

namespace tfms {

void take_top_n(std::vector<ValuedPair>& pairs, std::size_t n) {
    if (pairs.size() > n) {
        std::partial_sort(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(n),
                          pairs.end(), valued_pair_less);
        pairs.resize(n);
    } else {
        std::sort(pairs.begin(), pairs.end(), valued_pair_less);
    }
}

std::vector<ValuedPair> match_truncated(UserId user, const TargetingIndex& index,
                                        const Scorer& scorer, const TruncationConfig& config,
                                        CostMeter& meter, TimePoint at,
                                        TruncationBreakdown* breakdown) {
    auto memberships = index.crowds_of(user);
    meter.user_crowd_pairs_examined += memberships.size();
    if (breakdown) breakdown->crowds_total += memberships.size();

    // stage 1: per-channel crowd truncation
    std::array<std::vector<CrowdId>, kTargetingTypeCount> channels;
    for (const auto& [crowd, type] : memberships)
        channels[static_cast<std::size_t>(type)].push_back(crowd);

    std::vector<CrowdId> kept;
    kept.reserve(memberships.size());
    for (auto& channel : channels) {
        auto by_rule = [&](CrowdId a, CrowdId b) {
            double sa = scorer.crowd_score(user, a);
            double sb = scorer.crowd_score(user, b);
            if (sa != sb) return sa > sb;
            return a < b;
        };
        if (config.m != TruncationConfig::kUnbounded && channel.size() > config.m) {
            std::partial_sort(channel.begin(), channel.begin() + static_cast<std::ptrdiff_t>(config.m),
                              channel.end(), by_rule);
            channel.resize(config.m);
        }
        kept.insert(kept.end(), channel.begin(), channel.end());
    }

    if (breakdown) breakdown->crowds_kept += kept.size();

    // stage 2: per-crowd ad truncation, then value scoring over the join
    std::vector<ValuedPair> scored;
    for (CrowdId crowd : kept) {
        auto ads = index.ads_of(crowd);
        if (breakdown) breakdown->ads_total += ads.size();
        if (config.k != TruncationConfig::kUnbounded && ads.size() > config.k) {
            auto by_rule = [&](const std::pair<AdId, Money>& a, const std::pair<AdId, Money>& b) {
                double sa = scorer.ad_score(a.first);
                double sb = scorer.ad_score(b.first);
                if (sa != sb) return sa > sb;
                return a.first < b.first;
            };
            std::partial_sort(ads.begin(), ads.begin() + static_cast<std::ptrdiff_t>(config.k),
                              ads.end(), by_rule);
            ads.resize(config.k);
        }
        for (const auto& [ad, bid] : ads) {
            AdCrowdPair pair{ad, crowd};
            scored.push_back(ValuedPair{pair, scorer.value_measure(user, pair, bid), at});
        }
    }
    meter.user_ad_pairs_scored += scored.size();
    if (breakdown) breakdown->ads_kept += scored.size();

    take_top_n(scored, config.n);
    return scored;
}

std::vector<ValuedPair> match_optimal(UserId user, const TargetingIndex& index,
                                      const Scorer& scorer, std::size_t n, CostMeter& meter,
                                      TimePoint at) {
    auto memberships = index.crowds_of(user);
    meter.user_crowd_pairs_examined += memberships.size();

    std::vector<ValuedPair> scored;
    for (const auto& [crowd, type] : memberships) {
        (void)type;
        for (const auto& [ad, bid] : index.ads_of(crowd)) {
            AdCrowdPair pair{ad, crowd};
            scored.push_back(ValuedPair{pair, scorer.value_measure(user, pair, bid), at});
        }
    }
    meter.user_ad_pairs_scored += scored.size();

    take_top_n(scored, n);
    return scored;
}

}  // namespace tfms
