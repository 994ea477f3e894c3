#pragma once

// Shared helpers and independent oracles for the test suites. The oracles
// here deliberately re-derive results from first principles (plain maps,
// full sorts) instead of calling back into the structures they check.

#include "engine.hpp"
#include "events.hpp"
#include "index.hpp"
#include "matcher.hpp"
#include "nearline.hpp"
#include "rng.hpp"
#include "scorer.hpp"
#include "types.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <vector>

namespace tfms::test {

inline MutationEvent membership_event(std::uint64_t seq, TimePoint at, UserId user,
                                      std::vector<std::pair<CrowdId, TargetingType>> added,
                                      std::vector<CrowdId> removed = {}) {
    UserCrowdsChanged body;
    body.user = user;
    body.added = std::move(added);
    body.removed = std::move(removed);
    return MutationEvent{seq, at, std::move(body)};
}

inline Campaign make_campaign(CampaignId id, AdId ad,
                              std::vector<std::pair<CrowdId, Money>> targetings,
                              CampaignStatus status = CampaignStatus::Active,
                              Money budget = 100.0,
                              TargetingType type = TargetingType::Keywords) {
    Campaign c;
    c.id = id;
    c.ad = ad;
    c.status = status;
    c.budget_remaining = budget;
    for (const auto& [crowd, bid] : targetings) c.targetings.push_back({crowd, type, bid});
    return c;
}

inline MutationEvent upsert_event(std::uint64_t seq, TimePoint at, Campaign campaign) {
    return MutationEvent{seq, at, CampaignUpserted{std::move(campaign)}};
}

// ---------------------------------------------------------------------
// Log-replay oracle: the index semantics re-derived with plain containers.
struct ScanOracle {
    std::map<UserId, std::map<CrowdId, TargetingType>> user_crowds;
    std::map<CampaignId, Campaign> campaigns;

    void apply(const MutationEvent& event) {
        if (const auto* uc = std::get_if<UserCrowdsChanged>(&event.body)) {
            auto& crowds = user_crowds[uc->user];
            for (const auto& [crowd, type] : uc->added) crowds[crowd] = type;
            for (CrowdId crowd : uc->removed) crowds.erase(crowd);
            if (crowds.empty()) user_crowds.erase(uc->user);
        } else if (const auto* up = std::get_if<CampaignUpserted>(&event.body)) {
            campaigns[up->campaign.id] = up->campaign;
        } else if (const auto* st = std::get_if<CampaignStatusChanged>(&event.body)) {
            campaigns.at(st->campaign).status = st->status;
        } else if (const auto* bid = std::get_if<BidChanged>(&event.body)) {
            for (auto& t : campaigns.at(bid->campaign).targetings)
                if (t.crowd == bid->crowd) t.bid = bid->bid;
        } else if (const auto* budget = std::get_if<BudgetChanged>(&event.body)) {
            campaigns.at(budget->campaign).budget_remaining = budget->remaining;
        }
    }

    std::set<CrowdId> crowds_of(UserId user) const {
        std::set<CrowdId> out;
        auto it = user_crowds.find(user);
        if (it == user_crowds.end()) return out;
        for (const auto& [crowd, type] : it->second) out.insert(crowd);
        return out;
    }

    std::set<UserId> users_of(CrowdId crowd) const {
        std::set<UserId> out;
        for (const auto& [user, crowds] : user_crowds)
            if (crowds.count(crowd)) out.insert(user);
        return out;
    }

    // Active and Paused campaigns contribute entries; Canceled do not.
    std::map<AdId, Money> ads_of(CrowdId crowd) const {
        std::map<AdId, Money> out;
        for (const auto& [id, c] : campaigns) {
            if (c.status == CampaignStatus::Canceled) continue;
            if (const Targeting* t = c.find_targeting(crowd)) out[c.ad] = t->bid;
        }
        return out;
    }

    std::vector<std::pair<AdCrowdPair, Money>> candidates(UserId user) const {
        std::vector<std::pair<AdCrowdPair, Money>> out;
        for (CrowdId crowd : crowds_of(user))
            for (const auto& [ad, bid] : ads_of(crowd))
                out.push_back({AdCrowdPair{ad, crowd}, bid});
        return out;
    }
};

// ---------------------------------------------------------------------
// Independent quadratic-time top-n: score everything, full stable sort,
// take the prefix.
inline std::vector<ValuedPair> sort_oracle_top_n(UserId user, const ScanOracle& oracle,
                                                 const Scorer& scorer, std::size_t n,
                                                 TimePoint at) {
    std::vector<ValuedPair> scored;
    for (const auto& [pair, bid] : oracle.candidates(user))
        scored.push_back(ValuedPair{pair, scorer.value_measure(user, pair, bid), at});
    std::stable_sort(scored.begin(), scored.end(), [](const ValuedPair& a, const ValuedPair& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.pair.ad != b.pair.ad) return a.pair.ad < b.pair.ad;
        return a.pair.crowd < b.pair.crowd;
    });
    if (scored.size() > n) scored.resize(n);
    return scored;
}

inline bool same_pairs_and_scores(const std::vector<ValuedPair>& a,
                                  const std::vector<ValuedPair>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].pair != b[i].pair || a[i].score != b[i].score) return false;
    return true;
}

// Random little world: memberships + campaigns seeded into an index and the
// scan oracle side by side.
struct RandomWorld {
    TargetingIndex index;
    ScanOracle oracle;
    std::vector<UserId> users;
    std::vector<CrowdId> crowds;
    std::vector<CampaignId> campaigns;
    std::uint64_t next_seq = 0;

    void apply_both(const MutationEvent& event) {
        index.apply(event);
        oracle.apply(event);
    }
};

inline RandomWorld build_random_world(std::uint64_t seed, std::size_t n_users,
                                      std::size_t n_crowds, std::size_t n_campaigns,
                                      std::size_t max_crowds_per_user = 12,
                                      std::size_t max_targetings = 8) {
    Rng rng(seed);
    RandomWorld world;
    for (std::size_t i = 0; i < n_crowds; ++i) world.crowds.push_back(9000 + i);
    for (std::size_t i = 0; i < n_users; ++i) world.users.push_back(100 + i);

    for (std::size_t i = 0; i < n_campaigns; ++i) {
        CampaignId id = 5'000'000 + i;
        AdId ad = 7'000'000 + i;
        std::set<CrowdId> targets;
        std::size_t want = std::min(n_crowds, 1 + rng.next_below(max_targetings));
        while (targets.size() < want)
            targets.insert(world.crowds[rng.next_below(world.crowds.size())]);
        std::vector<std::pair<CrowdId, Money>> targetings;
        for (CrowdId crowd : targets)
            targetings.emplace_back(crowd, 0.01 + 0.01 * static_cast<double>(rng.next_below(1000)));
        world.apply_both(upsert_event(world.next_seq++, 0, make_campaign(id, ad, targetings)));
        world.campaigns.push_back(id);
    }
    for (UserId user : world.users) {
        std::set<CrowdId> member;
        std::size_t want = std::min(n_crowds, 1 + rng.next_below(max_crowds_per_user));
        while (member.size() < want)
            member.insert(world.crowds[rng.next_below(world.crowds.size())]);
        std::vector<std::pair<CrowdId, TargetingType>> added;
        for (CrowdId crowd : member)
            added.emplace_back(crowd, static_cast<TargetingType>(crowd % 3));
        world.apply_both(membership_event(world.next_seq++, 0, user, added));
    }
    return world;
}

}  // namespace tfms::test
