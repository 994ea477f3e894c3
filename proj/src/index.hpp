#pragma once

#include "events.hpp"
#include "types.hpp"

#include <atomic>
#include <cstdint>
#include <map>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

namespace tfms {

// The three targeting maps plus the campaign registry, kept mutually
// consistent under a single-writer/many-reader discipline. Read operations
// return value snapshots; a reader never observes a half-applied event.
//
// crowd_ads carries entries for Active and Paused campaigns (pause is a
// serving-time invalidation, not an index mutation); Cancel and targeting
// removal delete entries immediately.
class TargetingIndex {
public:
    // What an applied event changed, for the delta-update ingest.
    struct ApplyResult {
        std::uint64_t version = 0;
        // campaign events: crowd_ads entry diff for this ad
        AdId ad = 0;
        std::vector<CrowdId> entries_added;
        std::vector<CrowdId> entries_removed;
        std::vector<CrowdId> bids_changed;
        // membership events: effective joins/leaves for this user
        UserId user = 0;
        std::vector<std::pair<CrowdId, TargetingType>> member_added;
        std::vector<CrowdId> member_removed;
    };

    TargetingIndex() = default;

    // moves are for construction paths (load); never move a shared index
    TargetingIndex(TargetingIndex&& other) noexcept { move_from(std::move(other)); }
    TargetingIndex& operator=(TargetingIndex&& other) noexcept {
        if (this != &other) move_from(std::move(other));
        return *this;
    }

    // Validates, then mutates all maps atomically w.r.t. readers and bumps
    // the version. Throws Error(BadEvent) and leaves the index untouched on
    // a malformed or unresolvable event. Visit records are not mutations.
    ApplyResult apply(const MutationEvent& event);

    std::uint64_t version() const { return version_.load(std::memory_order_acquire); }

    // Exact, untruncated C(u); empty for unknown users.
    std::vector<std::pair<CrowdId, TargetingType>> crowds_of(UserId user) const;

    // Exact, untruncated A(c) with current bids.
    std::vector<std::pair<AdId, Money>> ads_of(CrowdId crowd) const;

    // Inverse of crowds_of restricted to one crowd.
    std::vector<UserId> users_of(CrowdId crowd) const;

    // Exact O(u): join of crowds_of and ads_of. No truncation, no validity
    // filtering; validity is a serving-time concern.
    std::vector<std::pair<AdCrowdPair, Money>> candidates(UserId user) const;

    // Campaign registry lookups (the ads-management side; intentionally not
    // counted as index reads).
    bool campaign_snapshot(CampaignId id, Campaign& out) const;
    bool campaign_of_ad(AdId ad, Campaign& out) const;

    struct Stats {
        std::uint64_t version = 0;
        std::size_t users = 0;
        std::size_t crowds_with_ads = 0;
        std::size_t campaigns = 0;
        std::size_t membership_entries = 0;
        std::size_t targeting_entries = 0;
    };
    Stats stats() const;

    // Total calls into the four read operations above; the serving module's
    // latency-proxy tests assert this does not move during fetch.
    std::uint64_t read_count() const { return reads_.load(std::memory_order_relaxed); }

    void save(const std::string& path) const;
    static TargetingIndex load(const std::string& path);

    // Content digest over the serialized form, version included.
    std::uint64_t digest() const;

    friend bool operator==(const TargetingIndex& a, const TargetingIndex& b);

private:
    ApplyResult apply_user_crowds(const UserCrowdsChanged& e);
    ApplyResult apply_upsert(const CampaignUpserted& e);
    ApplyResult apply_status(const CampaignStatusChanged& e);
    ApplyResult apply_bid(const BidChanged& e);
    ApplyResult apply_budget(const BudgetChanged& e);

    void serialize(class SnapshotWriter& w) const;
    void deserialize(class SnapshotReader& r);

    void move_from(TargetingIndex&& other) noexcept {
        user_crowds_ = std::move(other.user_crowds_);
        crowd_ads_ = std::move(other.crowd_ads_);
        crowd_users_ = std::move(other.crowd_users_);
        campaigns_ = std::move(other.campaigns_);
        ad_owner_ = std::move(other.ad_owner_);
        version_.store(other.version_.load());
        reads_.store(other.reads_.load());
    }

    std::uint64_t bump_version();

    mutable std::shared_mutex mu_;
    std::map<UserId, std::map<CrowdId, TargetingType>> user_crowds_;
    std::map<CrowdId, std::map<AdId, Money>> crowd_ads_;
    std::map<CrowdId, std::set<UserId>> crowd_users_;
    std::map<CampaignId, Campaign> campaigns_;
    std::map<AdId, CampaignId> ad_owner_;
    std::atomic<std::uint64_t> version_{0};
    mutable std::atomic<std::uint64_t> reads_{0};
};

}  // namespace tfms
