#include "index.hpp"

#include "snapshot.hpp"

#include <algorithm>
#include <mutex>

namespace tfms {

namespace {

constexpr char kIndexMagic[8] = {'T', 'F', 'M', 'S', 'I', 'D', 'X', '1'};

void validate_campaign(const Campaign& c) {
    if (c.status == CampaignStatus::Canceled)
        throw Error(ErrorCode::BadEvent, "campaign_upserted cannot carry status canceled; "
                                         "cancel via campaign_status_changed");
    if (c.budget_remaining < 0.0)
        throw Error(ErrorCode::BadEvent, "campaign " + std::to_string(c.id) + ": negative budget");
    std::set<CrowdId> seen;
    for (const auto& t : c.targetings) {
        if (t.bid <= 0.0)
            throw Error(ErrorCode::BadEvent,
                        "campaign " + std::to_string(c.id) + ": non-positive bid on crowd " +
                            std::to_string(t.crowd));
        if (!seen.insert(t.crowd).second)
            throw Error(ErrorCode::BadEvent, "campaign " + std::to_string(c.id) +
                                                 ": duplicate targeting for crowd " +
                                                 std::to_string(t.crowd));
    }
}

}  // namespace

std::uint64_t TargetingIndex::bump_version() {
    return version_.fetch_add(1, std::memory_order_acq_rel) + 1;
}

TargetingIndex::ApplyResult TargetingIndex::apply(const MutationEvent& event) {
    if (event.is_visit())
        throw Error(ErrorCode::BadEvent, "visit records are traffic, not index mutations");
    std::unique_lock lock(mu_);
    return std::visit(
        [&](const auto& body) -> ApplyResult {
            using T = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<T, UserCrowdsChanged>)
                return apply_user_crowds(body);
            else if constexpr (std::is_same_v<T, CampaignUpserted>)
                return apply_upsert(body);
            else if constexpr (std::is_same_v<T, CampaignStatusChanged>)
                return apply_status(body);
            else if constexpr (std::is_same_v<T, BidChanged>)
                return apply_bid(body);
            else if constexpr (std::is_same_v<T, BudgetChanged>)
                return apply_budget(body);
            else
                throw Error(ErrorCode::BadEvent, "unreachable");
        },
        event.body);
}

TargetingIndex::ApplyResult TargetingIndex::apply_user_crowds(const UserCrowdsChanged& e) {
    ApplyResult res;
    res.user = e.user;
    auto& crowds = user_crowds_[e.user];
    for (const auto& [crowd, type] : e.added) {
        auto [it, inserted] = crowds.insert_or_assign(crowd, type);
        (void)it;
        if (inserted) {
            crowd_users_[crowd].insert(e.user);
            res.member_added.emplace_back(crowd, type);
        }
    }
    for (CrowdId crowd : e.removed) {
        if (crowds.erase(crowd) > 0) {
            auto cu = crowd_users_.find(crowd);
            if (cu != crowd_users_.end()) {
                cu->second.erase(e.user);
                if (cu->second.empty()) crowd_users_.erase(cu);
            }
            res.member_removed.push_back(crowd);
            // an add in the same event that was then removed is not a join
            std::erase_if(res.member_added, [&](const auto& p) { return p.first == crowd; });
        }
    }
    if (crowds.empty()) user_crowds_.erase(e.user);
    res.version = bump_version();
    return res;
}

TargetingIndex::ApplyResult TargetingIndex::apply_upsert(const CampaignUpserted& e) {
    const Campaign& next = e.campaign;
    validate_campaign(next);

    auto existing = campaigns_.find(next.id);
    if (existing != campaigns_.end()) {
        if (existing->second.status == CampaignStatus::Canceled)
            throw Error(ErrorCode::BadEvent,
                        "campaign " + std::to_string(next.id) + " is canceled (terminal)");
        if (existing->second.ad != next.ad)
            throw Error(ErrorCode::BadEvent, "campaign " + std::to_string(next.id) +
                                                 " cannot change its ad id");
    } else {
        auto owner = ad_owner_.find(next.ad);
        if (owner != ad_owner_.end() && owner->second != next.id)
            throw Error(ErrorCode::BadEvent, "ad " + std::to_string(next.ad) +
                                                 " already owned by campaign " +
                                                 std::to_string(owner->second));
    }

    ApplyResult res;
    res.ad = next.ad;

    std::map<CrowdId, Money> old_entries;
    if (existing != campaigns_.end())
        for (const auto& t : existing->second.targetings) old_entries.emplace(t.crowd, t.bid);

    for (const auto& t : next.targetings) {
        auto old = old_entries.find(t.crowd);
        if (old == old_entries.end())
            res.entries_added.push_back(t.crowd);
        else if (old->second != t.bid)
            res.bids_changed.push_back(t.crowd);
        crowd_ads_[t.crowd][next.ad] = t.bid;
    }
    for (const auto& [crowd, bid] : old_entries) {
        (void)bid;
        if (next.find_targeting(crowd) == nullptr) {
            res.entries_removed.push_back(crowd);
            auto ca = crowd_ads_.find(crowd);
            if (ca != crowd_ads_.end()) {
                ca->second.erase(next.ad);
                if (ca->second.empty()) crowd_ads_.erase(ca);
            }
        }
    }

    campaigns_[next.id] = next;
    ad_owner_[next.ad] = next.id;
    res.version = bump_version();
    return res;
}

TargetingIndex::ApplyResult TargetingIndex::apply_status(const CampaignStatusChanged& e) {
    auto it = campaigns_.find(e.campaign);
    if (it == campaigns_.end())
        throw Error(ErrorCode::BadEvent, "unknown campaign " + std::to_string(e.campaign));
    if (it->second.status == CampaignStatus::Canceled)
        throw Error(ErrorCode::BadEvent,
                    "campaign " + std::to_string(e.campaign) + " is canceled (terminal)");

    ApplyResult res;
    res.ad = it->second.ad;
    if (e.status == CampaignStatus::Canceled) {
        // cancel deletes every targeting entry of the campaign right away
        for (const auto& t : it->second.targetings) {
            auto ca = crowd_ads_.find(t.crowd);
            if (ca != crowd_ads_.end()) {
                ca->second.erase(it->second.ad);
                if (ca->second.empty()) crowd_ads_.erase(ca);
            }
            res.entries_removed.push_back(t.crowd);
        }
    }
    it->second.status = e.status;
    res.version = bump_version();
    return res;
}

TargetingIndex::ApplyResult TargetingIndex::apply_bid(const BidChanged& e) {
    auto it = campaigns_.find(e.campaign);
    if (it == campaigns_.end())
        throw Error(ErrorCode::BadEvent, "unknown campaign " + std::to_string(e.campaign));
    if (it->second.status == CampaignStatus::Canceled)
        throw Error(ErrorCode::BadEvent,
                    "campaign " + std::to_string(e.campaign) + " is canceled (terminal)");
    if (e.bid <= 0.0)
        throw Error(ErrorCode::BadEvent, "bid_changed: non-positive bid");

    Targeting* target = nullptr;
    for (auto& t : it->second.targetings)
        if (t.crowd == e.crowd) target = &t;
    if (target == nullptr)
        throw Error(ErrorCode::BadEvent, "campaign " + std::to_string(e.campaign) +
                                             " has no targeting for crowd " +
                                             std::to_string(e.crowd));

    ApplyResult res;
    res.ad = it->second.ad;
    if (target->bid != e.bid) {
        target->bid = e.bid;
        crowd_ads_[e.crowd][it->second.ad] = e.bid;
        res.bids_changed.push_back(e.crowd);
    }
    res.version = bump_version();
    return res;
}

TargetingIndex::ApplyResult TargetingIndex::apply_budget(const BudgetChanged& e) {
    auto it = campaigns_.find(e.campaign);
    if (it == campaigns_.end())
        throw Error(ErrorCode::BadEvent, "unknown campaign " + std::to_string(e.campaign));
    if (e.remaining < 0.0)
        throw Error(ErrorCode::BadEvent, "budget_changed: negative remaining budget");

    ApplyResult res;
    res.ad = it->second.ad;
    it->second.budget_remaining = e.remaining;
    res.version = bump_version();
    return res;
}

std::vector<std::pair<CrowdId, TargetingType>> TargetingIndex::crowds_of(UserId user) const {
    reads_.fetch_add(1, std::memory_order_relaxed);
    std::shared_lock lock(mu_);
    std::vector<std::pair<CrowdId, TargetingType>> out;
    auto it = user_crowds_.find(user);
    if (it == user_crowds_.end()) return out;
    out.reserve(it->second.size());
    for (const auto& [crowd, type] : it->second) out.emplace_back(crowd, type);
    return out;
}

std::vector<std::pair<AdId, Money>> TargetingIndex::ads_of(CrowdId crowd) const {
    reads_.fetch_add(1, std::memory_order_relaxed);
    std::shared_lock lock(mu_);
    std::vector<std::pair<AdId, Money>> out;
    auto it = crowd_ads_.find(crowd);
    if (it == crowd_ads_.end()) return out;
    out.reserve(it->second.size());
    for (const auto& [ad, bid] : it->second) out.emplace_back(ad, bid);
    return out;
}

std::vector<UserId> TargetingIndex::users_of(CrowdId crowd) const {
    reads_.fetch_add(1, std::memory_order_relaxed);
    std::shared_lock lock(mu_);
    auto it = crowd_users_.find(crowd);
    if (it == crowd_users_.end()) return {};
    return {it->second.begin(), it->second.end()};
}

std::vector<std::pair<AdCrowdPair, Money>> TargetingIndex::candidates(UserId user) const {
    reads_.fetch_add(1, std::memory_order_relaxed);
    std::shared_lock lock(mu_);
    std::vector<std::pair<AdCrowdPair, Money>> out;
    auto uc = user_crowds_.find(user);
    if (uc == user_crowds_.end()) return out;
    for (const auto& [crowd, type] : uc->second) {
        (void)type;
        auto ca = crowd_ads_.find(crowd);
        if (ca == crowd_ads_.end()) continue;
        for (const auto& [ad, bid] : ca->second)
            out.emplace_back(AdCrowdPair{ad, crowd}, bid);
    }
    return out;
}

bool TargetingIndex::campaign_snapshot(CampaignId id, Campaign& out) const {
    std::shared_lock lock(mu_);
    auto it = campaigns_.find(id);
    if (it == campaigns_.end()) return false;
    out = it->second;
    return true;
}

bool TargetingIndex::campaign_of_ad(AdId ad, Campaign& out) const {
    std::shared_lock lock(mu_);
    auto owner = ad_owner_.find(ad);
    if (owner == ad_owner_.end()) return false;
    auto it = campaigns_.find(owner->second);
    if (it == campaigns_.end()) return false;
    out = it->second;
    return true;
}

TargetingIndex::Stats TargetingIndex::stats() const {
    std::shared_lock lock(mu_);
    Stats s;
    s.version = version_.load(std::memory_order_acquire);
    s.users = user_crowds_.size();
    s.crowds_with_ads = crowd_ads_.size();
    s.campaigns = campaigns_.size();
    for (const auto& [user, crowds] : user_crowds_) s.membership_entries += crowds.size();
    for (const auto& [crowd, ads] : crowd_ads_) s.targeting_entries += ads.size();
    return s;
}

void TargetingIndex::serialize(SnapshotWriter& w) const {
    w.put_u64(version_.load(std::memory_order_acquire));

    w.put_u64(user_crowds_.size());
    for (const auto& [user, crowds] : user_crowds_) {
        w.put_u64(user);
        w.put_u64(crowds.size());
        for (const auto& [crowd, type] : crowds) {
            w.put_u64(crowd);
            w.put_u8(static_cast<std::uint8_t>(type));
        }
    }

    w.put_u64(crowd_ads_.size());
    for (const auto& [crowd, ads] : crowd_ads_) {
        w.put_u64(crowd);
        w.put_u64(ads.size());
        for (const auto& [ad, bid] : ads) {
            w.put_u64(ad);
            w.put_double(bid);
        }
    }

    w.put_u64(crowd_users_.size());
    for (const auto& [crowd, users] : crowd_users_) {
        w.put_u64(crowd);
        w.put_u64(users.size());
        for (UserId u : users) w.put_u64(u);
    }

    w.put_u64(campaigns_.size());
    for (const auto& [id, c] : campaigns_) {
        w.put_u64(id);
        w.put_u64(c.ad);
        w.put_u8(static_cast<std::uint8_t>(c.status));
        w.put_double(c.budget_remaining);
        w.put_u64(c.targetings.size());
        for (const auto& t : c.targetings) {
            w.put_u64(t.crowd);
            w.put_u8(static_cast<std::uint8_t>(t.type));
            w.put_double(t.bid);
        }
    }
}

void TargetingIndex::deserialize(SnapshotReader& r) {
    version_.store(r.get_u64(), std::memory_order_release);

    std::uint64_t n_users = r.get_u64();
    for (std::uint64_t i = 0; i < n_users; ++i) {
        UserId user = r.get_u64();
        std::uint64_t n = r.get_u64();
        auto& crowds = user_crowds_[user];
        for (std::uint64_t j = 0; j < n; ++j) {
            CrowdId crowd = r.get_u64();
            crowds[crowd] = static_cast<TargetingType>(r.get_u8());
        }
    }

    std::uint64_t n_crowds = r.get_u64();
    for (std::uint64_t i = 0; i < n_crowds; ++i) {
        CrowdId crowd = r.get_u64();
        std::uint64_t n = r.get_u64();
        auto& ads = crowd_ads_[crowd];
        for (std::uint64_t j = 0; j < n; ++j) {
            AdId ad = r.get_u64();
            ads[ad] = r.get_double();
        }
    }

    std::uint64_t n_cu = r.get_u64();
    for (std::uint64_t i = 0; i < n_cu; ++i) {
        CrowdId crowd = r.get_u64();
        std::uint64_t n = r.get_u64();
        auto& users = crowd_users_[crowd];
        for (std::uint64_t j = 0; j < n; ++j) users.insert(r.get_u64());
    }

    std::uint64_t n_camp = r.get_u64();
    for (std::uint64_t i = 0; i < n_camp; ++i) {
        Campaign c;
        c.id = r.get_u64();
        c.ad = r.get_u64();
        c.status = static_cast<CampaignStatus>(r.get_u8());
        c.budget_remaining = r.get_double();
        std::uint64_t n = r.get_u64();
        c.targetings.reserve(n);
        for (std::uint64_t j = 0; j < n; ++j) {
            Targeting t;
            t.crowd = r.get_u64();
            t.type = static_cast<TargetingType>(r.get_u8());
            t.bid = r.get_double();
            c.targetings.push_back(t);
        }
        ad_owner_[c.ad] = c.id;
        campaigns_[c.id] = std::move(c);
    }
    if (!r.at_end()) throw Error(ErrorCode::Corrupt, "index snapshot has excess payload");
}

void TargetingIndex::save(const std::string& path) const {
    std::shared_lock lock(mu_);
    SnapshotWriter w;
    serialize(w);
    w.save(path, kIndexMagic);
}

TargetingIndex TargetingIndex::load(const std::string& path) {
    SnapshotReader r(path, kIndexMagic);
    TargetingIndex idx;
    idx.deserialize(r);
    return idx;
}

std::uint64_t TargetingIndex::digest() const {
    std::shared_lock lock(mu_);
    SnapshotWriter w;
    serialize(w);
    return w.payload_digest();
}

bool operator==(const TargetingIndex& a, const TargetingIndex& b) {
    std::shared_lock la(a.mu_, std::defer_lock);
    std::shared_lock lb(b.mu_, std::defer_lock);
    if (&a != &b) {
        la.lock();
        lb.lock();
    }
    return a.version_.load() == b.version_.load() && a.user_crowds_ == b.user_crowds_ &&
           a.crowd_ads_ == b.crowd_ads_ && a.crowd_users_ == b.crowd_users_ &&
           a.campaigns_ == b.campaigns_ && a.ad_owner_ == b.ad_owner_;
}

}  // namespace tfms
