#include "nearline.hpp"

#include "snapshot.hpp"

#include <algorithm>
#include <mutex>
#include <thread>

namespace tfms {

namespace {
constexpr char kCacheMagic[8] = {'T', 'F', 'M', 'S', 'C', 'C', 'H', '1'};
}

std::size_t TopNCache::user_count() const {
    std::shared_lock lock(mu_);
    return entries_.size();
}

bool TopNCache::lookup(UserId user, Entry& out) const {
    std::shared_lock lock(mu_);
    auto it = entries_.find(user);
    if (it == entries_.end()) return false;
    out = it->second;
    return true;
}

void TopNCache::put(UserId user, Entry entry) {
    std::unique_lock lock(mu_);
    entries_[user] = std::move(entry);
}

void TopNCache::replace_all(std::map<UserId, Entry> entries, std::size_t top_n) {
    std::unique_lock lock(mu_);
    entries_ = std::move(entries);
    top_n_ = top_n;
}

std::vector<UserId> TopNCache::users() const {
    std::shared_lock lock(mu_);
    std::vector<UserId> out;
    out.reserve(entries_.size());
    for (const auto& [user, entry] : entries_) out.push_back(user);
    return out;
}

void TopNCache::serialize(SnapshotWriter& w) const {
    w.put_u64(top_n_);
    w.put_u64(entries_.size());
    for (const auto& [user, entry] : entries_) {
        w.put_u64(user);
        w.put_i64(entry.last_full_refresh);
        w.put_i64(entry.last_delta);
        w.put_u64(entry.pairs.size());
        for (const auto& vp : entry.pairs) {
            w.put_u64(vp.pair.ad);
            w.put_u64(vp.pair.crowd);
            w.put_double(vp.score);
            w.put_i64(vp.scored_at);
        }
    }
}

void TopNCache::save(const std::string& path) const {
    std::shared_lock lock(mu_);
    SnapshotWriter w;
    serialize(w);
    w.save(path, kCacheMagic);
}

TopNCache TopNCache::load(const std::string& path) {
    SnapshotReader r(path, kCacheMagic);
    TopNCache cache;
    cache.top_n_ = r.get_u64();
    std::uint64_t n_entries = r.get_u64();
    for (std::uint64_t i = 0; i < n_entries; ++i) {
        UserId user = r.get_u64();
        Entry e;
        e.last_full_refresh = r.get_i64();
        e.last_delta = r.get_i64();
        std::uint64_t n_pairs = r.get_u64();
        e.pairs.reserve(n_pairs);
        for (std::uint64_t j = 0; j < n_pairs; ++j) {
            ValuedPair vp;
            vp.pair.ad = r.get_u64();
            vp.pair.crowd = r.get_u64();
            vp.score = r.get_double();
            vp.scored_at = r.get_i64();
            e.pairs.push_back(vp);
        }
        cache.entries_[user] = std::move(e);
    }
    if (!r.at_end()) throw Error(ErrorCode::Corrupt, "cache snapshot has excess payload");
    return cache;
}

std::uint64_t TopNCache::digest() const {
    std::shared_lock lock(mu_);
    SnapshotWriter w;
    serialize(w);
    return w.payload_digest();
}

bool operator==(const TopNCache& a, const TopNCache& b) {
    std::shared_lock la(a.mu_, std::defer_lock);
    std::shared_lock lb(b.mu_, std::defer_lock);
    if (&a != &b) {
        la.lock();
        lb.lock();
    }
    return a.top_n_ == b.top_n_ && a.entries_ == b.entries_;
}

std::map<UserId, TopNCache::Entry> fully_update(const TargetingIndex& index, const Scorer& scorer,
                                                const std::set<UserId>& active_users,
                                                std::size_t top_n, unsigned parallelism,
                                                TimePoint at, CostMeter& meter) {
    std::vector<UserId> users(active_users.begin(), active_users.end());
    std::vector<TopNCache::Entry> results(users.size());

    if (parallelism == 0) parallelism = 1;
    unsigned workers = static_cast<unsigned>(
        std::min<std::size_t>(parallelism, std::max<std::size_t>(users.size(), 1)));

    std::vector<CostMeter> meters(workers);
    auto work = [&](unsigned w) {
        for (std::size_t i = w; i < users.size(); i += workers) {
            results[i].pairs = match_optimal(users[i], index, scorer, top_n, meters[w], at);
            results[i].last_full_refresh = at;
            results[i].last_delta = at;
        }
    };

    if (workers <= 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work, w);
        for (auto& t : threads) t.join();
    }
    for (const auto& m : meters) meter.merge(m);

    std::map<UserId, TopNCache::Entry> out;
    for (std::size_t i = 0; i < users.size(); ++i) out.emplace(users[i], std::move(results[i]));
    return out;
}

std::set<UserId> select_active_users(const std::vector<MutationEvent>& traffic, Duration lookback,
                                     TimePoint at) {
    std::set<UserId> active;
    if (lookback <= 0) return active;
    const TimePoint from = at - lookback;
    for (const auto& rec : traffic) {
        if (rec.at >= at) break;  // traffic is time-ordered
        if (rec.at < from) continue;
        if (const auto* visit = std::get_if<Visit>(&rec.body)) active.insert(visit->user);
    }
    return active;
}

void ingest(const MutationEvent& event, const TargetingIndex::ApplyResult& applied,
            DeltaWindow& window, const TargetingIndex& index) {
    if (event.is_visit()) return;

    if (std::holds_alternative<UserCrowdsChanged>(event.body)) {
        if (applied.member_added.empty() && applied.member_removed.empty()) return;
        auto& delta = window.affected()[applied.user];
        for (const auto& [crowd, type] : applied.member_added) {
            (void)type;
            delta.departed.erase(crowd);
            delta.joined.insert(crowd);
        }
        for (CrowdId crowd : applied.member_removed) {
            delta.joined.erase(crowd);
            delta.departed.insert(crowd);
        }
        return;
    }

    // advertiser events: fan out entry diffs via the crowd-user service
    auto fan_out = [&](CrowdId crowd, bool upsert) {
        for (UserId user : index.users_of(crowd))
            window.affected()[user].pairs[AdCrowdPair{applied.ad, crowd}] = upsert;
    };
    for (CrowdId crowd : applied.entries_added) fan_out(crowd, true);
    for (CrowdId crowd : applied.bids_changed) fan_out(crowd, true);
    for (CrowdId crowd : applied.entries_removed) fan_out(crowd, false);
}

FlushStats flush(DeltaWindow& window, TopNCache& cache, const TargetingIndex& index,
                 const Scorer& scorer, std::size_t top_n, TimePoint now) {
    FlushStats stats;
    for (auto& [user, delta] : window.affected()) {
        TopNCache::Entry entry;
        if (!cache.lookup(user, entry)) {
            // only fully-updated (active) users carry delta repairs
            ++stats.users_skipped_uncached;
            continue;
        }

        std::map<AdCrowdPair, ValuedPair> current;
        for (const auto& vp : entry.pairs) current.emplace(vp.pair, vp);
        const std::size_t before = current.size();

        auto memberships = index.crowds_of(user);
        std::set<CrowdId> member_of;
        for (const auto& [crowd, type] : memberships) {
            (void)type;
            member_of.insert(crowd);
        }

        // departed crowds lose every cached pair; re-joined crowds are
        // rebuilt from scratch below, so purge those too
        auto purge_crowd = [&](CrowdId crowd) {
            std::erase_if(current, [&](const auto& kv) { return kv.first.crowd == crowd; });
        };
        for (CrowdId crowd : delta.departed) purge_crowd(crowd);
        for (CrowdId crowd : delta.joined) purge_crowd(crowd);

        // per-crowd ad lists fetched once per flush
        std::map<CrowdId, std::vector<std::pair<AdId, Money>>> ads_by_crowd;
        auto ads_of = [&](CrowdId crowd) -> const std::vector<std::pair<AdId, Money>>& {
            auto it = ads_by_crowd.find(crowd);
            if (it == ads_by_crowd.end()) it = ads_by_crowd.emplace(crowd, index.ads_of(crowd)).first;
            return it->second;
        };
        auto current_bid = [&](const AdCrowdPair& pair, Money& bid_out) {
            const auto& ads = ads_of(pair.crowd);
            auto it = std::lower_bound(ads.begin(), ads.end(), pair.ad,
                                       [](const auto& e, AdId ad) { return e.first < ad; });
            if (it == ads.end() || it->first != pair.ad) return false;
            bid_out = it->second;
            return true;
        };

        for (const auto& [pair, upsert] : delta.pairs) {
            if (!upsert) {
                current.erase(pair);
                continue;
            }
            if (delta.departed.count(pair.crowd) || !member_of.count(pair.crowd)) continue;
            Money bid = 0.0;
            if (!current_bid(pair, bid)) {
                // targeting vanished between event and flush
                current.erase(pair);
                continue;
            }
            double score = scorer.value_measure(user, pair, bid);
            ++stats.pairs_scored;
            auto it = current.find(pair);
            if (it != current.end() && score < it->second.score) ++stats.rescored_down;
            current[pair] = ValuedPair{pair, score, now};
        }

        for (CrowdId crowd : delta.joined) {
            if (!member_of.count(crowd)) continue;  // joined then left before the flush
            for (const auto& [ad, bid] : ads_of(crowd)) {
                AdCrowdPair pair{ad, crowd};
                double score = scorer.value_measure(user, pair, bid);
                ++stats.pairs_scored;
                current[pair] = ValuedPair{pair, score, now};
            }
        }

        std::vector<ValuedPair> merged;
        merged.reserve(current.size());
        for (const auto& [pair, vp] : current) merged.push_back(vp);
        take_top_n(merged, top_n);

        if (before > current.size()) stats.pairs_removed += before - current.size();
        entry.pairs = std::move(merged);
        entry.last_delta = now;
        cache.put(user, std::move(entry));
        ++stats.users_flushed;
    }
    window.clear();
    return stats;
}

}  // namespace tfms
