#pragma once

#include "events.hpp"
#include "index.hpp"
#include "matcher.hpp"
#include "scorer.hpp"
#include "types.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

namespace tfms {

// Per-user top-n ValuedPair lists, the materialization of the near-line
// half of the matcher. Readers copy a user's entry under a shared lock;
// writers replace entries whole, so a reader sees the old or the new list,
// never a mix.
class TopNCache {
public:
    struct Entry {
        std::vector<ValuedPair> pairs;  // sorted by (score desc, ad asc, crowd asc)
        TimePoint last_full_refresh = 0;
        TimePoint last_delta = 0;

        friend bool operator==(const Entry&, const Entry&) = default;
    };

    TopNCache() = default;
    explicit TopNCache(std::size_t top_n) : top_n_(top_n) {}

    TopNCache(TopNCache&& other) noexcept
        : entries_(std::move(other.entries_)), top_n_(other.top_n_) {}
    TopNCache& operator=(TopNCache&& other) noexcept {
        if (this != &other) {
            entries_ = std::move(other.entries_);
            top_n_ = other.top_n_;
        }
        return *this;
    }

    std::size_t top_n() const { return top_n_; }
    std::size_t user_count() const;

    bool lookup(UserId user, Entry& out) const;
    void put(UserId user, Entry entry);

    // Daily initialization: drop everything and install the new entries.
    void replace_all(std::map<UserId, Entry> entries, std::size_t top_n);

    std::vector<UserId> users() const;

    void save(const std::string& path) const;
    static TopNCache load(const std::string& path);
    std::uint64_t digest() const;

    friend bool operator==(const TopNCache& a, const TopNCache& b);

private:
    void serialize(class SnapshotWriter& w) const;

    mutable std::shared_mutex mu_;
    std::map<UserId, Entry> entries_;
    std::size_t top_n_ = 0;
};

// One delta-update aggregation window. Events touching the same user merge
// into a single work-list entry regardless of how many arrived.
class DeltaWindow {
public:
    struct UserDelta {
        // true: upsert/re-score at flush-time bid; false: remove
        std::map<AdCrowdPair, bool> pairs;
        std::set<CrowdId> joined;
        std::set<CrowdId> departed;
    };

    explicit DeltaWindow(Duration window_length = 5 * kMillisPerMinute)
        : length_(window_length) {}

    Duration length() const { return length_; }
    TimePoint start() const { return start_; }
    TimePoint end() const { return start_ + length_; }
    bool empty() const { return affected_.empty(); }
    std::size_t affected_users() const { return affected_.size(); }

    void advance_start(TimePoint start) { start_ = start; }

    const std::map<UserId, UserDelta>& affected() const { return affected_; }
    std::map<UserId, UserDelta>& affected() { return affected_; }

    void clear() { affected_.clear(); }

private:
    TimePoint start_ = 0;
    Duration length_;
    std::map<UserId, UserDelta> affected_;
};

struct FlushStats {
    std::uint64_t users_flushed = 0;
    std::uint64_t users_skipped_uncached = 0;
    std::uint64_t pairs_scored = 0;  // value_measure calls during flushes
    std::uint64_t pairs_removed = 0;
    std::uint64_t rescored_down = 0;

    void merge(const FlushStats& o) {
        users_flushed += o.users_flushed;
        users_skipped_uncached += o.users_skipped_uncached;
        pairs_scored += o.pairs_scored;
        pairs_removed += o.pairs_removed;
        rescored_down += o.rescored_down;
    }
};

// Daily pipeline: cache[u] := match_optimal(u) for every active user, at a
// quiescent index snapshot. Bit-identical result for any worker count.
std::map<UserId, TopNCache::Entry> fully_update(const TargetingIndex& index, const Scorer& scorer,
                                                const std::set<UserId>& active_users,
                                                std::size_t top_n, unsigned parallelism,
                                                TimePoint at, CostMeter& meter);

// Users with at least one visit in [at - lookback, at).
std::set<UserId> select_active_users(const std::vector<MutationEvent>& traffic, Duration lookback,
                                     TimePoint at);

// Folds an applied event into the window. User events map to their user;
// advertiser entry diffs fan out through the crowd-user service.
void ingest(const MutationEvent& event, const TargetingIndex::ApplyResult& applied,
            DeltaWindow& window, const TargetingIndex& index);

// Applies a window's merged deltas to the cache at flush-time bids. Users
// without a cache entry are skipped; lists may shrink below n (no backfill).
FlushStats flush(DeltaWindow& window, TopNCache& cache, const TargetingIndex& index,
                 const Scorer& scorer, std::size_t top_n, TimePoint now);

}  // namespace tfms
