#pragma once

#include "events.hpp"
#include "index.hpp"
#include "nearline.hpp"
#include "scorer.hpp"
#include "serving.hpp"

#include <cstdint>
#include <set>

namespace tfms {

// Ties the near-line pipelines and the online fetch to one index. The
// caller (harness, C API, embedding host) drives the simulated clock by
// feeding time-ordered events and calling advance_to before reads.
class Engine {
public:
    struct Config {
        std::size_t top_n = 50;
        Duration window_length = 5 * kMillisPerMinute;  // 0: flush after every event
        unsigned parallelism = 4;
    };

    Engine(std::uint64_t seed, Config config)
        : scorer_(seed), config_(config), cache_(config.top_n), window_(config.window_length) {}

    const Scorer& scorer() const { return scorer_; }
    TargetingIndex& index() { return index_; }
    const TargetingIndex& index() const { return index_; }
    TopNCache& cache() { return cache_; }
    const TopNCache& cache() const { return cache_; }
    const Config& config() const { return config_; }
    const FlushStats& flush_stats() const { return flush_stats_; }
    const CostMeter& full_update_meter() const { return full_update_meter_; }
    std::uint64_t full_updates_run() const { return full_updates_run_; }

    // Flushes every delta window that has elapsed by `now`.
    void advance_to(TimePoint now) {
        if (config_.window_length <= 0) return;  // per-event mode flushes in apply_event
        while (window_.end() <= now) {
            TimePoint boundary = window_.end();
            if (!window_.empty())
                flush_stats_.merge(flush(window_, cache_, index_, scorer_, config_.top_n, boundary));
            window_.advance_start(boundary);
            // fast-forward across a long idle gap
            if (window_.empty() && window_.end() <= now) {
                TimePoint periods = (now - window_.start()) / config_.window_length;
                if (periods > 1)
                    window_.advance_start(window_.start() + (periods - 1) * config_.window_length);
            }
        }
    }

    // Applies one mutation to the index and folds it into the delta window.
    TargetingIndex::ApplyResult apply_event(const MutationEvent& event) {
        advance_to(event.at);
        auto applied = index_.apply(event);
        ingest(event, applied, window_, index_);
        if (config_.window_length <= 0 && !window_.empty())
            flush_stats_.merge(flush(window_, cache_, index_, scorer_, config_.top_n, event.at));
        return applied;
    }

    // Daily full initialization over the active-user set. Pending deltas are
    // flushed first; whatever remains of the open window is subsumed.
    void full_refresh(const std::set<UserId>& active_users, TimePoint at) {
        advance_to(at);
        window_.clear();
        window_.advance_start(at);
        cache_.replace_all(
            fully_update(index_, scorer_, active_users, config_.top_n, config_.parallelism, at,
                         full_update_meter_),
            config_.top_n);
        ++full_updates_run_;
    }

    FetchResult fetch_for(UserId user, TimePoint at) const {
        return fetch(user, cache_, index_, at);
    }

private:
    Scorer scorer_;
    Config config_;
    TargetingIndex index_;
    TopNCache cache_;
    DeltaWindow window_;
    FlushStats flush_stats_;
    CostMeter full_update_meter_;
    std::uint64_t full_updates_run_ = 0;
};

}  // namespace tfms
