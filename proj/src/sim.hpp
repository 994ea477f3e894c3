#pragma once

#include "engine.hpp"
#include "matcher.hpp"
#include "workload.hpp"

#include "json.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tfms {

enum class MatcherKind { Oracle, Truncated, Tfms };
const char* to_string(MatcherKind m);

// Plain-text key=value run configuration with [sections]; unknown keys are
// rejected so a typo cannot silently fall back to a default.
struct RunConfig {
    std::string events_path;
    std::string traffic_path;
    std::string out_dir;

    std::vector<MatcherKind> matchers{MatcherKind::Oracle, MatcherKind::Truncated,
                                      MatcherKind::Tfms};
    std::uint64_t seed = 42;

    TruncationConfig truncation{.m = 8, .k = 150, .n = 50};

    std::size_t tfms_top_n = 50;
    std::int64_t window_mins = 5;
    double lookback_days = 1.0;
    bool fallback = true;
    bool bootstrap = true;
    unsigned parallelism = 4;

    double cost_avg_visits = 0.0;  // 0: use the measured requests/active ratio

    bool has_matcher(MatcherKind m) const;

    static RunConfig from_text(const std::string& text);
    static RunConfig from_file(const std::string& path);
    void apply_overrides(const std::string& text);  // same syntax, "section.key=value" lines
    std::string to_text() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct MatcherMetrics {
    std::uint64_t visits = 0;
    std::uint64_t impressions = 0;   // nonempty served set
    std::uint64_t empty_serves = 0;
    double revenue_sum = 0.0;        // winner eCPM accumulated
    CostMeter meter;                 // online scoring work (tfms: fallback only)
    std::uint64_t pairs_examined = 0;  // tfms: cached entries validity-checked
    double recall_sum = 0.0;
    std::uint64_t recall_count = 0;
    std::uint64_t dropped_invalid = 0;
    std::array<std::uint64_t, kTargetingTypeCount> wins_by_type{};

    // stage truncation accounting (truncated matcher only)
    std::uint64_t crowds_total = 0;
    std::uint64_t crowds_kept = 0;
    std::uint64_t stage2_ads_total = 0;
    std::uint64_t stage2_ads_kept = 0;

    // tfms serving detail
    std::uint64_t cache_misses = 0;
    std::uint64_t fallback_requests = 0;
    std::uint64_t fetches = 0;
    std::uint64_t shortfall_sum = 0;
    std::int64_t staleness_sum = 0;
    std::vector<std::int64_t> staleness_samples;   // per cache hit
    std::vector<std::uint64_t> shortfall_samples;  // per cache hit
    std::uint64_t validity_violations = 0;
    std::uint64_t accounting_violations = 0;

    double rpm() const { return impressions == 0 ? 0.0 : revenue_sum / static_cast<double>(impressions); }
    double recall_at_n() const { return recall_count == 0 ? -1.0 : recall_sum / static_cast<double>(recall_count); }
};

struct CostModel {
    bool available = false;
    std::uint64_t requests = 0;
    std::uint64_t active_user_updates = 0;  // summed over refreshes
    double avg_visits_used = 0.0;
    double avg_visits_measured = 0.0;

    std::uint64_t base_pairs = 0;             // truncated online scoring
    std::uint64_t online_parallel_pairs = 0;  // oracle (truncation-free online)
    double tfms_full_pairs = 0.0;             // mean|O(u)| x active-user updates
    std::uint64_t tfms_full_measured = 0;     // fully-update meter
    std::uint64_t tfms_delta_measured = 0;    // flush scoring meter

    double rel_online_parallel = 0.0;  // base == 1
    double rel_tfms_full = 0.0;
    double rel_tfms_delta = 0.0;
};

struct SimReport {
    std::uint64_t workload_checksum = 0;
    std::uint64_t requests = 0;
    std::uint64_t visits_with_candidates = 0;
    std::uint32_t days = 0;
    std::uint64_t full_updates = 0;
    FlushStats flush_stats;
    RunConfig config;
    std::vector<std::pair<MatcherKind, MatcherMetrics>> matchers;
    CostModel cost;

    const MatcherMetrics* metrics(MatcherKind m) const;
};

SimReport run_simulation(const RunConfig& config, const std::vector<MutationEvent>& events,
                         const std::vector<MutationEvent>& traffic);

// Convenience: loads both logs from config paths and computes the checksum
// from the raw file bytes.
SimReport run_simulation(const RunConfig& config);

// cost_model over an already-run report; avg_visits = 0 uses the measured
// ratio. Exposed separately so the fully-update/online ratio law can be
// evaluated at a caller-chosen avg_visits.
CostModel cost_model(const SimReport& report, double avg_visits);

nlohmann::ordered_json report_to_json(const SimReport& report);
std::string report_to_csv(const SimReport& report);
void write_report_files(const SimReport& report, const std::string& out_dir);

// Relative deltas between two reports of the same workload; throws
// Error(Mismatch) when the workload checksums differ.
nlohmann::ordered_json compare_reports(const nlohmann::ordered_json& a,
                                       const nlohmann::ordered_json& b);

std::uint64_t file_checksum(const std::string& path);

}  // namespace tfms
