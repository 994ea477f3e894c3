#include "sim.hpp"

#include "serving.hpp"
#include "snapshot.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace tfms {

namespace {

using json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "on" || v == "1") return true;
    if (v == "false" || v == "off" || v == "0") return false;
    throw Error(ErrorCode::BadSpec, "run config: " + key + " expects a boolean, got '" + v + "'");
}

std::uint64_t parse_u64(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        std::uint64_t out = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw Error(ErrorCode::BadSpec, "run config: " + key + " expects an integer, got '" + v + "'");
    }
}

double parse_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw Error(ErrorCode::BadSpec, "run config: " + key + " expects a number, got '" + v + "'");
    }
}

std::size_t parse_bound(const std::string& v, const std::string& key) {
    if (v == "unbounded") return TruncationConfig::kUnbounded;
    std::uint64_t out = parse_u64(v, key);
    if (out == 0) throw Error(ErrorCode::BadSpec, "run config: " + key + " must be >= 1 or 'unbounded'");
    return static_cast<std::size_t>(out);
}

MatcherKind matcher_from_string(const std::string& s) {
    if (s == "oracle") return MatcherKind::Oracle;
    if (s == "truncated") return MatcherKind::Truncated;
    if (s == "tfms") return MatcherKind::Tfms;
    throw Error(ErrorCode::BadSpec, "run config: unknown matcher '" + s + "'");
}

}  // namespace

const char* to_string(MatcherKind m) {
    switch (m) {
        case MatcherKind::Oracle: return "oracle";
        case MatcherKind::Truncated: return "truncated";
        case MatcherKind::Tfms: return "tfms";
    }
    return "?";
}

bool RunConfig::has_matcher(MatcherKind m) const {
    return std::find(matchers.begin(), matchers.end(), m) != matchers.end();
}

void RunConfig::apply_overrides(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::string section;
    while (std::getline(in, line)) {
        std::size_t comment = line.find('#');
        if (comment != std::string::npos) line.resize(comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw Error(ErrorCode::BadSpec, "run config: malformed section '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::BadSpec, "run config: expected key=value, got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        // dotted keys work with or without a preceding [section]
        std::size_t dot = key.find('.');
        std::string full = dot != std::string::npos ? key : (section.empty() ? key : section + "." + key);

        if (full == "paths.events") events_path = value;
        else if (full == "paths.traffic") traffic_path = value;
        else if (full == "paths.out_dir") out_dir = value;
        else if (full == "run.matchers") {
            matchers.clear();
            std::istringstream ms(value);
            std::string item;
            while (std::getline(ms, item, ',')) {
                item = trim(item);
                if (!item.empty()) matchers.push_back(matcher_from_string(item));
            }
            if (matchers.empty())
                throw Error(ErrorCode::BadSpec, "run config: run.matchers is empty");
        } else if (full == "run.seed") seed = parse_u64(value, full);
        else if (full == "truncation.m") truncation.m = parse_bound(value, full);
        else if (full == "truncation.k") truncation.k = parse_bound(value, full);
        else if (full == "truncation.n") {
            truncation.n = static_cast<std::size_t>(parse_u64(value, full));
            if (truncation.n == 0) throw Error(ErrorCode::BadSpec, "run config: truncation.n must be >= 1");
        } else if (full == "tfms.topn") {
            tfms_top_n = static_cast<std::size_t>(parse_u64(value, full));
            if (tfms_top_n == 0) throw Error(ErrorCode::BadSpec, "run config: tfms.topn must be >= 1");
        } else if (full == "tfms.window_mins") window_mins = static_cast<std::int64_t>(parse_u64(value, full));
        else if (full == "tfms.lookback_days") lookback_days = parse_double(value, full);
        else if (full == "tfms.fallback") fallback = parse_bool(value, full);
        else if (full == "tfms.bootstrap") bootstrap = parse_bool(value, full);
        else if (full == "tfms.parallelism") parallelism = static_cast<unsigned>(parse_u64(value, full));
        else if (full == "cost.avg_visits") cost_avg_visits = parse_double(value, full);
        else throw Error(ErrorCode::BadSpec, "run config: unknown key '" + full + "'");
    }
}

RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig config;
    config.apply_overrides(text);
    if (config.events_path.empty() || config.traffic_path.empty())
        throw Error(ErrorCode::BadSpec, "run config: paths.events and paths.traffic are required");
    return config;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open run config: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_text(text);
}

std::string RunConfig::to_text() const {
    std::ostringstream out;
    out << "[paths]\n";
    out << "events = " << events_path << "\n";
    out << "traffic = " << traffic_path << "\n";
    out << "out_dir = " << out_dir << "\n";
    out << "\n[run]\n";
    out << "matchers = ";
    for (std::size_t i = 0; i < matchers.size(); ++i)
        out << (i ? "," : "") << to_string(matchers[i]);
    out << "\n";
    out << "seed = " << seed << "\n";
    auto bound = [](std::size_t v) {
        return v == TruncationConfig::kUnbounded ? std::string("unbounded") : std::to_string(v);
    };
    out << "\n[truncation]\n";
    out << "m = " << bound(truncation.m) << "\n";
    out << "k = " << bound(truncation.k) << "\n";
    out << "n = " << truncation.n << "\n";
    out << "\n[tfms]\n";
    out << "topn = " << tfms_top_n << "\n";
    out << "window_mins = " << window_mins << "\n";
    out << "lookback_days = " << lookback_days << "\n";
    out << "fallback = " << (fallback ? "true" : "false") << "\n";
    out << "bootstrap = " << (bootstrap ? "true" : "false") << "\n";
    out << "parallelism = " << parallelism << "\n";
    out << "\n[cost]\n";
    out << "avg_visits = " << cost_avg_visits << "\n";
    return out.str();
}

const MatcherMetrics* SimReport::metrics(MatcherKind m) const {
    for (const auto& [kind, metrics] : matchers)
        if (kind == m) return &metrics;
    return nullptr;
}

std::uint64_t file_checksum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open: " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    return h;
}

namespace {

struct ServeOutcome {
    std::vector<ValuedPair> served;
    std::uint64_t dropped = 0;
};

ServeOutcome serve_filter(const std::vector<ValuedPair>& list, const TargetingIndex& index,
                          TimePoint at) {
    ServeOutcome out;
    out.served.reserve(list.size());
    Campaign campaign;
    for (const auto& vp : list) {
        if (index.campaign_of_ad(vp.pair.ad, campaign) && is_valid(campaign, vp.pair, at))
            out.served.push_back(vp);
        else
            ++out.dropped;
    }
    return out;
}

double recall_against(const std::vector<ValuedPair>& candidate,
                      const std::vector<ValuedPair>& oracle) {
    if (oracle.empty()) return 1.0;
    std::set<AdCrowdPair> oracle_pairs;
    for (const auto& vp : oracle) oracle_pairs.insert(vp.pair);
    std::size_t hit = 0;
    for (const auto& vp : candidate) hit += oracle_pairs.count(vp.pair);
    return static_cast<double>(hit) / static_cast<double>(oracle_pairs.size());
}

// winner = argmax of the served set (single ad slot); lists are sorted, so
// the head is the winner and the recheck below is the criterion-7 audit.
void record_served(MatcherMetrics& m, const std::vector<ValuedPair>& served,
                   const TargetingIndex& index, TimePoint now) {
    if (served.empty()) {
        ++m.empty_serves;
        return;
    }
    const ValuedPair& winner = served.front();
    ++m.impressions;
    m.revenue_sum += winner.score;
    Campaign campaign;
    if (index.campaign_of_ad(winner.pair.ad, campaign)) {
        if (const Targeting* t = campaign.find_targeting(winner.pair.crowd))
            ++m.wins_by_type[static_cast<std::size_t>(t->type)];
    }
    for (const auto& vp : served)
        if (!index.campaign_of_ad(vp.pair.ad, campaign) || !is_valid(campaign, vp.pair, now))
            ++m.validity_violations;
}

}  // namespace

CostModel cost_model(const SimReport& report, double avg_visits) {
    CostModel cm;
    cm.active_user_updates = report.cost.active_user_updates;
    cm.tfms_full_measured = report.cost.tfms_full_measured;
    cm.tfms_delta_measured = report.flush_stats.pairs_scored;
    cm.requests = report.requests;

    const auto* oracle = report.metrics(MatcherKind::Oracle);
    const auto* truncated = report.metrics(MatcherKind::Truncated);
    if (!oracle || !truncated || report.requests == 0) return cm;

    cm.available = true;
    cm.base_pairs = truncated->meter.user_ad_pairs_scored;
    cm.online_parallel_pairs = oracle->meter.user_ad_pairs_scored;

    cm.avg_visits_measured =
        cm.active_user_updates == 0
            ? 0.0
            : static_cast<double>(cm.requests) / static_cast<double>(cm.active_user_updates);
    cm.avg_visits_used = avg_visits > 0.0 ? avg_visits : cm.avg_visits_measured;

    const double mean_candidates =
        static_cast<double>(cm.online_parallel_pairs) / static_cast<double>(cm.requests);
    cm.tfms_full_pairs = mean_candidates * static_cast<double>(cm.active_user_updates);

    if (cm.base_pairs > 0) {
        const double base = static_cast<double>(cm.base_pairs);
        cm.rel_online_parallel = static_cast<double>(cm.online_parallel_pairs) / base;
        cm.rel_tfms_full = cm.tfms_full_pairs / base;
        cm.rel_tfms_delta = static_cast<double>(cm.tfms_delta_measured) / base;
    }
    return cm;
}

SimReport run_simulation(const RunConfig& config, const std::vector<MutationEvent>& events,
                         const std::vector<MutationEvent>& traffic) {
    SimReport report;
    report.config = config;

    const bool oracle_on = config.has_matcher(MatcherKind::Oracle);
    const bool truncated_on = config.has_matcher(MatcherKind::Truncated);
    const bool tfms_on = config.has_matcher(MatcherKind::Tfms);

    MatcherMetrics oracle_m, truncated_m, tfms_m;

    Engine engine(config.seed,
                  Engine::Config{config.tfms_top_n, config.window_mins * kMillisPerMinute,
                                 config.parallelism});
    TargetingIndex& index = engine.index();
    const Scorer& scorer = engine.scorer();

    const Duration lookback =
        static_cast<Duration>(config.lookback_days * static_cast<double>(kMillisPerDay));

    TimePoint horizon_end = 0;
    for (const auto& e : events) horizon_end = std::max(horizon_end, e.at);
    for (const auto& v : traffic) horizon_end = std::max(horizon_end, v.at);
    report.days = static_cast<std::uint32_t>(horizon_end / kMillisPerDay + 1);

    // a day-boundary refresh fires before the first record strictly past it
    TimePoint next_refresh = 0;
    auto maybe_refresh = [&](TimePoint record_at) {
        if (!tfms_on) return;
        while (next_refresh < record_at) {
            std::set<UserId> active =
                (next_refresh == 0)
                    ? (config.bootstrap ? select_active_users(traffic, lookback, lookback)
                                        : std::set<UserId>{})
                    : select_active_users(traffic, lookback, next_refresh);
            engine.full_refresh(active, next_refresh);
            report.cost.active_user_updates += active.size();
            next_refresh += kMillisPerDay;
        }
    };

    // merge the two seq-ordered streams
    std::size_t ei = 0, ti = 0;
    auto next_is_event = [&]() {
        if (ei >= events.size()) return false;
        if (ti >= traffic.size()) return true;
        return events[ei].seq < traffic[ti].seq;
    };

    while (ei < events.size() || ti < traffic.size()) {
        if (next_is_event()) {
            const MutationEvent& ev = events[ei++];
            maybe_refresh(ev.at);
            if (tfms_on)
                engine.apply_event(ev);
            else
                index.apply(ev);
            continue;
        }

        const MutationEvent& rec = traffic[ti++];
        maybe_refresh(rec.at);
        const auto* visit = std::get_if<Visit>(&rec.body);
        if (!visit) throw Error(ErrorCode::BadEvent, "traffic log contains a non-visit record");
        const UserId user = visit->user;
        const TimePoint now = rec.at;
        ++report.requests;
        if (tfms_on) engine.advance_to(now);

        std::vector<ValuedPair> oracle_list;
        if (oracle_on) {
            ++oracle_m.visits;
            oracle_list = match_optimal(user, index, scorer, config.truncation.n, oracle_m.meter, now);
            if (!oracle_list.empty()) ++report.visits_with_candidates;
            oracle_m.recall_sum += 1.0;
            ++oracle_m.recall_count;
            auto outcome = serve_filter(oracle_list, index, now);
            oracle_m.dropped_invalid += outcome.dropped;
            record_served(oracle_m, outcome.served, index, now);
        }

        std::vector<ValuedPair> truncated_list;
        CostMeter visit_truncated_meter;
        bool truncated_ran = false;
        auto run_truncated = [&](TruncationBreakdown* breakdown) {
            if (!truncated_ran) {
                truncated_list = match_truncated(user, index, scorer, config.truncation,
                                                 visit_truncated_meter, now, breakdown);
                truncated_ran = true;
            }
        };

        if (truncated_on) {
            ++truncated_m.visits;
            TruncationBreakdown breakdown;
            run_truncated(&breakdown);
            truncated_m.meter.merge(visit_truncated_meter);
            truncated_m.crowds_total += breakdown.crowds_total;
            truncated_m.crowds_kept += breakdown.crowds_kept;
            truncated_m.stage2_ads_total += breakdown.ads_total;
            truncated_m.stage2_ads_kept += breakdown.ads_kept;
            if (oracle_on) {
                truncated_m.recall_sum += recall_against(truncated_list, oracle_list);
                ++truncated_m.recall_count;
            }
            auto outcome = serve_filter(truncated_list, index, now);
            truncated_m.dropped_invalid += outcome.dropped;
            record_served(truncated_m, outcome.served, index, now);
        }

        if (tfms_on) {
            ++tfms_m.visits;
            ++tfms_m.fetches;
            FetchResult fr = engine.fetch_for(user, now);
            if (fr.served.size() + fr.dropped_invalid != fr.cached_length)
                ++tfms_m.accounting_violations;
            tfms_m.pairs_examined += fr.cached_length;
            tfms_m.dropped_invalid += fr.dropped_invalid;

            std::vector<ValuedPair> served = std::move(fr.served);
            std::vector<ValuedPair> matched;  // the near-line matching result, pre-validity
            if (fr.cache_miss) {
                ++tfms_m.cache_misses;
                if (config.fallback) {
                    ++tfms_m.fallback_requests;
                    run_truncated(nullptr);
                    // the fallback costs the tfms lane a full truncated match
                    tfms_m.meter.merge(visit_truncated_meter);
                    matched = truncated_list;
                    served = serve_filter(truncated_list, index, now).served;
                }
            } else {
                TopNCache::Entry entry;
                if (engine.cache().lookup(user, entry)) matched = std::move(entry.pairs);
                tfms_m.staleness_sum += fr.staleness;
                tfms_m.staleness_samples.push_back(fr.staleness);
                const std::uint64_t shortfall =
                    fr.cached_length < engine.cache().top_n()
                        ? engine.cache().top_n() - fr.cached_length
                        : 0;
                tfms_m.shortfall_sum += shortfall;
                tfms_m.shortfall_samples.push_back(shortfall);
            }
            if (oracle_on) {
                tfms_m.recall_sum += recall_against(matched, oracle_list);
                ++tfms_m.recall_count;
            }
            record_served(tfms_m, served, index, now);
        }
    }

    report.full_updates = engine.full_updates_run();
    report.flush_stats = engine.flush_stats();
    report.cost.tfms_full_measured = engine.full_update_meter().user_ad_pairs_scored;

    if (oracle_on) report.matchers.emplace_back(MatcherKind::Oracle, oracle_m);
    if (truncated_on) report.matchers.emplace_back(MatcherKind::Truncated, truncated_m);
    if (tfms_on) report.matchers.emplace_back(MatcherKind::Tfms, tfms_m);

    report.cost = cost_model(report, config.cost_avg_visits);
    return report;
}

SimReport run_simulation(const RunConfig& config) {
    auto events = read_event_log(config.events_path);
    auto traffic = read_event_log(config.traffic_path);
    std::uint64_t checksum = file_checksum(config.events_path);
    checksum = mix64(checksum, file_checksum(config.traffic_path));
    SimReport report = run_simulation(config, events, traffic);
    report.workload_checksum = checksum;
    return report;
}

namespace {

json metrics_to_json(MatcherKind kind, const MatcherMetrics& m, const SimReport& report) {
    json j;
    j["visits"] = m.visits;
    j["impressions"] = m.impressions;
    j["empty_serves"] = m.empty_serves;
    j["rpm"] = m.rpm();
    j["pairs_scored"] = m.meter.user_ad_pairs_scored;
    j["crowds_examined"] = m.meter.user_crowd_pairs_examined;
    j["mean_pairs_scored_per_request"] =
        m.visits == 0 ? 0.0
                      : static_cast<double>(m.meter.user_ad_pairs_scored) /
                            static_cast<double>(m.visits);
    double request_work = static_cast<double>(m.meter.user_ad_pairs_scored);
    if (kind == MatcherKind::Tfms) request_work += static_cast<double>(m.pairs_examined);
    j["mean_request_work"] = m.visits == 0 ? 0.0 : request_work / static_cast<double>(m.visits);
    if (m.recall_count > 0)
        j["recall_at_n"] = m.recall_at_n();
    else
        j["recall_at_n"] = nullptr;
    j["dropped_invalid"] = m.dropped_invalid;
    j["validity_violations"] = m.validity_violations;
    json wins;
    for (int t = 0; t < kTargetingTypeCount; ++t)
        wins[to_string(static_cast<TargetingType>(t))] = m.wins_by_type[static_cast<std::size_t>(t)];
    j["winning_impressions"] = std::move(wins);

    if (kind == MatcherKind::Truncated) {
        j["truncated_user_crowd_pct"] =
            m.crowds_total == 0
                ? 0.0
                : 100.0 * static_cast<double>(m.crowds_total - m.crowds_kept) /
                      static_cast<double>(m.crowds_total);
        j["truncated_crowd_ad_pct"] =
            m.stage2_ads_total == 0
                ? 0.0
                : 100.0 * static_cast<double>(m.stage2_ads_total - m.stage2_ads_kept) /
                      static_cast<double>(m.stage2_ads_total);
    }
    if (kind == MatcherKind::Tfms) {
        j["pairs_examined"] = m.pairs_examined;
        j["cache_misses"] = m.cache_misses;
        j["fallback_requests"] = m.fallback_requests;
        j["accounting_violations"] = m.accounting_violations;
        const std::uint64_t hits = m.fetches - m.cache_misses;
        j["mean_staleness_ms"] =
            hits == 0 ? 0.0 : static_cast<double>(m.staleness_sum) / static_cast<double>(hits);
        j["mean_shortfall"] =
            hits == 0 ? 0.0 : static_cast<double>(m.shortfall_sum) / static_cast<double>(hits);
        auto percentile = [](auto samples, double q) -> double {
            if (samples.empty()) return 0.0;
            std::sort(samples.begin(), samples.end());
            std::size_t idx = static_cast<std::size_t>(q * static_cast<double>(samples.size() - 1));
            return static_cast<double>(samples[idx]);
        };
        j["staleness_ms"] = {{"p50", percentile(m.staleness_samples, 0.50)},
                             {"p95", percentile(m.staleness_samples, 0.95)},
                             {"max", percentile(m.staleness_samples, 1.0)}};
        j["shortfall"] = {{"p50", percentile(m.shortfall_samples, 0.50)},
                          {"p95", percentile(m.shortfall_samples, 0.95)},
                          {"max", percentile(m.shortfall_samples, 1.0)}};
        j["active_coverage"] =
            m.fetches == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(m.fetches);
        j["full_updates"] = report.full_updates;
        j["delta_users_flushed"] = report.flush_stats.users_flushed;
        j["delta_pairs_scored"] = report.flush_stats.pairs_scored;
        j["delta_pairs_removed"] = report.flush_stats.pairs_removed;
        j["delta_rescored_down"] = report.flush_stats.rescored_down;
    }
    return j;
}

char hex_digit(std::uint64_t v) {
    return static_cast<char>(v < 10 ? '0' + v : 'a' + (v - 10));
}

std::string hex64(std::uint64_t v) {
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = hex_digit(v & 0xf);
        v >>= 4;
    }
    return s;
}

}  // namespace

json report_to_json(const SimReport& report) {
    json j;
    j["workload"] = {{"events", report.config.events_path},
                     {"traffic", report.config.traffic_path},
                     {"checksum", hex64(report.workload_checksum)},
                     {"requests", report.requests},
                     {"visits_with_candidates", report.visits_with_candidates},
                     {"days", report.days}};
    j["config"] = report.config.to_text();
    json matchers;
    for (const auto& [kind, metrics] : report.matchers)
        matchers[to_string(kind)] = metrics_to_json(kind, metrics, report);
    j["matchers"] = std::move(matchers);

    json cost;
    cost["available"] = report.cost.available;
    if (report.cost.available) {
        cost["requests"] = report.cost.requests;
        cost["active_user_updates"] = report.cost.active_user_updates;
        cost["avg_visits_measured"] = report.cost.avg_visits_measured;
        cost["avg_visits_used"] = report.cost.avg_visits_used;
        cost["base_pairs"] = report.cost.base_pairs;
        cost["online_parallel_pairs"] = report.cost.online_parallel_pairs;
        cost["tfms_full_pairs"] = report.cost.tfms_full_pairs;
        cost["tfms_full_measured"] = report.cost.tfms_full_measured;
        cost["tfms_delta_measured"] = report.cost.tfms_delta_measured;
        cost["relative_scale"] = {{"base", 1.0},
                                  {"online_parallelization", report.cost.rel_online_parallel},
                                  {"tfms_fully_update", report.cost.rel_tfms_full},
                                  {"tfms_delta_update", report.cost.rel_tfms_delta}};
    }
    j["cost_model"] = std::move(cost);
    return j;
}

std::string report_to_csv(const SimReport& report) {
    std::ostringstream out;
    out << "matcher,metric,value\n";
    json j = report_to_json(report);
    for (const auto& [name, metrics] : j["matchers"].items()) {
        for (const auto& [key, value] : metrics.items()) {
            if (value.is_object()) {
                for (const auto& [sub, v] : value.items())
                    out << name << "," << key << "." << sub << "," << v.dump() << "\n";
            } else {
                out << name << "," << key << "," << (value.is_null() ? "" : value.dump()) << "\n";
            }
        }
    }
    if (j["cost_model"]["available"].get<bool>()) {
        for (const auto& [key, value] : j["cost_model"].items()) {
            if (value.is_object()) {
                for (const auto& [sub, v] : value.items())
                    out << "cost_model," << key << "." << sub << "," << v.dump() << "\n";
            } else {
                out << "cost_model," << key << "," << value.dump() << "\n";
            }
        }
    }
    return out.str();
}

void write_report_files(const SimReport& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream out(out_dir + "/report.json", std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot write report.json in " + out_dir);
        out << report_to_json(report).dump(2) << "\n";
    }
    {
        std::ofstream out(out_dir + "/report.csv", std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot write report.csv in " + out_dir);
        out << report_to_csv(report);
    }
}

namespace {

json delta_pct(const json& a, const json& b) {
    if (!a.is_number() || !b.is_number()) return nullptr;
    double av = a.get<double>(), bv = b.get<double>();
    if (av == 0.0) return bv == 0.0 ? json(0.0) : json(nullptr);
    return json(100.0 * (bv - av) / av);
}

}  // namespace

json compare_reports(const json& a, const json& b) {
    const std::string ca = a.at("workload").at("checksum").get<std::string>();
    const std::string cb = b.at("workload").at("checksum").get<std::string>();
    if (ca != cb)
        throw Error(ErrorCode::Mismatch,
                    "reports come from different workloads (" + ca + " vs " + cb + ")");

    json out;
    out["workload_checksum"] = ca;
    json deltas;
    static const char* kMetrics[] = {"rpm", "pairs_scored", "mean_request_work", "recall_at_n",
                                     "impressions"};
    for (const auto& [name, ma] : a.at("matchers").items()) {
        if (!b.at("matchers").contains(name)) continue;
        const json& mb = b.at("matchers").at(name);
        json d;
        for (const char* key : kMetrics)
            if (ma.contains(key) && mb.contains(key))
                d[std::string(key) + "_pct"] = delta_pct(ma.at(key), mb.at(key));
        json wins;
        for (const auto& [type, va] : ma.at("winning_impressions").items())
            wins[type + "_pct"] = delta_pct(va, mb.at("winning_impressions").at(type));
        d["winning_impressions"] = std::move(wins);
        deltas[name] = std::move(d);
    }
    out["matchers"] = std::move(deltas);
    return out;
}

}  // namespace tfms
